#include "fptb/numerics/rng.hpp"

namespace fptb::numerics {

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed_value) noexcept {
    std::uint64_t sm = seed_value;
    for (auto& word : state_) word = splitmix64(sm);
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

namespace {
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = stream_id ^ 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = splitmix64(t);
    return a ^ rotl(b, 17) ^ (b * 0x9e3779b97f4a7c15ULL);
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : engine_(stream_key(seed, stream_id)) {}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

}  // namespace fptb::numerics
