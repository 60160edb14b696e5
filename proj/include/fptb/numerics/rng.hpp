#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace fptb::numerics {

/// xoshiro256++ engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed_value) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

private:
    std::uint64_t state_[4];
};

/// Reproducible random stream identified by (seed, stream_id). Distinct ids
/// give decorrelated engines: the pair is hashed through SplitMix64 before
/// seeding. One stream per consumer; not thread-safe.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    /// Uniform on [0, 1).
    double uniform();
    double normal();

    Xoshiro256pp& engine() noexcept { return engine_; }

private:
    Xoshiro256pp engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace fptb::numerics
