#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/diffusion.hpp"
#include "fptb/fpt_density.hpp"

namespace fptb {

/// mu_lower = inf mu over (l, g(0) + K^+ + eps], mu_upper = sup mu over
/// [g(0) - K^- - eps, inf), K* = max(0, K^+ - mu_lower), K^ = max(0, K^- + mu_upper).
struct DriftEnvelope {
    double mu_lower = 0.0;
    double mu_upper = 0.0;
    double K_star = 0.0;
    double K_hat = 0.0;
    bool lower_finite = true;
    bool upper_finite = true;
};

DriftEnvelope drift_envelope(const DiffusionModel& model, const Boundary& g, double eps);

/// (sqrt(2/pi) (1/sqrt(1 - t0) + 2 B_sup sqrt(1 - t0)) + 2 K*) eps.
double d_eps_formula(double eps, double t0, double sup_density, double k);

/// Upper-boundary error term. Throws InapplicableError if mu_lower = -inf.
double d_eps_upper(const DiffusionModel& model, const Boundary& g, double eps, double t0, double B_sup);
/// Lower-boundary error term, interval A only. Throws InapplicableError if
/// mu_upper = +inf.
double d_eps_lower(const DiffusionModel& model, const Boundary& g, double eps, double t0, double C_sup);

enum class CertificateSide { OneSidedUpper, TwoSided };
enum class MaxRuleBranch { AtG, AtGMinusEps };

std::string to_string(CertificateSide side);
std::string to_string(MaxRuleBranch branch);

/// One of the two boundary configurations compared by the max rule: the
/// boundaries themselves, or shifted inwards by eps.
struct BranchDetail {
    double shift = 0.0;
    DriftEnvelope upper_envelope;
    double B_sup = 0.0;
    double D_eps = 0.0;
    std::optional<DriftEnvelope> lower_envelope;
    std::optional<double> C_sup;
    std::optional<double> D_eps_minus;
    double total = 0.0;
};

struct CrossingErrorCertificate {
    double eps = 0.0;
    double t0 = 0.0;
    double D_eps = 0.0;
    std::optional<double> D_eps_minus;
    double total = 0.0;
    CertificateSide side = CertificateSide::OneSidedUpper;
    MaxRuleBranch max_rule_branch = MaxRuleBranch::AtG;
    BranchDetail at_g;
    BranchDetail at_g_minus_eps;
    /// False when a two-sided problem has only one finite drift envelope;
    /// the finite side is still reported.
    bool applicable = true;
    std::string reason;

    double coefficient() const { return eps > 0.0 ? total / eps : 0.0; }
};

struct CertifyOptions {
    /// Fixed t0; empty selects t0 by minimising the total over [0, 1 - 1e-4].
    std::optional<double> t0;
    double grid_step = 1e-3;
};

inline constexpr double kMaxT0 = 1.0 - 1e-4;

/// Bound on |P(g) - P(f)| for ||g - f|| <= eps. With g_minus the problem is
/// two-sided (interval A only). eps = 0 returns a zero certificate.
CrossingErrorCertificate certify(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g_plus,
                                 double eps, const std::optional<Boundary>& g_minus = std::nullopt,
                                 const CertifyOptions& options = {});

/// As above with eps measured as the certified distance between the exact
/// boundaries and their approximations. Boundaries that agree on the whole
/// measuring grid are treated as identical (eps = 0).
CrossingErrorCertificate certify(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g_plus,
                                 const Boundary& f_plus, const std::optional<Boundary>& g_minus,
                                 const std::optional<Boundary>& f_minus, const CertifyOptions& options = {});

/// The terminal-set variant, P(no crossing, X_1 in a set), carries the same
/// bound.
inline CrossingErrorCertificate certify_terminal_set(const DiffusionModel& model, const ReferenceProcess& ref,
                                                     const Boundary& g_plus, double eps,
                                                     const std::optional<Boundary>& g_minus = std::nullopt,
                                                     const CertifyOptions& options = {}) {
    return certify(model, ref, g_plus, eps, g_minus, options);
}

/// (4 sqrt(B_sup / pi) + 2 K*) eps with B_sup over (0, 1].
double simple_bound(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double eps,
                    double grid_step = 1e-3);

struct PiecewiseLinearCertificate {
    PiecewiseLinearApproximation approximation;
    double xi = 0.0;
    int segments = 0;
    CrossingErrorCertificate certificate;
};

/// Uniform partition into n segments, eps = xi / (8 n^2) with xi >= |g''|
/// supplied or grid-certified.
PiecewiseLinearCertificate piecewise_linear_certificate(const DiffusionModel& model, const ReferenceProcess& ref,
                                                        const Boundary& g, int n,
                                                        std::optional<double> xi = std::nullopt,
                                                        const CertifyOptions& options = {});

}  // namespace fptb
