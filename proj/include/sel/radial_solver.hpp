#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sel/errors.hpp"
#include "sel/profiles.hpp"
#include "sel/taxonomy.hpp"

namespace sel {

class BisectionFailed : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

struct Sample {
    double r = 0.0;
    double u = 0.0;
    double du = 0.0;
};

enum class IntegrationStatus { ok, blow_up, blow_down, step_underflow };

struct Provenance {
    std::string kind;    // exact_U, integration, shooting, scaled, kelvin
    std::string family;  // shooting family or empty
    std::string method;
    std::map<std::string, double> values;
};

/// Samples sorted by increasing r. Interpolation is cubic Hermite in (log r, log u).
struct RadialSolution {
    Parameters params;
    std::vector<Sample> samples;
    Provenance provenance;
    IntegrationStatus status = IntegrationStatus::ok;
    double t_reached = 0.0;  // log r where integration stopped

    double value(double r) const;
    /// r u'(r) / u(r)
    double log_slope(double r) const;
    double r_min() const { return samples.front().r; }
    double r_max() const { return samples.back().r; }
};

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-16;  // acts on r u'/u, which decays like a power of r in flat tails
    double max_step = 0.1;  // in log r
    double grid_dt = 0.002;  // output spacing in log r
};

inline constexpr double kBlowDownFloor = 1e-300;
inline constexpr double kBlowUpCap = 1e300;

/// w'' for w(t) = u(e^t):  2 rho w' - lambda w^tau |w'|^{1-tau} + e^{(theta+2) t} w^q.
double rhs_log(const Parameters& p, double t, double w, double dw);

/// Integrates from t0 to t1 (either direction) with w(t0) = w0, w'(t0) = dw0.
/// Early stops are reported through status and t_reached; samples cover the part reached.
RadialSolution integrate(const Parameters& p, double t0, double t1, double w0, double dw0,
                         const Tolerances& tol = {});

RadialSolution construct_exact_U(const Parameters& p, double t0 = std::log(1e-8),
                                 double t1 = std::log(1e8), double dt = 0.01);

enum class ShootFamily { u_inf_c, u_b, u_b_inf_c };

struct ShootingSpec {
    ShootFamily family = ShootFamily::u_inf_c;
    double t_start = std::log(1e-8);
    double t_end = std::log(1e8);
    std::optional<ProfileSpec> seed_profile;
    double perturbation = 0.0;
    std::optional<double> target;    // c for u_inf_c, b for u_b and u_b_inf_c
    std::optional<double> target_c;  // c for u_b_inf_c
};

/// Requires theta < -2 and f(beta) > 0. Throws FamilyUnavailable outside the family's regime.
RadialSolution shoot(const Parameters& p, const ShootingSpec& spec, const Tolerances& tol = {});

/// Forward shooting from zero-end profile data with bisection on the seed amplitude.
/// Independent route to u_b; returns the bisected amplitude b at spec.t_start.
struct BisectionShot {
    double b = 0.0;
    int iterations = 0;
    RadialSolution solution;
};
BisectionShot shoot_u_b_by_bisection(const Parameters& p, const ShootingSpec& spec,
                                     const Tolerances& tol = {});

/// Forward shooting from r = e^{t_seed} with seed u = a r^{exponent}, r u'/u = exponent.
/// The amplitude a is bisected until u(e^{t1}) = u1. Suited to zero-end behaviours that
/// attract in forward time but repel when integrated toward r = 0.
RadialSolution shoot_from_zero(const Parameters& p, double exponent, double t_seed, double t1, double u1,
                               const Tolerances& tol = {});

/// T_sigma[u](r) = sigma^beta u(sigma r)
RadialSolution scale(const RadialSolution& s, double sigma);

/// (N, q, tau, lambda, -rho, -theta-4)
Parameters kelvin(const Parameters& p);
/// v(r) = u(1/r) under kelvin(params)
RadialSolution kelvin_solution(const RadialSolution& s);

/// Max over interior samples of the normalized residual of the log-radius equation,
/// with w'' from a 5-point stencil of the sampled r u'/u.
double max_relative_residual(const RadialSolution& s);

/// Checks u(r) <= C_0 r^{-beta} at every sample with r <= r0.
bool apriori_bound_holds(const RadialSolution& s, double r0 = 1.0);

struct TransformedSample {
    double r = 0.0;
    double v = 0.0;
    double dv = 0.0;
    double d2v = 0.0;
};

struct TransformedSolution {
    std::string form;    // exponential (w = log u) or power (v = u^{1/alpha})
    double mu = 0.0;     // 2 - N - 2 rho
    double alpha = 0.0;  // power form only
    double eta = 0.0;    // power form only: lambda alpha^alpha
    double K = 0.0;      // power form only: q alpha
    std::vector<TransformedSample> samples;
    double max_residual = 0.0;  // relative residual of the transformed radial equation
};

TransformedSolution to_exponential_form(const RadialSolution& s);
/// Requires tau = 1 - alpha.
TransformedSolution to_power_form(const RadialSolution& s, double alpha);

/// CSV with header r,u,du and 17 significant digits.
std::string to_csv(const RadialSolution& s);
/// Parses samples only; params and provenance are left default.
std::vector<Sample> samples_from_csv(const std::string& text);

std::string to_string(ShootFamily f);
ShootFamily shoot_family_from_string(const std::string& s);
std::string to_string(IntegrationStatus s);

}  // namespace sel
