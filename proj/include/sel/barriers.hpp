#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sel/operator.hpp"
#include "sel/taxonomy.hpp"

namespace sel {

enum class Family { P_pm, W_exp, Z_exp, V_sup, V_log, Phi2, Psi1_sub, PsiTilde, PLog_pm, U };

/// sub: residual >= 0, super: residual <= 0.
enum class ExpectedSign { sub, super, both };

/// operator_only certifies L[u] against 0 instead of r^theta u^q.
enum class Target { full_equation, operator_only };

using Coefficients = std::map<std::string, double>;

struct Barrier {
    Family family = Family::U;
    Coefficients coefficients;
    double r_lo = 0.0;  // open interval; 0 and +inf allowed
    double r_hi = 0.0;
    ExpectedSign expected_sign = ExpectedSign::both;
    Target target = Target::full_equation;
    std::function<LogJet(double)> jet;

    std::string id() const;
    RadialTriple eval(double r) const { return to_triple(r, jet(r)); }
};

struct GridOptions {
    int points = 10000;
    double decades = 8.0;  // span used when one end of the domain is 0 or +inf
    std::uint64_t seed = 0;
    int fd_points = 32;
};

struct SignCertificate {
    std::string barrier_id;
    int grid_size = 0;
    double r_min = 0.0;
    double r_max = 0.0;
    double min_abs_residual = 0.0;  // relative to the residual scale
    std::vector<std::pair<double, double>> violations;  // (r, relative residual), sorted by r
    double fd_max_error = 0.0;
    bool pass = false;
};

struct Certification {
    Barrier barrier;
    SignCertificate certificate;
    int attempts = 0;
};

inline constexpr double kFdStepRel = 1e-6;
inline constexpr double kFdAgreement = 1e-4;

std::vector<Family> all_families();
std::string to_string(Family f);
Family family_from_string(const std::string& s);
std::string to_string(ExpectedSign s);

/// Fills defaults for missing coefficients and checks the family's hypotheses literally.
/// Throws HypothesisViolation naming the failed constraint.
Barrier make_barrier(const Parameters& p, Family family, const Coefficients& coeffs = {});

std::vector<double> barrier_grid(const Barrier& b, const GridOptions& opt);

/// Throws NumericalFailure when analytic and finite-difference derivatives disagree.
SignCertificate verify_barrier(const Parameters& p, const Barrier& b, const GridOptions& opt = {});

/// verify_barrier with the existential constants (small radii, small exponents, large radii)
/// shrunk or grown by a factor 10 up to 5 times until the certificate passes.
Certification certify(const Parameters& p, Family family, const Coefficients& coeffs = {},
                      const GridOptions& opt = {});

}  // namespace sel
