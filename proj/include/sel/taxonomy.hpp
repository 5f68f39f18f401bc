#pragma once

#include <optional>
#include <string>

namespace sel {

/// Parameters of  u'' + (1-2rho) u'/r + lambda u^tau |u'|^{1-tau} / r^{1+tau} = r^theta u^q.
struct Parameters {
    int dim = 3;
    double q = 2.0;
    double tau = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    double theta = -4.0;
};

/// Throws InvalidInput naming the first violated constraint.
void validate(const Parameters& p);
bool is_valid(const Parameters& p) noexcept;

struct DerivedQuantities {
    double beta = 0.0;
    std::optional<double> upsilon;
    double f_at_beta = 0.0;
    std::optional<double> lambda_coeff;
    double c0 = 0.0;
};

enum class Case { N0a, N0b, N1a, N1b, N2 };

struct CaseTag {
    Case tag = Case::N0a;
    bool rho_equals_upsilon = false;
    // lambda == 0 with tau in (0,1) is not covered by the three-case split.
    bool outside_taxonomy = false;
};

enum class Multiplicity { none, one, two, double_root };

struct Roots {
    std::optional<double> varpi1;
    std::optional<double> varpi2;
    Multiplicity multiplicity = Multiplicity::none;
};

struct Existence {
    bool exists = false;
    std::optional<double> lambda_coeff;
};

inline constexpr double kUpsilonTol = 1e-9;
inline constexpr double kRootResidualTol = 1e-12;

double eval_f(const Parameters& p, double t);
/// Requires t < 0.
double eval_f_tilde(const Parameters& p, double t);
/// d f~ / dt, t < 0.
double eval_f_tilde_prime(const Parameters& p, double t);

double beta_of(const Parameters& p);
std::optional<double> upsilon_of(const Parameters& p);
/// (lambda tau)^{1/(tau+1)}; only meaningful for lambda > 0, tau in (0,1).
double separator(const Parameters& p);
double a_priori_c0(const Parameters& p);

DerivedQuantities derive(const Parameters& p);
CaseTag classify(const Parameters& p);
Roots find_negative_roots(const Parameters& p);
Existence existence(const Parameters& p);

bool is_n0(Case c);
bool is_n1(Case c);
std::string to_string(Case c);
std::string to_string(Multiplicity m);
Case case_from_string(const std::string& s);

}  // namespace sel
