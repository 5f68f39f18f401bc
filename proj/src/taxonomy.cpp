#include "sel/taxonomy.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "sel/errors.hpp"

namespace sel {

namespace {

bool finite_all(const Parameters& p) {
    return std::isfinite(p.q) && std::isfinite(p.tau) && std::isfinite(p.lambda) &&
           std::isfinite(p.rho) && std::isfinite(p.theta);
}

// Root of f~ inside [lo, hi] where f~(lo), f~(hi) have opposite signs, then
// Newton-polished so the residual reaches round-off.
double solve_bracket(const Parameters& p, double lo, double hi) {
    auto g = [&](double t) { return eval_f_tilde(p, t); };
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi), tol, iters);
    double t = 0.5 * (a + b);
    for (int k = 0; k < 4; ++k) {
        const double d = eval_f_tilde_prime(p, t);
        if (d == 0.0) break;
        const double next = t - g(t) / d;
        if (!(next > lo && next < hi)) break;
        if (std::abs(g(next)) >= std::abs(g(t))) break;
        t = next;
    }
    return t;
}

[[noreturn]] void bracket_failure(const char* where) {
    throw NumericalFailure(std::string("root bracket expansion failed: ") + where);
}

}  // namespace

void validate(const Parameters& p) {
    if (!finite_all(p)) throw InvalidInput("parameters must be finite");
    if (p.dim < 2) throw InvalidInput("dim must be >= 2");
    if (!(p.q > 1.0)) throw InvalidInput("q must be > 1");
    if (!(p.tau >= 0.0 && p.tau < 1.0)) throw InvalidInput("tau must lie in [0,1)");
}

bool is_valid(const Parameters& p) noexcept {
    return finite_all(p) && p.dim >= 2 && p.q > 1.0 && p.tau >= 0.0 && p.tau < 1.0;
}

double eval_f(const Parameters& p, double t) {
    const double a = std::abs(t);
    const double g = a == 0.0 ? 0.0 : std::pow(a, 1.0 - p.tau);
    return t * (t + 2.0 * p.rho) + p.lambda * g;
}

double eval_f_tilde(const Parameters& p, double t) {
    if (!(t < 0.0)) throw InvalidInput("f~ is defined for t < 0 only");
    return -t - 2.0 * p.rho + p.lambda * std::pow(-t, -p.tau);
}

double eval_f_tilde_prime(const Parameters& p, double t) {
    if (!(t < 0.0)) throw InvalidInput("f~ is defined for t < 0 only");
    return -1.0 + p.lambda * p.tau * std::pow(-t, -p.tau - 1.0);
}

double beta_of(const Parameters& p) { return (p.theta + 2.0) / (p.q - 1.0); }

std::optional<double> upsilon_of(const Parameters& p) {
    if (p.lambda > 0.0 && p.tau > 0.0)
        return (p.tau + 1.0) / (2.0 * p.tau) * separator(p);
    return std::nullopt;
}

double separator(const Parameters& p) {
    return std::pow(p.lambda * p.tau, 1.0 / (p.tau + 1.0));
}

double a_priori_c0(const Parameters& p) {
    const double lp = std::max(p.lambda, 0.0);
    const double n = p.dim;
    const double inner = 16.0 / (p.q - 1.0) *
                             (2.0 * (p.q + 1.0) / (p.q - 1.0) + n +
                              std::abs(n - 2.0 + 2.0 * p.rho) + (1.0 - p.tau) * lp) +
                         4.0 * p.tau * lp;
    return std::pow(2.0, std::abs(p.theta) / (p.q - 1.0)) * std::pow(inner, 1.0 / (p.q - 1.0));
}

DerivedQuantities derive(const Parameters& p) {
    validate(p);
    DerivedQuantities d;
    d.beta = beta_of(p);
    d.upsilon = upsilon_of(p);
    d.f_at_beta = eval_f(p, d.beta);
    if (d.f_at_beta > 0.0) d.lambda_coeff = std::pow(d.f_at_beta, 1.0 / (p.q - 1.0));
    d.c0 = a_priori_c0(p);
    return d;
}

CaseTag classify(const Parameters& p) {
    validate(p);
    CaseTag c;
    if (p.tau == 0.0) {
        c.tag = p.lambda >= 2.0 * p.rho ? Case::N0a : Case::N1a;
        return c;
    }
    if (p.lambda < 0.0) {
        c.tag = Case::N1b;
        return c;
    }
    if (p.lambda == 0.0) {
        // f~(t) = -t - 2 rho has a negative root exactly when rho > 0, the N1 sign pattern.
        c.outside_taxonomy = true;
        c.tag = p.rho > 0.0 ? Case::N1b : Case::N0b;
        return c;
    }
    const double ups = *upsilon_of(p);
    if (std::abs(p.rho - ups) <= kUpsilonTol * (1.0 + std::abs(ups))) {
        c.tag = Case::N2;
        c.rho_equals_upsilon = true;
    } else {
        c.tag = p.rho < ups ? Case::N0b : Case::N2;
    }
    return c;
}

Roots find_negative_roots(const Parameters& p) {
    const CaseTag c = classify(p);
    Roots r;
    switch (c.tag) {
        case Case::N0a:
        case Case::N0b:
            return r;
        case Case::N1a:
            r.varpi1 = p.lambda - 2.0 * p.rho;
            r.multiplicity = Multiplicity::one;
            return r;
        case Case::N1b: {
            if (p.lambda == 0.0) {
                r.varpi1 = -2.0 * p.rho;
                r.multiplicity = Multiplicity::one;
                return r;
            }
            // f~ strictly decreasing from +inf to -inf.
            double lo = -1.0, hi = -1.0;
            int k = 0;
            while (eval_f_tilde(p, lo) <= 0.0) {
                lo *= 2.0;
                if (++k > 2000) bracket_failure("N1b lower");
            }
            k = 0;
            while (eval_f_tilde(p, hi) >= 0.0) {
                hi *= 0.5;
                if (++k > 2000) bracket_failure("N1b upper");
            }
            r.varpi1 = solve_bracket(p, lo, hi);
            r.multiplicity = Multiplicity::one;
            return r;
        }
        case Case::N2: {
            const double s = separator(p);
            if (c.rho_equals_upsilon) {
                r.varpi1 = -s;
                r.varpi2 = -s;
                r.multiplicity = Multiplicity::double_root;
                return r;
            }
            if (!(eval_f_tilde(p, -s) < 0.0)) bracket_failure("separator sign");
            double k1 = 2.0;
            while (eval_f_tilde(p, -s * k1) < 0.0) {
                k1 *= 2.0;
                if (k1 > 1e300) bracket_failure("N2 lower");
            }
            double k2 = 2.0;
            while (eval_f_tilde(p, -s / k2) < 0.0) {
                k2 *= 2.0;
                if (k2 > 1e300) bracket_failure("N2 upper");
            }
            r.varpi1 = solve_bracket(p, -s * k1, -s);
            r.varpi2 = solve_bracket(p, -s, -s / k2);
            r.multiplicity = Multiplicity::two;
            return r;
        }
    }
    return r;
}

Existence existence(const Parameters& p) {
    const DerivedQuantities d = derive(p);
    return {d.lambda_coeff.has_value(), d.lambda_coeff};
}

bool is_n0(Case c) { return c == Case::N0a || c == Case::N0b; }
bool is_n1(Case c) { return c == Case::N1a || c == Case::N1b; }

std::string to_string(Case c) {
    switch (c) {
        case Case::N0a: return "N0a";
        case Case::N0b: return "N0b";
        case Case::N1a: return "N1a";
        case Case::N1b: return "N1b";
        case Case::N2: return "N2";
    }
    return "?";
}

std::string to_string(Multiplicity m) {
    switch (m) {
        case Multiplicity::none: return "none";
        case Multiplicity::one: return "one";
        case Multiplicity::two: return "two";
        case Multiplicity::double_root: return "double";
    }
    return "?";
}

Case case_from_string(const std::string& s) {
    if (s == "N0a") return Case::N0a;
    if (s == "N0b") return Case::N0b;
    if (s == "N1a") return Case::N1a;
    if (s == "N1b") return Case::N1b;
    if (s == "N2") return Case::N2;
    throw InvalidInput("unknown case tag: " + s);
}

}  // namespace sel
