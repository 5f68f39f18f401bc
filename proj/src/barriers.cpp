#include "sel/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sel/errors.hpp"
#include "sel/profiles.hpp"

namespace sel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// g(L) with L = log r, stored as log g, g'/g, g''/g (derivatives in L).
struct GJet {
    double lg = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
};

GJet unit() { return {}; }

GJet mul(const GJet& a, const GJet& b) {
    return {a.lg + b.lg, a.g1 + b.g1, a.g2 + 2.0 * a.g1 * b.g1 + b.g2};
}

GJet power(const GJet& f, double k) {
    return {k * f.lg, k * f.g1, k * f.g2 + k * (k - 1.0) * f.g1 * f.g1};
}

// |L|^k
GJet abs_log_pow(double L, double k) {
    return {k * std::log(std::abs(L)), k / L, k * (k - 1.0) / (L * L)};
}

// 1 + k e^{alpha L}
GJet one_plus_exp(double L, double k, double alpha) {
    const double ks = k * std::exp(alpha * L);
    const double f = 1.0 + ks;
    return {std::log1p(ks), alpha * ks / f, alpha * alpha * ks / f};
}

// 1 + |L|^{-alpha} / nu
GJet one_plus_log_pow(double L, double alpha, double nu) {
    const double m = std::pow(std::abs(L), -alpha) / nu;
    const double f = 1.0 + m;
    return {std::log1p(m), -alpha * m / L / f, alpha * (alpha + 1.0) * m / (L * L) / f};
}

// c r^a g
LogJet term(double L, double log_c, double a, const GJet& g) {
    return {log_c + a * L + g.lg, a + g.g1, a * (a - 1.0) + (2.0 * a - 1.0) * g.g1 + g.g2};
}

LogJet add(const LogJet& x, const LogJet& y) {
    const double m = std::max(x.log_u, y.log_u);
    const double wx = std::exp(x.log_u - m);
    const double wy = std::exp(y.log_u - m);
    const double s = wx + wy;
    return {m + std::log(s), (wx * x.a + wy * y.a) / s, (wx * x.b + wy * y.b) / s};
}

struct Context {
    Parameters p;
    CaseTag tag;
    Roots roots;
    DerivedQuantities d;
};

Context context(const Parameters& p) {
    validate(p);
    return {p, classify(p), find_negative_roots(p), derive(p)};
}

class Checker {
public:
    explicit Checker(Family f) : name_(to_string(f)) {}
    void require(bool ok, const std::string& constraint) const {
        if (!ok) throw HypothesisViolation(name_, constraint);
    }

private:
    std::string name_;
};

double get(const Coefficients& c, const std::string& key, double fallback) {
    auto it = c.find(key);
    return it == c.end() ? fallback : it->second;
}

bool has(const Coefficients& c, const std::string& key) { return c.count(key) > 0; }

void reject_unknown(const Coefficients& c, std::initializer_list<const char*> known, Family f) {
    for (const auto& [k, v] : c) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw InvalidInput(to_string(f) + ": unknown coefficient '" + k + "'");
        if (!std::isfinite(v)) throw InvalidInput(to_string(f) + ": coefficient '" + k + "' not finite");
    }
}

bool n1_or_n2(const Context& c) { return is_n1(c.tag.tag) || c.tag.tag == Case::N2; }
bool at_upsilon(const Context& c) { return c.tag.tag == Case::N2 && c.tag.rho_equals_upsilon; }

// Smallest R >= e with r^{-kappa} (log r)^m <= K for every r >= R (kappa, m > 0).
double power_log_threshold(double kappa, double m, double K) {
    auto phi = [&](double L) { return m * std::log(L) - kappa * L; };
    const double peak = m / kappa;
    if (phi(std::max(peak, 1.0)) <= std::log(K)) return std::exp(1.0);
    double lo = std::max(peak, 1.0), hi = 2.0 * lo;
    while (phi(hi) > std::log(K)) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > std::log(K) ? lo : hi) = mid;
    }
    return std::exp(hi);
}

// Largest T such that (1+t)^{1-tau} >= 1 + (1-tau) t - tau(1-tau) t^2/2 + tau(1-tau^2) t^3/8 on (0,T).
double cubic_taylor_range(double tau) {
    auto gap = [&](double t) {
        return std::pow(1.0 + t, 1.0 - tau) -
               (1.0 + (1.0 - tau) * t - tau * (1.0 - tau) * t * t / 2.0 +
                tau * (1.0 - tau * tau) * t * t * t / 8.0);
    };
    double prev = 1e-6;
    for (double t = 1e-3; t < 1e3; t *= 1.01) {
        if (gap(t) < 0.0) {
            double lo = prev, hi = t;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (gap(mid) >= 0.0 ? lo : hi) = mid;
            }
            return lo;
        }
        prev = t;
    }
    return 1e3;
}

Barrier make_p_pm(const Context& c, const Coefficients& in) {
    const Family fam = Family::P_pm;
    reject_unknown(in, {"sign", "C", "eta", "alpha", "nu"}, fam);
    Checker ck(fam);
    ck.require(c.d.f_at_beta > 0.0, "f(beta) > 0");
    const double beta = c.d.beta, lam = *c.d.lambda_coeff;
    ck.require(beta != 0.0, "beta != 0");
    const double s = get(in, "sign", 1.0);
    ck.require(s == 1.0 || s == -1.0, "sign in {+1,-1}");
    Coefficients k{{"sign", s},
                   {"C", get(in, "C", s > 0 ? 2.0 * lam : 0.5 * lam)},
                   {"eta", get(in, "eta", std::abs(beta) / 6.0)},
                   {"alpha", get(in, "alpha", std::abs(beta) / 6.0)},
                   {"nu", get(in, "nu", 1.0)}};
    const double C = k["C"], eta = k["eta"], alpha = k["alpha"], nu = k["nu"];
    if (s > 0) ck.require(C > lam, "C > Lambda for P+");
    else ck.require(C > 0.0 && C < lam, "0 < C < Lambda for P-");
    ck.require(eta > 0.0 && eta < std::abs(beta) / 3.0, "eta in (0, |beta|/3)");
    ck.require(alpha > 0.0 && alpha < std::abs(beta) / 3.0, "alpha in (0, |beta|/3)");
    ck.require(nu > 0.0, "nu > 0");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = 1.0;
    b.expected_sign = s > 0 ? ExpectedSign::super : ExpectedSign::sub;
    const double kk = 1.0 / (std::sqrt(alpha) * nu);
    b.jet = [=](double r) {
        const double L = std::log(r);
        return term(L, std::log(C), -beta - s * eta, power(one_plus_exp(L, kk, alpha), s));
    };
    return b;
}

Barrier make_w_exp(const Context& c, const Coefficients& in) {
    const Family fam = Family::W_exp;
    reject_unknown(in, {"c", "alpha", "delta", "rstar"}, fam);
    Checker ck(fam);
    const double beta = c.d.beta;
    ck.require(beta < 0.0, "beta < 0");
    ck.require(c.d.f_at_beta > 0.0, "f(beta) > 0");
    if (c.tag.tag == Case::N0b || c.tag.tag == Case::N2)
        ck.require(beta <= -c.p.rho, "beta <= -rho in Case N0b or N2");
    const double lam = *c.d.lambda_coeff;
    Coefficients k{{"c", get(in, "c", 0.5 * lam)},
                   {"alpha", get(in, "alpha", 1.0)},
                   {"rstar", get(in, "rstar", 0.5)}};
    const double cc = k["c"], alpha = k["alpha"], rstar = k["rstar"];
    ck.require(cc > 0.0 && cc <= lam, "c in (0, Lambda]");
    ck.require(alpha > 0.0, "alpha > 0");
    ck.require(rstar > 0.0 && rstar < std::log(2.0), "r_* in (0, log 2)");
    const double hi = std::pow(rstar, 1.0 / alpha);
    k["delta"] = get(in, "delta", 1e-6 * hi);
    const double delta = k["delta"];
    ck.require(delta > 0.0 && delta < hi, "delta in (0, r_*^{1/alpha})");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = delta;
    b.r_hi = hi;
    b.expected_sign = ExpectedSign::sub;
    const double da = std::pow(delta, alpha);
    b.jet = [=](double r) {
        const double L = std::log(r);
        const double s = std::exp(alpha * L);
        const double e = -std::expm1(da - s);
        GJet g{s + std::log(e), alpha * s / e, alpha * alpha * s * (1.0 + s) / e};
        return term(L, std::log(cc), -beta, g);
    };
    return b;
}

Barrier make_z_exp(const Context& c, const Coefficients& in) {
    const Family fam = Family::Z_exp;
    reject_unknown(in, {"c", "eps", "delta", "nu", "tstar"}, fam);
    Checker ck(fam);
    ck.require(n1_or_n2(c), "Case N1 or N2");
    const double beta = c.d.beta, w1 = *c.roots.varpi1, q = c.p.q;
    ck.require(beta > w1 && beta < 0.0, "beta in (varpi1, 0)");
    const double eps_cap = (q - 1.0) * (beta - w1) / 2.0;
    Coefficients k{{"eps", get(in, "eps", std::min(0.5 * eps_cap, 0.25))},
                   {"delta", get(in, "delta", 0.5)},
                   {"tstar", get(in, "tstar", 0.1)}};
    const double eps = k["eps"], delta = k["delta"], tstar = k["tstar"];
    ck.require(eps > 0.0 && eps < eps_cap, "0 < eps < (q-1)(beta - varpi1)/2");
    ck.require(delta > 0.0 && delta < 1.0, "delta in (0,1)");
    ck.require(tstar > 0.0 && tstar < 1.0, "t_* in (0,1)");
    double c_eps = 0.0;
    if (at_upsilon(c)) {
        // The Taylor lower bound used for the gradient term holds for every t > 0 here,
        // so the only restriction on eps is the cap above.
        k["nu"] = get(in, "nu", 0.5);
        ck.require(k["nu"] > 0.0 && k["nu"] < 1.0, "nu in (0,1)");
        const double a = 1.0 - (1.0 - c.p.tau) * (1.0 + k["nu"]) / 2.0;
        c_eps = std::pow(eps * eps * a / 5.0, 1.0 / (q - 1.0));
    } else {
        ck.require(!has(in, "nu"), "nu only applies at rho = Upsilon");
        const double aw = std::abs(w1);
        const double a = aw * (1.0 - c.p.lambda * c.p.tau * std::pow(aw, -c.p.tau - 1.0));
        c_eps = std::pow(eps * a / 3.0, 1.0 / (q - 1.0));
    }
    k["c"] = get(in, "c", 0.5 * c_eps);
    const double cc = k["c"];
    ck.require(cc > 0.0 && cc < c_eps, "c in (0, c_eps)");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = std::pow(tstar, 1.0 / eps);
    b.expected_sign = ExpectedSign::sub;
    b.jet = [=](double r) {
        const double L = std::log(r);
        const double s = std::exp(eps * L);
        const double em = std::expm1(s);
        GJet f{std::log(-std::expm1(-s)), eps * s / em, eps * eps * s * (1.0 - s) / em};
        return term(L, std::log(cc), eps - w1, power(f, delta - 1.0));
    };
    return b;
}

Barrier make_v_sup(const Context& c, const Coefficients& in) {
    const Family fam = Family::V_sup;
    reject_unknown(in, {"eps", "M", "R"}, fam);
    Checker ck(fam);
    const bool n1 = is_n1(c.tag.tag);
    ck.require(n1 || (c.tag.tag == Case::N2 && !c.tag.rho_equals_upsilon),
               "Case N1, or Case N2 with rho > Upsilon");
    const double beta = c.d.beta, w1 = *c.roots.varpi1;
    if (!n1) {
        const double w2 = *c.roots.varpi2;
        ck.require(beta > w1 && !near_equal(beta, w1) && (beta <= w2 || near_equal(beta, w2)),
                   "beta in (varpi1, varpi2]");
    }
    Coefficients k{{"eps", get(in, "eps", 1.0)}, {"M", get(in, "M", 1.0)}, {"R", get(in, "R", 1.0)}};
    const double eps = k["eps"], M = k["M"], R = k["R"];
    ck.require(eps > 0.0, "eps > 0");
    ck.require(M > 0.0, "M > 0");
    ck.require(R > 0.0, "R > 0");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = R;
    b.expected_sign = ExpectedSign::super;
    const double a0 = n1 ? 0.0 : -beta;
    b.jet = [=](double r) {
        const double L = std::log(r);
        return add(term(L, std::log(eps), a0, unit()), term(L, std::log(M), -w1, unit()));
    };
    return b;
}

Barrier make_v_log(const Context& c, const Coefficients& in) {
    const Family fam = Family::V_log;
    reject_unknown(in, {"eps", "M"}, fam);
    Checker ck(fam);
    ck.require(n1_or_n2(c), "Case N1 or N2");
    const double w1 = *c.roots.varpi1, q = c.p.q;
    ck.require(near_equal(c.d.beta, w1), "beta = varpi1");
    double M0 = 0.0, pp = 0.0;
    if (at_upsilon(c)) {
        M0 = std::pow(2.0 * (q + 1.0) / ((q - 1.0) * (q - 1.0)), 1.0 / (q - 1.0));
        pp = 2.0 / (q - 1.0);
    } else {
        const double aw = std::abs(w1);
        M0 = std::pow((q / (q - 1.0) - w1 + std::abs(c.p.lambda) * std::pow(aw, -c.p.tau)) / (q - 1.0),
                      1.0 / (q - 1.0));
        pp = 1.0 / (q - 1.0);
    }
    Coefficients k{{"eps", get(in, "eps", 1.0)}, {"M", get(in, "M", M0)}};
    const double eps = k["eps"], M = k["M"];
    ck.require(eps > 0.0, "eps > 0");
    ck.require(M >= M0, "M >= M_0");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = std::exp(-1.0);
    b.expected_sign = ExpectedSign::super;
    const double a0 = c.tag.tag == Case::N2 ? -w1 : 0.0;
    b.jet = [=](double r) {
        const double L = std::log(r);
        return add(term(L, std::log(eps), a0, unit()),
                   term(L, std::log(M), -w1, abs_log_pow(L, -pp)));
    };
    return b;
}

Barrier make_phi2(const Context& c, const Coefficients& in) {
    const Family fam = Family::Phi2;
    reject_unknown(in, {"rstar"}, fam);
    Checker ck(fam);
    ck.require(at_upsilon(c), "Case N2 with rho = Upsilon");
    const double w2 = *c.roots.varpi2, tau = c.p.tau;
    const double bound = 2.0 / ((1.0 + tau) * std::abs(w2));
    Coefficients k{{"rstar", get(in, "rstar", std::min(std::exp(-2.0 * bound), 1e-3))}};
    const double rstar = k["rstar"];
    ck.require(rstar > 0.0 && rstar < 1.0, "r_* in (0,1)");
    ck.require(std::log(1.0 / rstar) > bound, "log(1/r_*) > 2/((1+tau)|varpi2|)");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = rstar;
    b.expected_sign = ExpectedSign::super;
    b.target = Target::operator_only;
    const double lp = 2.0 / (1.0 + tau);
    b.jet = [=](double r) {
        const double L = std::log(r);
        return term(L, 0.0, -w2, abs_log_pow(L, lp));
    };
    return b;
}

Barrier make_psi1_sub(const Context& c, const Coefficients& in) {
    const Family fam = Family::Psi1_sub;
    reject_unknown(in, {"Rstar"}, fam);
    Checker ck(fam);
    ck.require(at_upsilon(c), "Case N2 with rho = Upsilon");
    const double w1 = *c.roots.varpi1, tau = c.p.tau, q = c.p.q, beta = c.d.beta;
    ck.require(beta < w1 && !near_equal(beta, w1), "beta < varpi1");
    const double aw = std::abs(w1);
    const double kappa = (q - 1.0) * (w1 - beta);
    const double m = 3.0 + 2.0 * (q - 1.0) / (1.0 + tau);
    const double K = (1.0 - tau) / ((1.0 + tau) * (1.0 + tau) * aw);
    const double r_power = power_log_threshold(kappa, m, K);
    const double r_taylor = std::exp(2.0 / ((1.0 + tau) * aw * cubic_taylor_range(tau)));
    const double rmin = std::max(r_power, r_taylor);
    ck.require(std::isfinite(rmin), "R_* representable in double precision");
    Coefficients k{{"Rstar", get(in, "Rstar", rmin)}};
    const double R = k["Rstar"];
    ck.require(R >= rmin * (1.0 - 1e-12), "R_* satisfies the power-log and Taylor-range conditions");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = R;
    b.r_hi = kInf;
    b.expected_sign = ExpectedSign::sub;
    const double lp = 2.0 / (1.0 + tau);
    b.jet = [=](double r) {
        const double L = std::log(r);
        return term(L, 0.0, -w1, abs_log_pow(L, lp));
    };
    return b;
}

Barrier make_psi_tilde(const Context& c, const Coefficients& in) {
    const Family fam = Family::PsiTilde;
    reject_unknown(in, {"R1", "C"}, fam);
    Checker ck(fam);
    ck.require(at_upsilon(c), "Case N2 with rho = Upsilon");
    Coefficients k{{"R1", get(in, "R1", 1e3)}, {"C", get(in, "C", 1.0)}};
    const double R1 = k["R1"], C = k["C"];
    ck.require(R1 > 1.0, "R_1 > 1");
    ck.require(C > 0.0, "C > 0");
    const double w1 = *c.roots.varpi1, lp = 2.0 / (1.0 + c.p.tau);

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = R1;
    b.r_hi = kInf;
    b.expected_sign = ExpectedSign::super;
    b.target = Target::operator_only;
    b.jet = [=](double r) {
        const double L = std::log(r);
        return add(term(L, 0.0, -w1, abs_log_pow(L, lp)), term(L, std::log(C), -w1, abs_log_pow(L, 1.0)));
    };
    return b;
}

Barrier make_plog_pm(const Context& c, const Coefficients& in) {
    const Family fam = Family::PLog_pm;
    reject_unknown(in, {"sign", "C", "eta", "alpha", "nu", "rC"}, fam);
    Checker ck(fam);
    ck.require(n1_or_n2(c), "Case N1 or N2");
    const double w1 = *c.roots.varpi1;
    ck.require(near_equal(c.d.beta, w1), "beta = varpi1");
    const ZGammaConstants z = zgamma(c.p, false);
    const double s = get(in, "sign", 1.0);
    ck.require(s == 1.0 || s == -1.0, "sign in {+1,-1}");
    Coefficients k{{"sign", s},
                   {"C", get(in, "C", s > 0 ? 2.0 * z.gamma : 0.5 * z.gamma)},
                   {"eta", get(in, "eta", z.p / 6.0)},
                   {"alpha", get(in, "alpha", z.p / 6.0)},
                   {"nu", get(in, "nu", 1.0)},
                   {"rC", get(in, "rC", 1e-3)}};
    const double C = k["C"], eta = k["eta"], alpha = k["alpha"], nu = k["nu"], rC = k["rC"];
    if (s > 0) ck.require(C > z.gamma, "C > gamma for P+");
    else ck.require(C > 0.0 && C < z.gamma, "0 < C < gamma for P-");
    ck.require(eta > 0.0 && eta < z.p / 3.0, "eta in (0, p/3)");
    ck.require(alpha > 0.0 && alpha < z.p / 3.0, "alpha in (0, p/3)");
    ck.require(nu > 0.0, "nu > 0");
    ck.require(rC > 0.0 && rC < std::exp(-1.0), "r_C in (0, 1/e)");

    Barrier b;
    b.family = fam;
    b.coefficients = k;
    b.r_lo = 0.0;
    b.r_hi = rC;
    b.expected_sign = s > 0 ? ExpectedSign::super : ExpectedSign::sub;
    const double lp = -z.p + s * eta;
    b.jet = [=](double r) {
        const double L = std::log(r);
        const GJet g = mul(abs_log_pow(L, lp), power(one_plus_log_pow(L, alpha, nu), s));
        return term(L, std::log(C), -w1, g);
    };
    return b;
}

Barrier make_u(const Context& c, const Coefficients& in) {
    const Family fam = Family::U;
    reject_unknown(in, {}, fam);
    Checker ck(fam);
    ck.require(c.d.f_at_beta > 0.0, "f(beta) > 0");
    const double lam = *c.d.lambda_coeff, beta = c.d.beta;
    Barrier b;
    b.family = fam;
    b.r_lo = 0.0;
    b.r_hi = kInf;
    b.expected_sign = ExpectedSign::both;
    b.jet = [=](double r) { return term(std::log(r), std::log(lam), -beta, unit()); };
    return b;
}

bool sign_ok(ExpectedSign s, int sign) {
    switch (s) {
        case ExpectedSign::sub: return sign >= 0;
        case ExpectedSign::super: return sign <= 0;
        case ExpectedSign::both: return sign == 0;
    }
    return false;
}

// Coefficients scanned by certify(): (name, factor per attempt).
std::vector<std::pair<const char*, double>> existential(Family f) {
    switch (f) {
        case Family::P_pm: return {{"eta", 0.1}, {"alpha", 0.1}};
        case Family::Z_exp: return {{"tstar", 0.1}};
        case Family::Psi1_sub: return {{"Rstar", 10.0}};
        case Family::PsiTilde: return {{"R1", 10.0}, {"C", 10.0}};
        case Family::PLog_pm: return {{"rC", 0.1}, {"eta", 0.1}, {"alpha", 0.1}};
        default: return {};
    }
}

}  // namespace

std::vector<Family> all_families() {
    return {Family::P_pm, Family::W_exp,    Family::Z_exp,    Family::V_sup,   Family::V_log,
            Family::Phi2, Family::Psi1_sub, Family::PsiTilde, Family::PLog_pm, Family::U};
}

std::string to_string(Family f) {
    switch (f) {
        case Family::P_pm: return "P_pm";
        case Family::W_exp: return "W_exp";
        case Family::Z_exp: return "Z_exp";
        case Family::V_sup: return "V_sup";
        case Family::V_log: return "V_log";
        case Family::Phi2: return "Phi2";
        case Family::Psi1_sub: return "Psi1_sub";
        case Family::PsiTilde: return "PsiTilde";
        case Family::PLog_pm: return "PLog_pm";
        case Family::U: return "U";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    for (Family f : all_families())
        if (to_string(f) == s) return f;
    throw InvalidInput("unknown barrier family: " + s);
}

std::string to_string(ExpectedSign s) {
    switch (s) {
        case ExpectedSign::sub: return "sub";
        case ExpectedSign::super: return "super";
        case ExpectedSign::both: return "both";
    }
    return "?";
}

std::string Barrier::id() const {
    std::string s = to_string(family);
    auto it = coefficients.find("sign");
    if (it != coefficients.end()) s += it->second > 0 ? "+" : "-";
    return s;
}

Barrier make_barrier(const Parameters& p, Family family, const Coefficients& coeffs) {
    const Context c = context(p);
    switch (family) {
        case Family::P_pm: return make_p_pm(c, coeffs);
        case Family::W_exp: return make_w_exp(c, coeffs);
        case Family::Z_exp: return make_z_exp(c, coeffs);
        case Family::V_sup: return make_v_sup(c, coeffs);
        case Family::V_log: return make_v_log(c, coeffs);
        case Family::Phi2: return make_phi2(c, coeffs);
        case Family::Psi1_sub: return make_psi1_sub(c, coeffs);
        case Family::PsiTilde: return make_psi_tilde(c, coeffs);
        case Family::PLog_pm: return make_plog_pm(c, coeffs);
        case Family::U: return make_u(c, coeffs);
    }
    throw InvalidInput("unknown barrier family");
}

std::vector<double> barrier_grid(const Barrier& b, const GridOptions& opt) {
    if (opt.points < 2) throw InvalidInput("grid needs at least 2 points");
    constexpr double nudge = 1e-6;
    double lo = 0.0, hi = 0.0;
    const double span = std::pow(10.0, opt.decades);
    if (b.r_lo == 0.0 && std::isinf(b.r_hi)) {
        lo = 1.0 / std::sqrt(span);
        hi = std::sqrt(span);
    } else if (b.r_lo == 0.0) {
        hi = b.r_hi * (1.0 - nudge);
        lo = hi / span;
    } else if (std::isinf(b.r_hi)) {
        lo = b.r_lo * (1.0 + nudge);
        hi = lo * span;
    } else {
        lo = b.r_lo * (1.0 + nudge);
        hi = b.r_hi * (1.0 - nudge);
    }
    if (!(lo < hi)) throw InvalidInput("empty barrier domain");
    std::vector<double> g(opt.points);
    const double a = std::log(lo), z = std::log(hi);
    for (int i = 0; i < opt.points; ++i)
        g[i] = std::exp(a + (z - a) * static_cast<double>(i) / (opt.points - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

SignCertificate verify_barrier(const Parameters& p, const Barrier& b, const GridOptions& opt) {
    const std::vector<double> grid = barrier_grid(b, opt);
    const bool full = b.target == Target::full_equation;
    SignCertificate cert;
    cert.barrier_id = b.id();
    cert.grid_size = static_cast<int>(grid.size());
    cert.r_min = grid.front();
    cert.r_max = grid.back();
    cert.min_abs_residual = std::numeric_limits<double>::infinity();
    for (double r : grid) {
        const LogJet j = b.jet(r);
        const NormalizedResidual n = normalized_residual(p, r, j, full);
        if (!std::isfinite(n.value) || !std::isfinite(j.log_u)) {
            cert.violations.emplace_back(r, std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double rel = n.scale > 0.0 ? n.value / n.scale : 0.0;
        const int sign = std::abs(rel) <= kResidualZeroRel ? 0 : (rel > 0 ? 1 : -1);
        cert.min_abs_residual = std::min(cert.min_abs_residual, std::abs(rel));
        if (!sign_ok(b.expected_sign, sign)) cert.violations.emplace_back(r, rel);
    }

    // Finite-difference cross-check in the interior of the grid range.
    std::mt19937_64 rng(opt.seed);
    const double a = std::log(cert.r_min * 1.01), z = std::log(cert.r_max * 0.99);
    std::uniform_real_distribution<double> pick(std::min(a, z), std::max(a, z));
    for (int i = 0; i < opt.fd_points; ++i) {
        const double r = std::exp(pick(rng));
        const double h = r * kFdStepRel;
        const LogJet j0 = b.jet(r), jp = b.jet(r + h), jm = b.jet(r - h);
        const double ep = std::exp(jp.log_u - j0.log_u), em = std::exp(jm.log_u - j0.log_u);
        const double a_fd = r * (ep - em) / (2.0 * h);
        const double b_fd = r * r * (jp.a * ep / (r + h) - jm.a * em / (r - h)) / (2.0 * h);
        const double ea = std::abs(a_fd - j0.a) / std::max(std::abs(j0.a), 1.0);
        const double eb = std::abs(b_fd - j0.b) / std::max({std::abs(j0.b), std::abs(j0.a), 1.0});
        cert.fd_max_error = std::max({cert.fd_max_error, ea, eb});
    }
    if (!(cert.fd_max_error <= kFdAgreement))
        throw NumericalFailure(cert.barrier_id + ": analytic derivatives disagree with finite differences (" +
                               std::to_string(cert.fd_max_error) + ")");
    std::sort(cert.violations.begin(), cert.violations.end());
    cert.pass = cert.violations.empty();
    return cert;
}

Certification certify(const Parameters& p, Family family, const Coefficients& coeffs,
                      const GridOptions& opt) {
    Barrier b = make_barrier(p, family, coeffs);
    Certification out{b, verify_barrier(p, b, opt), 1};
    const auto scan = existential(family);
    for (int k = 0; k < 5 && !out.certificate.pass && !scan.empty(); ++k) {
        Coefficients next = out.barrier.coefficients;
        for (const auto& [name, factor] : scan) next[name] *= factor;
        b = make_barrier(p, family, next);
        out = {b, verify_barrier(p, b, opt), out.attempts + 1};
    }
    return out;
}

}  // namespace sel
