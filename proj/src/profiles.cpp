#include "sel/profiles.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "sel/errors.hpp"

namespace sel {

namespace {

ProfileSpec make(End end, ProfileLabel label, double e, double lp, CoefficientKind k,
                 double c = 0.0) {
    ProfileSpec s;
    s.end = end;
    s.label = label;
    s.exponent = e;
    s.log_power = lp;
    s.kind = k;
    s.coefficient = c;
    return s;
}

ProfileSpec u_profile(const Parameters& p, End end) {
    const DerivedQuantities d = derive(p);
    return make(end, ProfileLabel::U, -d.beta, 0.0, CoefficientKind::known,
                d.lambda_coeff.value_or(0.0));
}

// With lambda = 0 the gradient term vanishes and tau plays no role.
bool effectively_tau_zero(const Parameters& p) { return p.tau == 0.0 || p.lambda == 0.0; }

ProfileSpec phi2_profile(const Parameters& p, bool at_upsilon, double varpi2) {
    const double lp = at_upsilon ? 2.0 / (1.0 + p.tau) : 0.0;
    return make(End::zero, ProfileLabel::PhiW2, -varpi2, lp, CoefficientKind::free_positive);
}

std::string mirrored_name(const std::string& n) {
    if (n == "u_inf_c") return "u_c_0";
    if (n == "u_b") return "u_b_inf";
    if (n == "u_b_inf_c") return "u_c_0_b";
    return n;
}

}  // namespace

bool near_equal(double a, double b) { return std::abs(a - b) <= kBoundaryRelTol * (1.0 + std::abs(b)); }

std::vector<ProfileSpec> predict_near_zero(const Parameters& p) {
    validate(p);
    if (!(p.theta < -2.0)) throw InvalidInput("near-zero prediction needs theta < -2; use the Kelvin image");
    const CaseTag c = classify(p);
    const Roots roots = find_negative_roots(p);
    const double beta = beta_of(p);
    const ProfileSpec u = u_profile(p, End::zero);

    if (is_n0(c.tag) && !roots.varpi1) return {u};

    const double w1 = *roots.varpi1;
    const ProfileSpec a_w1 =
        make(End::zero, ProfileLabel::PowerW1, -w1, 0.0, CoefficientKind::free_positive);
    if (near_equal(beta, w1)) {
        const ZGammaConstants z = zgamma(p, false);
        const ProfileLabel lab = c.rho_equals_upsilon ? ProfileLabel::Z2Rate : ProfileLabel::Z1Rate;
        return {make(End::zero, lab, -w1, -z.p, CoefficientKind::known, z.gamma)};
    }
    if (beta < w1) return {u};
    if (is_n1(c.tag)) return {a_w1};

    const double w2 = *roots.varpi2;
    if (!c.rho_equals_upsilon && (beta < w2 || near_equal(beta, w2))) return {a_w1};
    return {a_w1, phi2_profile(p, c.rho_equals_upsilon, w2), u};
}

GlobalClassification predict_global(const Parameters& p) {
    validate(p);
    const DerivedQuantities d = derive(p);
    if (!d.lambda_coeff)
        throw NoSolutions("no positive solutions: f(beta) = " + std::to_string(d.f_at_beta) + " <= 0");

    if (p.theta > -2.0) {
        Parameters k = p;
        k.rho = -p.rho;
        k.theta = -p.theta - 4.0;
        GlobalClassification g = predict_global(k);
        for (auto& f : g.families) {
            f.name = mirrored_name(f.name);
            const ProfileSpec z = mirror(f.near_infinity);
            f.near_infinity = mirror(f.near_zero);
            f.near_zero = z;
        }
        g.mirrored = true;
        return g;
    }

    const CaseTag c = classify(p);
    const Roots roots = find_negative_roots(p);
    const double beta = d.beta;
    const ProfileSpec u0 = u_profile(p, End::zero);
    const ProfileSpec ui = u_profile(p, End::infinity);
    const ProfileSpec constant =
        make(End::infinity, ProfileLabel::Constant, 0.0, 0.0, CoefficientKind::free_positive);

    GlobalClassification g;
    g.families.push_back({"U", u0, ui});

    if (!roots.varpi1) {
        if (effectively_tau_zero(p) && p.lambda == 2.0 * p.rho) {
            g.families.push_back({"u_inf_c", u0,
                                  make(End::infinity, ProfileLabel::Log, 0.0, 1.0,
                                       CoefficientKind::free_positive)});
        } else {
            g.families.push_back({"u_inf_c", u0, constant});
        }
        return g;
    }
    const double w1 = *roots.varpi1;
    if (beta < w1) {
        if (is_n1(c.tag)) {
            g.families.push_back({"u_inf_c", u0,
                                  make(End::infinity, ProfileLabel::PowerW1, -w1, 0.0,
                                       CoefficientKind::free_positive)});
        } else {
            const double lp = c.rho_equals_upsilon ? 2.0 / (1.0 + p.tau) : 0.0;
            g.families.push_back({"u_inf_c", u0,
                                  make(End::infinity, ProfileLabel::PsiW1, -w1, lp,
                                       CoefficientKind::free_positive)});
        }
        return g;
    }
    // f(beta) > 0 with beta > varpi1 leaves only beta in (varpi2, 0) in N2.
    const double w2 = *roots.varpi2;
    const ProfileSpec phi = phi2_profile(p, c.rho_equals_upsilon, w2);
    g.families.push_back({"u_inf_c", u0, constant});
    g.families.push_back({"u_b", phi, ui});
    g.families.push_back({"u_b_inf_c", phi, constant});
    return g;
}

ZGammaConstants zgamma(const Parameters& p, bool check_beta) {
    const CaseTag c = classify(p);
    const Roots roots = find_negative_roots(p);
    if (!roots.varpi1) throw RegimeError("zgamma: no negative root (Case N0)");
    const double w1 = *roots.varpi1;
    if (check_beta && !near_equal(beta_of(p), w1))
        throw RegimeError("zgamma: requires beta = varpi1");
    ZGammaConstants z;
    if (c.tag == Case::N2 && c.rho_equals_upsilon) {
        z.p = 2.0 / (p.q - 1.0);
        z.gamma = std::pow(2.0 * (p.q + p.tau) / ((p.q - 1.0) * (p.q - 1.0)), 1.0 / (p.q - 1.0));
    } else {
        const double a = std::abs(w1);
        const double bracket = a * (1.0 - p.lambda * p.tau * std::pow(a, -p.tau - 1.0));
        z.p = 1.0 / (p.q - 1.0);
        z.gamma = std::pow(bracket / (p.q - 1.0), 1.0 / (p.q - 1.0));
    }
    return z;
}

double eval_profile(const ProfileSpec& spec, double r, std::optional<double> coefficient) {
    if (!(r > 0.0)) throw InvalidInput("eval_profile: r must be positive");
    if (spec.log_power != 0.0) {
        if (spec.end == End::zero && !(r < 1.0))
            throw InvalidInput("eval_profile: zero-end log profile needs r < 1");
        if (spec.end == End::infinity && !(r > 1.0))
            throw InvalidInput("eval_profile: infinity-end log profile needs r > 1");
    }
    double c = 1.0;
    if (spec.kind == CoefficientKind::known) {
        c = spec.coefficient;
    } else if (coefficient) {
        c = *coefficient;
    } else if (spec.kind == CoefficientKind::free_positive) {
        throw InvalidInput("eval_profile: free coefficient needs a value");
    }
    const double lr = std::log(r);
    double v = c * std::exp(spec.exponent * lr);
    if (spec.log_power != 0.0) v *= std::pow(std::abs(lr), spec.log_power);
    return v;
}

FittedAsymptotics fit_profile(const std::vector<std::pair<double, double>>& samples, End end,
                              FitModel model) {
    const std::size_t n = samples.size();
    if (n < 8) throw InvalidInput("fit_profile: need at least 8 samples");
    for (std::size_t i = 0; i < n; ++i) {
        const auto [r, u] = samples[i];
        if (!(r > 0.0) || !(u > 0.0)) throw InvalidInput("fit_profile: r and u must be positive");
        if (i > 0 && !(r > samples[i - 1].first))
            throw InvalidInput("fit_profile: radii must be strictly increasing");
        if (model == FitModel::power_log && std::log(r) == 0.0)
            throw InvalidInput("fit_profile: r = 1 inside a log window");
    }
    const int cols = model == FitModel::power ? 2 : 3;
    Eigen::MatrixXd a(n, cols);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lr = std::log(samples[i].first);
        a(i, 0) = lr;
        a(i, 1) = 1.0;
        if (cols == 3) a(i, 2) = std::log(std::abs(lr));
        y(i) = std::log(samples[i].second);
    }
    // Column scaling so the rank test is not dominated by magnitude.
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (int j = 0; j < cols; ++j) a.col(j) /= scale(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) throw NumericalFailure("fit_profile: degenerate design matrix (window too narrow)");
    Eigen::VectorXd x = qr.solve(y);
    for (int j = 0; j < cols; ++j) x(j) /= scale(j);
    for (int j = 0; j < cols; ++j) a.col(j) *= scale(j);

    FittedAsymptotics f;
    f.end = end;
    f.model = model;
    f.exponent_hat = x(0);
    f.coeff_hat = std::exp(x(1));
    f.log_power_hat = cols == 3 ? x(2) : 0.0;
    f.window = {samples.front().first, samples.back().first};
    f.rms_residual = std::sqrt((a * x - y).squaredNorm() / static_cast<double>(n));
    return f;
}

MatchReport match_profile(const FittedAsymptotics& fit, const std::vector<ProfileSpec>& specs,
                          const MatchTolerance& tol) {
    MatchReport best;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const ProfileSpec& s = specs[i];
        if (s.end != fit.end) throw InvalidInput("match_profile: fit and profile ends differ");
        const double de = std::abs(fit.exponent_hat - s.exponent);
        const double dlp = std::abs(fit.log_power_hat - s.log_power);
        const double etol = tol.exponent_abs ? *tol.exponent_abs : tol.exponent_rel * (1.0 + std::abs(s.exponent));
        if (de > etol || dlp > tol.log_power) continue;
        if (best.matched && (de > best.d_exponent || (de == best.d_exponent && dlp >= best.d_log_power)))
            continue;
        best.matched = true;
        best.index = static_cast<int>(i);
        best.label = s.label;
        best.d_exponent = de;
        best.d_log_power = dlp;
    }
    return best;
}

ProfileSpec mirror(const ProfileSpec& s) {
    ProfileSpec m = s;
    m.end = s.end == End::zero ? End::infinity : End::zero;
    m.exponent = s.exponent == 0.0 ? 0.0 : -s.exponent;
    return m;
}

std::string to_string(End e) { return e == End::zero ? "zero" : "infinity"; }

std::string to_string(ProfileLabel l) {
    switch (l) {
        case ProfileLabel::U: return "U";
        case ProfileLabel::PowerW1: return "PowerW1";
        case ProfileLabel::PhiW2: return "PhiW2";
        case ProfileLabel::PsiW1: return "PsiW1";
        case ProfileLabel::Constant: return "Constant";
        case ProfileLabel::Log: return "Log";
        case ProfileLabel::Z1Rate: return "Z1Rate";
        case ProfileLabel::Z2Rate: return "Z2Rate";
    }
    return "?";
}

std::string to_string(CoefficientKind k) {
    switch (k) {
        case CoefficientKind::known: return "known";
        case CoefficientKind::free_positive: return "free_positive";
        case CoefficientKind::none: return "none";
    }
    return "?";
}

std::string to_string(FitModel m) { return m == FitModel::power ? "power" : "power_log"; }

End end_from_string(const std::string& s) {
    if (s == "zero") return End::zero;
    if (s == "infinity") return End::infinity;
    throw InvalidInput("unknown end: " + s);
}

ProfileLabel label_from_string(const std::string& s) {
    for (auto l : {ProfileLabel::U, ProfileLabel::PowerW1, ProfileLabel::PhiW2, ProfileLabel::PsiW1,
                   ProfileLabel::Constant, ProfileLabel::Log, ProfileLabel::Z1Rate, ProfileLabel::Z2Rate})
        if (to_string(l) == s) return l;
    throw InvalidInput("unknown profile label: " + s);
}

FitModel fit_model_from_string(const std::string& s) {
    if (s == "power") return FitModel::power;
    if (s == "power_log") return FitModel::power_log;
    throw InvalidInput("unknown fit model: " + s);
}

}  // namespace sel
