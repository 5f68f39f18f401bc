// Acceptance criteria 1-9. One line per criterion; every tolerance is pinned here.
//
// Exit status: 0 when every criterion is green or red only for the analysed reason below,
// 1 otherwise. --strict makes any red criterion fatal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "barrier_cases.hpp"
#include "sel/barriers.hpp"
#include "sel/errors.hpp"
#include "sel/operator.hpp"
#include "sel/profiles.hpp"
#include "sel/radial_solver.hpp"
#include "sel/taxonomy.hpp"

using namespace sel;

namespace {

constexpr double kRootTol1 = 1e-12;
constexpr double kRootTol2 = 1e-9;
constexpr double kExactResidualTol = 1e-12;
constexpr double kExponentTol6 = 0.02;
constexpr double kOrderingSlack = 1e-6;
constexpr double kZ2Tol = 0.25;
constexpr double kZ2Radius = 1e-10;
constexpr int kBarrierGrid = 10000;

// Criterion 5 is red by analysis, not by tuning: with (q=3, tau=0.5, lambda=12, rho=6.5) and
// beta = varpi2 = -1 the V_sup residual is +1.40 at r = 0.9 for eps = M = R = 1, so the
// super-solution inequality fails for coefficients inside the family's hypotheses. Absorbing
// lambda eps |varpi1|^{1-tau} r^{-beta} into the lambda |beta|^{1-tau} part of f(beta) is not
// allowed since |varpi1| > |beta|; it would need beta(beta+2rho) + lambda |varpi1|^{1-tau} <= 0,
// which is false here. Every other catalog case certifies.
bool known_counterexample(const testing::BarrierCase& c) {
    return c.family == Family::V_sup && c.label == "N2>" && c.p.lambda == 12.0;
}

struct Outcome {
    bool pass = false;
    std::string detail;
    bool explained = false;  // red only for the analysed reason
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
};

Parameters make(double q, double tau, double lambda, double rho, double theta) {
    Parameters p;
    p.q = q;
    p.tau = tau;
    p.lambda = lambda;
    p.rho = rho;
    p.theta = theta;
    return p;
}

// f written out again so the checks do not lean on eval_f.
double f_indep(double lambda, double tau, double rho, double t) {
    return t * t + 2.0 * rho * t + lambda * std::pow(std::abs(t), 1.0 - tau);
}

std::string num(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::vector<std::pair<double, double>> window(const RadialSolution& s, std::pair<double, double> w) {
    std::vector<std::pair<double, double>> out;
    for (const auto& x : s.samples)
        if (x.r >= w.first && x.r <= w.second) out.emplace_back(x.r, x.u);
    return out;
}

Outcome closed_form_roots() {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    double worst = 0.0;
    int n = 0;
    while (n < 100) {
        const double lambda = U(rng), rho = U(rng);
        if (!(lambda < 2.0 * rho)) continue;
        ++n;
        const Roots r = find_negative_roots(make(2.0, 0.0, lambda, rho, -4.0));
        if (!r.varpi1 || r.varpi2) return {false, "wrong root count at lambda=" + num(lambda) + " rho=" + num(rho)};
        worst = std::max(worst, std::abs(*r.varpi1 - (lambda - 2.0 * rho)));
    }
    return {worst <= kRootTol1, "100 draws, max |varpi1 - (lambda - 2 rho)| = " + num(worst) + " (tol 1e-12)"};
}

Outcome double_root() {
    std::mt19937 rng(202);
    std::uniform_real_distribution<double> L(0.05, 10.0), T(0.02, 0.98);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        Parameters p = make(2.0, T(rng), L(rng), 0.0, -4.0);
        p.rho = (p.tau + 1.0) / (2.0 * p.tau) * std::pow(p.lambda * p.tau, 1.0 / (p.tau + 1.0));
        const double target = -std::pow(p.lambda * p.tau, 1.0 / (p.tau + 1.0));
        const Roots r = find_negative_roots(p);
        if (!r.varpi1) return {false, "no root at draw " + std::to_string(i)};
        worst = std::max(worst, std::abs(*r.varpi1 - target));
        if (r.varpi2) worst = std::max(worst, std::abs(*r.varpi2 - target));
    }
    return {worst <= kRootTol2, "50 draws at rho = Upsilon, max |varpi - target| = " + num(worst) + " (tol 1e-9)"};
}

Outcome existence_sharpness() {
    const double q = 3.0, tau = 0.5, lambda = 1.0;
    int agree = 0, exists = 0, flips = 0;
    for (int i = 0; i < 50; ++i) {
        bool prev = false;
        for (int j = 0; j < 50; ++j) {
            const double rho = -2.0 + 6.0 * i / 49.0;
            const double theta = -8.0 + 12.0 * j / 49.0;
            const Parameters p = make(q, tau, lambda, rho, theta);
            const double beta = (theta + 2.0) / (q - 1.0);
            const bool expect = f_indep(lambda, tau, rho, beta) > 0.0;
            const bool got = existence(p).exists;
            agree += got == expect;
            exists += got;
            if (j > 0 && got != prev) ++flips;
            prev = got;
        }
    }
    return {agree == 2500, std::to_string(agree) + "/2500 cells agree with sign f(beta); " + std::to_string(exists) +
                               " exist, " + std::to_string(flips) + " flips along theta"};
}

Outcome exact_solution() {
    std::mt19937 rng(404);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    double worst = 0.0;
    int sets = 0;
    const double t0 = std::log(1e-8), t1 = std::log(1e8);
    while (sets < 20) {
        const Parameters p = make(1.2 + 3 * U01(rng), 0.95 * U01(rng), 8 * U01(rng) - 3, 8 * U01(rng) - 4,
                                  -2.1 - 8 * U01(rng));
        const double beta = (p.theta + 2.0) / (p.q - 1.0);
        const double fb = f_indep(p.lambda, p.tau, p.rho, beta);
        if (!(fb > 0.0)) continue;
        ++sets;
        const double Lambda = std::pow(fb, 1.0 / (p.q - 1.0));
        const RadialSolution s = construct_exact_U(p, t0, t1, (t1 - t0) / 999.0);
        if (s.samples.size() != 1000) return {false, "expected 1000 samples, got " + std::to_string(s.samples.size())};
        for (const auto& x : s.samples) {
            const double a = x.r * x.du / x.u;
            const LogJet j{std::log(x.u), a, a * (a - 1.0)};
            const NormalizedResidual nr = normalized_residual(p, x.r, j);
            worst = std::max(worst, std::abs(nr.value) / nr.scale);
            worst = std::max(worst, std::abs(x.u / (Lambda * std::pow(x.r, -beta)) - 1.0));
        }
    }
    return {worst <= kExactResidualTol, "20 sets x 1000 radii over 16 decades, max relative residual " + num(worst) +
                                            " (tol 1e-12)"};
}

Outcome barrier_certification() {
    const auto cases = testing::barrier_cases();
    GridOptions opt;
    opt.points = kBarrierGrid;
    int passed = 0;
    bool only_known = true;
    std::vector<std::string> red;
    for (const auto& c : cases) {
        bool ok = false;
        try {
            ok = certify(c.p, c.family, c.coeffs, opt).certificate.pass;
        } catch (const std::exception& e) {
            red.push_back(to_string(c.family) + "@" + c.label + " threw: " + e.what());
            only_known = false;
            continue;
        }
        passed += ok;
        if (!ok && !known_counterexample(c)) only_known = false;
        if (!ok) red.push_back(to_string(c.family) + "@" + c.label + " lambda=" + num(c.p.lambda) +
                               " beta=" + num(beta_of(c.p), 6));
    }
    std::string detail = std::to_string(passed) + "/" + std::to_string(cases.size()) + " certificates pass on " +
                         std::to_string(kBarrierGrid) + "-point grids";
    for (const auto& r : red) detail += "; red: " + r;
    return {red.empty(), detail, !red.empty() && only_known};
}

// Fixed N2 instance with beta in (varpi2, 0): varpi1 = -9, varpi2 = -1, beta = -1/2.
const Parameters kN2 = make(3.0, 0.5, 12.0, 6.5, -3.0);

struct Built {
    RadialSolution inf_c, b, b_inf_c, U;
};

const Built& families() {
    static const Built b = [] {
        Built out;
        ShootingSpec s;
        s.target = 1.0;
        s.family = ShootFamily::u_inf_c;
        out.inf_c = shoot(kN2, s);
        s.family = ShootFamily::u_b;
        out.b = shoot(kN2, s);
        s.family = ShootFamily::u_b_inf_c;
        out.b_inf_c = shoot(kN2, s);
        out.U = construct_exact_U(kN2);
        return out;
    }();
    return b;
}

Outcome family_construction() {
    const Built& f = families();
    const double beta = -0.5, w2 = -1.0;
    const Roots r = find_negative_roots(kN2);
    if (!r.varpi2 || std::abs(*r.varpi1 + 9.0) > 1e-9 || std::abs(*r.varpi2 - w2) > 1e-9)
        return {false, "instance roots are not (-9, -1)"};

    struct Row {
        const char* name;
        const RadialSolution* s;
        double zero;
        double inf;
    };
    // infinity: constant, U (r^{-beta}), constant
    const Row rows[] = {{"u_inf_c", &f.inf_c, -beta, 0.0}, {"u_b", &f.b, -w2, -beta}, {"u_b_inf_c", &f.b_inf_c, -w2, 0.0}};
    bool ok = true;
    std::string detail;
    for (const auto& row : rows) {
        const auto z = fit_profile(window(*row.s, kZeroWindow), End::zero, FitModel::power);
        const auto i = fit_profile(window(*row.s, kInfinityWindow), End::infinity, FitModel::power);
        const double dz = std::abs(z.exponent_hat - row.zero), di = std::abs(i.exponent_hat - row.inf);
        ok = ok && dz <= kExponentTol6 && di <= kExponentTol6 && row.s->status == IntegrationStatus::ok;
        detail += std::string(row.name) + " zero " + num(z.exponent_hat, 5) + " inf " + num(i.exponent_hat, 5) + "; ";
    }
    // u_b_inf_c below both, u_inf_c below U, exactly one crossing of u_inf_c and u_b
    int crossings = 0, order_bad = 0;
    double prev = 0.0;
    for (std::size_t k = 0; k < f.inf_c.samples.size(); ++k) {
        const double x = f.inf_c.samples[k].r;
        const double a = f.inf_c.samples[k].u, b = f.b.value(x), bc = f.b_inf_c.value(x), u = f.U.value(x);
        if (bc > (1 + kOrderingSlack) * std::min(a, b) || a > (1 + kOrderingSlack) * u || b > (1 + kOrderingSlack) * u)
            ++order_bad;
        const double d = a - b;
        if (d != 0.0) {
            if (prev != 0.0 && (d > 0) != (prev > 0)) ++crossings;
            prev = d;
        }
    }
    ok = ok && order_bad == 0 && crossings == 1;
    detail += "ordering violations " + std::to_string(order_bad) + ", crossings " + std::to_string(crossings);
    return {ok, detail};
}

Outcome z2_rate() {
    Parameters p = make(3.0, 0.5, 1.0, 0.0, 0.0);
    const double sep = std::pow(p.lambda * p.tau, 1.0 / (p.tau + 1.0));
    p.rho = (p.tau + 1.0) / (2.0 * p.tau) * sep;
    const double w1 = -sep;
    p.theta = w1 * (p.q - 1.0) - 2.0;
    const double gamma = std::pow(2.0 * (p.q + p.tau) / ((p.q - 1.0) * (p.q - 1.0)), 1.0 / (p.q - 1.0));
    const double g_lib = zgamma(p).gamma;
    if (std::abs(g_lib / gamma - 1.0) > 1e-12) return {false, "zgamma disagrees with the closed form"};
    // generic datum: u(1) = 1, reached from the zero-end behaviour
    const RadialSolution s = shoot_from_zero(p, -w1, std::log(1e-40), 0.0, 1.0);
    const double r = kZ2Radius;
    const double ratio = std::pow(r, w1) * std::pow(std::abs(std::log(r)), 2.0 / (p.q - 1.0)) * s.value(r) / gamma;
    return {std::abs(ratio - 1.0) <= kZ2Tol && s.status == IntegrationStatus::ok,
            "ratio at r=1e-10 is " + num(ratio, 5) + " (tol |ratio-1| <= 0.25), residual " +
                num(max_relative_residual(s))};
}

Outcome kelvin_duality() {
    std::mt19937 rng(808);
    std::uniform_real_distribution<double> U(-8.0, 8.0);
    for (int i = 0; i < 10000; ++i) {
        const Parameters p = make(1.1 + std::abs(U(rng)), (U(rng) + 8.0) / 16.5, U(rng), U(rng), U(rng));
        const Parameters k = kelvin(kelvin(p));
        if (k.dim != p.dim || k.q != p.q || k.tau != p.tau || k.lambda != p.lambda || k.rho != p.rho ||
            k.theta != p.theta)
            return {false, "kelvin(kelvin(p)) != p at draw " + std::to_string(i)};
    }
    const RadialSolution img = kelvin_solution(families().inf_c);
    const GlobalClassification g = predict_global(kelvin(kN2));
    const FamilyProfiles* fam = nullptr;
    for (const auto& f : g.families)
        if (f.name == "u_c_0") fam = &f;
    if (!fam) return {false, "no u_c_0 row for the Kelvin image"};
    const auto z = fit_profile(window(img, kZeroWindow), End::zero, FitModel::power);
    const auto i = fit_profile(window(img, kInfinityWindow), End::infinity, FitModel::power);
    const MatchReport mz = match_profile(z, {fam->near_zero});
    const MatchReport mi = match_profile(i, {fam->near_infinity});
    return {mz.matched && mi.matched, "involution exact on 10^4 draws; image of u_inf_c: zero exponent " +
                                          num(z.exponent_hat, 5) + ", infinity exponent " + num(i.exponent_hat, 5) +
                                          " vs u_c_0 (" + num(fam->near_zero.exponent) + ", " +
                                          num(fam->near_infinity.exponent) + ")"};
}

Outcome apriori_bound() {
    const Built& f = families();
    int held = 0;
    for (const RadialSolution* s : {&f.inf_c, &f.b, &f.b_inf_c, &f.U}) held += apriori_bound_holds(*s);
    return {held == 4, std::to_string(held) + "/4 constructed solutions satisfy u <= C0 r^{-beta} on r <= 1 (C0 = " +
                           num(a_priori_c0(kN2), 6) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const std::vector<Criterion> criteria = {
        {1, "closed-form roots", 1.0, closed_form_roots},
        {2, "double-root threshold", 1.0, double_root},
        {3, "existence sharpness", 1.0, existence_sharpness},
        {4, "exact solution", 1.0, exact_solution},
        {5, "barrier certification", 30.0, barrier_certification},
        {6, "family construction + profile match", 60.0, family_construction},
        {7, "log-corrected rate (Z2)", 30.0, z2_rate},
        {8, "Kelvin duality", 10.0, kelvin_duality},
        {9, "a-priori bound", 60.0, apriori_bound},
    };
    int red = 0, unexpected = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.pass && in_time;
        std::printf("criterion %d: %s  %s | %s | %.2fs (limit %.0fs)%s\n", c.id, pass ? "PASS" : "FAIL",
                    c.name.c_str(), o.detail.c_str(), secs, c.limit_s, in_time ? "" : " TOO SLOW");
        if (!pass) {
            ++red;
            if (!(o.explained && in_time)) ++unexpected;
            else std::printf("  red by analysis: see the note on known_counterexample in acceptance.cpp\n");
        }
    }
    std::printf("%d/%zu criteria green; %d red (%d not explained)\n", static_cast<int>(criteria.size()) - red,
                criteria.size(), red, unexpected);
    if (strict) return red == 0 ? 0 : 1;
    return unexpected == 0 ? 0 : 1;
}
