#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "barrier_cases.hpp"
#include "sel/barriers.hpp"
#include "sel/errors.hpp"
#include "sel/operator.hpp"
#include "sel/profiles.hpp"

using namespace sel;
using sel::testing::Base;
using sel::testing::with_beta;

namespace {

Parameters make(double q, double tau, double lambda, double rho, double theta) {
    Parameters p;
    p.q = q;
    p.tau = tau;
    p.lambda = lambda;
    p.rho = rho;
    p.theta = theta;
    return p;
}

// Operator written out directly from the radial equation.
double direct_operator(const Parameters& p, double r, double u, double du, double d2u) {
    double g = 0.0;
    if (du != 0.0) g = p.lambda * std::pow(u, p.tau) * std::pow(std::abs(du), 1.0 - p.tau) /
                       std::pow(r, 1.0 + p.tau);
    return d2u + (1.0 - 2.0 * p.rho) * du / r + g;
}

bool is_vsup_counterexample(const sel::testing::BarrierCase& c) {
    return c.family == Family::V_sup && c.p.lambda == 12.0 && c.label == "N2>";
}

}  // namespace

TEST_CASE("eval_operator examples") {
    const Parameters p = make(3, 0.5, 1, 2, -3);
    CHECK(eval_operator(p, {2.0, 0.0, 0.0, 0.7}) == 0.0);

    // r^{-varpi1} is annihilated when f(varpi1) = 0
    const double w1 = *find_negative_roots(p).varpi1;
    for (double r : {1e-3, 0.5, 3.0, 1e4}) {
        const double u = std::pow(r, -w1);
        const RadialTriple t{u, -w1 * u / r, -w1 * (-w1 - 1.0) * u / (r * r), r};
        CHECK(std::abs(eval_operator(p, t)) <= 1e-12 * residual_scale(p, t));
    }

    // U gives Lambda f(beta) r^{-beta-2}
    const Parameters pu = make(2, 0.5, 1, 0.5, -5);  // beta = -3
    const DerivedQuantities d = derive(pu);
    REQUIRE(d.lambda_coeff.has_value());
    const double L = *d.lambda_coeff, b = d.beta;
    for (double r : {0.01, 1.0, 50.0}) {
        const double u = L * std::pow(r, -b);
        const RadialTriple t{u, -b * u / r, -b * (-b - 1.0) * u / (r * r), r};
        CHECK(eval_operator(pu, t) == doctest::Approx(L * d.f_at_beta * std::pow(r, -b - 2)).epsilon(1e-12));
    }
}

TEST_CASE("residual examples: constant is super, c r^{-beta} with c <= Lambda is sub") {
    const Parameters p = make(2, 0.5, 1, 0.5, -5);
    const double L = *derive(p).lambda_coeff, b = derive(p).beta;
    for (double r : {1e-4, 0.3, 2.0, 1e3}) {
        CHECK(residual(p, {1.5, 0.0, 0.0, r}) == doctest::Approx(-std::pow(r, p.theta) * std::pow(1.5, p.q)));
        CHECK(residual_sign(p, {1.5, 0.0, 0.0, r}) == -1);
        for (double c : {0.1 * L, 0.5 * L, L}) {
            const double u = c * std::pow(r, -b);
            const RadialTriple t{u, -b * u / r, -b * (-b - 1.0) * u / (r * r), r};
            CHECK(residual_sign(p, t) >= 0);
        }
    }
}

TEST_CASE("eval_operator matches the direct formula on random triples") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-3, 3), pos(0.01, 5), tau(0, 0.99);
    for (int i = 0; i < 2000; ++i) {
        const Parameters p = make(2, tau(rng), uni(rng), uni(rng), -4);
        const double r = pos(rng), u = pos(rng), du = uni(rng), d2u = uni(rng);
        const double got = eval_operator(p, {u, du, d2u, r});
        CHECK(got == doctest::Approx(direct_operator(p, r, u, du, d2u)).epsilon(1e-12));
    }
}

TEST_CASE("tau = 0 agrees with the tau -> 0 limit") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(-3, 3), pos(0.01, 5);
    for (int i = 0; i < 500; ++i) {
        const double lam = uni(rng), rho = uni(rng), r = pos(rng), u = pos(rng), d2u = uni(rng);
        double du = uni(rng);
        if (std::abs(du) < 1e-3) du = 1.0;
        const double at0 = eval_operator(make(2, 0.0, lam, rho, -4), {u, du, d2u, r});
        const double near0 = eval_operator(make(2, 1e-10, lam, rho, -4), {u, du, d2u, r});
        CHECK(at0 == doctest::Approx(near0).epsilon(1e-8));
        CHECK(at0 == doctest::Approx(d2u + (1 - 2 * rho) * du / r + lam * std::abs(du) / r).epsilon(1e-13));
    }
}

TEST_CASE("make_barrier examples") {
    SUBCASE("P+ with C = 2 Lambda is a super-barrier on (0,1)") {
        const Parameters p = make(2, 0.5, 1, 0.5, -5);
        const double L = *derive(p).lambda_coeff;
        const Barrier b = make_barrier(p, Family::P_pm, {{"sign", 1}, {"C", 2 * L}});
        CHECK(b.expected_sign == ExpectedSign::super);
        CHECK(b.r_lo == 0.0);
        CHECK(b.r_hi == 1.0);
        CHECK(b.coefficients.at("eta") == doctest::Approx(std::abs(derive(p).beta) / 6));
        CHECK(verify_barrier(p, b).pass);
    }
    SUBCASE("W_exp with c = Lambda/2 in N0a is a sub-barrier") {
        const Parameters p = make(2, 0.0, 1, 0.0, -4);
        REQUIRE(classify(p).tag == Case::N0a);
        const Barrier b = make_barrier(p, Family::W_exp, {{"c", *derive(p).lambda_coeff / 2}});
        CHECK(b.expected_sign == ExpectedSign::sub);
        CHECK(verify_barrier(p, b).pass);
    }
    SUBCASE("Phi2 at rho = Upsilon: r_* satisfies the log condition") {
        Parameters p = make(3, 0.5, 1, 0, -4);
        p.rho = *upsilon_of(p);
        const Barrier b = make_barrier(p, Family::Phi2);
        const double w2 = *find_negative_roots(p).varpi2;
        CHECK(b.expected_sign == ExpectedSign::super);
        CHECK(b.target == Target::operator_only);
        CHECK(std::log(1 / b.r_hi) > 2 / (1.5 * std::abs(w2)));
        CHECK(verify_barrier(p, b).pass);
        CHECK_THROWS_AS(make_barrier(p, Family::Phi2, {{"rstar", 0.9}}), HypothesisViolation);
    }
}

TEST_CASE("hypothesis violations name the failed constraint") {
    const Base b{3, 0.5, 1, 2};
    const double w1 = *find_negative_roots(with_beta(b, -1)).varpi1;
    const Parameters p = with_beta(b, w1 / 2);
    const double cap = (p.q - 1) * (derive(p).beta - w1) / 2;
    try {
        make_barrier(p, Family::Z_exp, {{"eps", cap * 1.01}});
        FAIL("expected HypothesisViolation");
    } catch (const HypothesisViolation& e) {
        CHECK(e.family() == "Z_exp");
        CHECK(e.constraint().find("(q-1)(beta - varpi1)/2") != std::string::npos);
    }
    CHECK_NOTHROW(make_barrier(p, Family::Z_exp, {{"eps", cap * 0.5}}));

    const Parameters pn = make(2, 0.5, 1, 0.5, -5);
    const double L = *derive(pn).lambda_coeff, beta = derive(pn).beta;
    CHECK_THROWS_AS(make_barrier(pn, Family::P_pm, {{"sign", 1}, {"C", 0.5 * L}}), HypothesisViolation);
    CHECK_THROWS_AS(make_barrier(pn, Family::P_pm, {{"sign", -1}, {"C", 2 * L}}), HypothesisViolation);
    CHECK_THROWS_AS(make_barrier(pn, Family::P_pm, {{"eta", std::abs(beta) / 2}}), HypothesisViolation);
    CHECK_THROWS_AS(make_barrier(pn, Family::P_pm, {{"bogus", 1}}), InvalidInput);
    CHECK_THROWS_AS(make_barrier(pn, Family::V_log), HypothesisViolation);
    CHECK_THROWS_AS(make_barrier(pn, Family::PsiTilde), HypothesisViolation);

    // f(beta) <= 0: no P barrier
    CHECK_THROWS_AS(make_barrier(make(3, 0.5, 1, 2, -4), Family::P_pm), HypothesisViolation);
}

TEST_CASE("U wrapped as a barrier passes with residual identically zero") {
    for (const auto& c : sel::testing::barrier_cases()) {
        if (c.family != Family::U) continue;
        const Barrier b = make_barrier(c.p, Family::U);
        CHECK(b.expected_sign == ExpectedSign::both);
        const SignCertificate cert = verify_barrier(c.p, b);
        CHECK_MESSAGE(cert.pass, c.label << " " << cert.barrier_id);
        CHECK(cert.grid_size == 10000);
    }
}

TEST_CASE("analytic derivatives agree with finite differences for every family") {
    std::mt19937 rng(3);
    for (const auto& c : sel::testing::barrier_cases()) {
        const Barrier b = make_barrier(c.p, c.family, c.coeffs);
        GridOptions g;
        g.points = 16;
        g.fd_points = 64;
        g.seed = rng();
        const SignCertificate cert = verify_barrier(c.p, b, g);
        CHECK_MESSAGE(cert.fd_max_error <= kFdAgreement, cert.barrier_id);
    }
}

TEST_CASE("catalog certification on 1e4-point grids") {
    int certified = 0, total = 0;
    for (const auto& c : sel::testing::barrier_cases()) {
        const Certification res = certify(c.p, c.family, c.coeffs);
        ++total;
        if (is_vsup_counterexample(c)) {
            // beta = varpi2 with lambda = 12: the V_sup inequality fails near r ~ 0.7
            CHECK_FALSE(res.certificate.pass);
            continue;
        }
        CHECK_MESSAGE(res.certificate.pass, c.label << " " << res.certificate.barrier_id << " first violation r="
                                                    << (res.certificate.violations.empty()
                                                            ? 0.0
                                                            : res.certificate.violations.front().first));
        certified += res.certificate.pass;
    }
    CHECK(total >= 200);
    CHECK(certified == total - 1);
}

TEST_CASE("V_sup counterexample at beta = varpi2 is a genuine sign violation") {
    // q=3, tau=1/2, lambda=12, rho=13/2, beta=-1: varpi1=-9, varpi2=-1, eps=M=R=1,
    // so u = r + r^9. Evaluated directly at r = 0.9 the residual is about +1.40.
    const Parameters p = make(3, 0.5, 12, 6.5, -4);
    REQUIRE(derive(p).beta == doctest::Approx(-1.0));
    const Barrier b = make_barrier(p, Family::V_sup, {{"eps", 1}, {"M", 1}, {"R", 1}});
    const double r = 0.9;
    const double u = r + std::pow(r, 9), du = 1 + 9 * std::pow(r, 8), d2u = 72 * std::pow(r, 7);
    const double direct = direct_operator(p, r, u, du, d2u) - std::pow(r, p.theta) * u * u * u;
    CHECK(direct == doctest::Approx(1.40).epsilon(0.01));
    CHECK(residual(p, b.eval(r)) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("scaling covariance of the residual") {
    const std::vector<double> sigmas{0.5, 2.0, 10.0};
    std::mt19937 rng(5);
    for (const auto& c : sel::testing::barrier_cases()) {
        if (c.family == Family::PsiTilde || c.family == Family::Phi2) continue;  // operator-only targets
        const Barrier b = make_barrier(c.p, c.family, c.coeffs);
        const double beta = derive(c.p).beta;
        auto grid = barrier_grid(b, {64, 8.0, 0, 0});
        for (double s : sigmas) {
            for (std::size_t i = 0; i < grid.size(); i += 8) {
                const double r = grid[i];
                const double rs = s * r;
                if (!(rs > b.r_lo && rs < b.r_hi)) continue;
                const RadialTriple at = b.eval(rs);
                const double k = std::pow(s, beta);
                const RadialTriple scaled{k * at.u, k * s * at.du, k * s * s * at.d2u, r};
                const double lhs = residual(c.p, scaled);
                const double rhs = std::pow(s, beta + 2) * residual(c.p, at);
                const double tol = 1e-10 * std::pow(s, beta + 2) * residual_scale(c.p, at);
                CHECK_MESSAGE(std::abs(lhs - rhs) <= tol, b.id() << " sigma=" << s << " r=" << r);
            }
        }
    }
}

TEST_CASE("barrier grids stay inside the domain") {
    for (const auto& c : sel::testing::barrier_cases()) {
        const Barrier b = make_barrier(c.p, c.family, c.coeffs);
        const auto g = barrier_grid(b, {});
        REQUIRE(g.size() == 10000);
        CHECK(g.front() > b.r_lo);
        CHECK(g.back() < b.r_hi);
        CHECK(std::is_sorted(g.begin(), g.end()));
    }
}

TEST_CASE("family names round-trip") {
    for (Family f : all_families()) CHECK(family_from_string(to_string(f)) == f);
    CHECK_THROWS_AS(family_from_string("nope"), InvalidInput);
}
