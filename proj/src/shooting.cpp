// Shooting for the three non-trivial families when theta < -2.
//
// In y = w e^{beta t} the log-radius system is autonomous and U is the saddle
// (y, Y) = (Lambda, -beta). Each family is a single orbit up to T_sigma, which acts
// as a time shift, so an orbit is built once in normalized time and then shifted:
//   u_inf_c    unstable manifold of U, forward to the flat tail
//   u_b        stable manifold of U, backward to the r^{-varpi2} end
//   u_b_inf_c  orbit through the turning point (h Lambda, -beta), h picked so the
//              scale-invariant beta log b - (beta - varpi2) log c hits the target

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "log_ode.hpp"
#include "sel/radial_solver.hpp"

namespace sel {

namespace {

using detail::LogState;
using detail::Stop;
using detail::TraceOptions;
using detail::TraceResult;

constexpr double kSeedOffset = 1e-7;
constexpr double kZeroEndY = 1e-10;  // y / Lambda at which the zero end counts as reached
constexpr double kFarForward = 400.0;
constexpr double kFarBackward = -1e4;
constexpr double kTailReadout = 600.0;  // log u

struct Saddle {
    double beta = 0.0;
    double lambda_coeff = 0.0;
    double mu_plus = 0.0;
    double mu_minus = 0.0;
};

Saddle saddle_of(const Parameters& p) {
    const DerivedQuantities d = derive(p);
    Saddle s;
    s.beta = d.beta;
    s.lambda_coeff = *d.lambda_coeff;
    const double ab = std::abs(d.beta);
    const double A = 2.0 * d.beta + 2.0 * p.rho - p.lambda * (1.0 - p.tau) * std::pow(ab, -p.tau);
    const double B = (p.q - 1.0) * d.f_at_beta;
    const double disc = std::sqrt(A * A + 4.0 * B);
    s.mu_plus = 0.5 * (A + disc);
    s.mu_minus = 0.5 * (A - disc);
    return s;
}

// Point on the linearized manifold with eigenvalue mu, offset eps e^{mu t} below U.
LogState manifold_point(const Saddle& s, double mu, double t) {
    const double e = kSeedOffset * std::exp(mu * t);
    return {t, std::log(s.lambda_coeff) - e - s.beta * t, -s.beta - mu * e};
}

double log_y(const Saddle& s, const LogState& x) { return x.l + s.beta * x.t; }

// u ~ b r^s (1 + k b^{q-1} r^gamma) at the zero end, s = -varpi2.
struct ZeroEnd {
    double s = 0.0;
    double log_power = 0.0;
    double k = 0.0;
    double gamma = 0.0;

    double log_b(const Parameters& p, const LogState& x) const {
        if (log_power != 0.0) return x.l - s * x.t - log_power * std::log(std::abs(x.t));
        double lb = x.l - s * x.t;
        for (int i = 0; i < 4; ++i) lb = x.l - s * x.t - std::log1p(delta(p, lb, x.t));
        return lb;
    }
    double delta(const Parameters& p, double log_b, double t) const {
        return k * std::exp((p.q - 1.0) * log_b + gamma * t);
    }
    LogState at(const Parameters& p, double log_b, double t) const {
        if (log_power != 0.0)
            return {t, log_b + s * t + log_power * std::log(std::abs(t)), s + log_power / t};
        const double d = delta(p, log_b, t);
        return {t, log_b + s * t + std::log1p(d), s + gamma * d / (1.0 + d)};
    }
};

ZeroEnd zero_end_of(const Parameters& p, const Saddle& sd, const ProfileSpec& phi) {
    ZeroEnd z;
    z.s = phi.exponent;
    z.log_power = phi.log_power;
    z.gamma = (p.q - 1.0) * (sd.beta + z.s);
    const double C = z.gamma * z.gamma + 2.0 * z.s * z.gamma - 2.0 * p.rho * z.gamma +
                     p.lambda * (1.0 - p.tau) * std::pow(z.s, -p.tau) * z.gamma;
    z.k = std::abs(C) > 1e-12 ? 1.0 / C : 0.0;
    return z;
}

// log of the tail coefficient for u ~ c r^e |log r|^lp as r -> infinity
double tail_log_coefficient(const ProfileSpec& tail, const TraceResult& r) {
    if (r.stop == Stop::saturated && tail.exponent == 0.0 && tail.log_power == 0.0) return r.l_limit;
    const LogState& x = r.last;
    return x.l - tail.exponent * x.t - tail.log_power * std::log(std::abs(x.t));
}

TraceOptions options(const Tolerances& tol, std::vector<double> grid, bool saturate) {
    TraceOptions o;
    o.tol = tol;
    o.grid = std::move(grid);
    o.saturate = saturate;
    return o;
}

void require_completed(const TraceResult& r, const char* what) {
    if (r.stop == Stop::blow_up || r.stop == Stop::blow_down || r.stop == Stop::step_underflow)
        throw NumericalFailure(std::string(what) + ": integration stopped early at t = " + std::to_string(r.last.t));
}

const FamilyProfiles& family_or_throw(const GlobalClassification& g, ShootFamily f) {
    const std::string name = to_string(f);
    for (const auto& fam : g.families)
        if (fam.name == name) return fam;
    std::string have;
    for (const auto& fam : g.families) have += (have.empty() ? "" : ", ") + fam.name;
    throw FamilyUnavailable(name + " does not exist for these parameters (families: " + have + ")");
}

IntegrationStatus status_of(Stop s) {
    switch (s) {
        case Stop::blow_up: return IntegrationStatus::blow_up;
        case Stop::blow_down: return IntegrationStatus::blow_down;
        case Stop::step_underflow: return IntegrationStatus::step_underflow;
        default: return IntegrationStatus::ok;
    }
}

struct Assembled {
    std::vector<LogState> states;  // normalized time, ascending
    IntegrationStatus status = IntegrationStatus::ok;
};

// Shifts normalized states onto the output grid: l = l_n + beta L, t = t_n - L.
RadialSolution finish(const Parameters& p, const Saddle& sd, const std::vector<double>& grid,
                      const Assembled& a, double L) {
    RadialSolution s;
    s.params = p;
    s.status = a.status;
    const std::size_t n = std::min(grid.size(), a.states.size());
    for (std::size_t i = 0; i < n; ++i) {
        const LogState& x = a.states[i];
        s.samples.push_back(detail::to_sample({grid[i], x.l + sd.beta * L, x.Y}));
    }
    s.t_reached = n ? grid[n - 1] : grid.front();
    return s;
}

std::vector<double> shifted(const std::vector<double>& g, double L) {
    std::vector<double> out(g.size());
    std::transform(g.begin(), g.end(), out.begin(), [L](double t) { return t + L; });
    return out;
}

RadialSolution shoot_inf_c(const Parameters& p, const FamilyProfiles& fam, const Saddle& sd,
                           const ShootingSpec& spec, const Tolerances& tol, const std::vector<double>& grid) {
    const LogState seed = manifold_point(sd, sd.mu_plus, 0.0);
    // growing tails are read off before they leave the double range
    TraceOptions po = options(tol, {}, true);
    po.stop_when = [](const LogState& x) { return x.l > kTailReadout; };
    const TraceResult probe = detail::trace(p, seed, kFarForward, po);
    require_completed(probe, "u_inf_c tail");
    const ProfileSpec& tail = fam.near_infinity;
    const double log_c = tail_log_coefficient(tail, probe);
    const double L = spec.target ? (std::log(*spec.target) - log_c) / (sd.beta + tail.exponent) : 0.0;

    const std::vector<double> gn = shifted(grid, L);
    Assembled a;
    std::vector<double> fwd;
    for (double t : gn) {
        if (t < 0.0) a.states.push_back(manifold_point(sd, sd.mu_plus, t));
        else fwd.push_back(t);
    }
    if (!fwd.empty()) {
        const TraceResult r = detail::trace(p, seed, fwd.back(), options(tol, fwd, true));
        a.states.insert(a.states.end(), r.out.begin(), r.out.end());
        a.status = status_of(r.stop);
    }
    RadialSolution s = finish(p, sd, grid, a, L);
    s.provenance.method = "unstable manifold of U";
    s.provenance.values["c"] = std::exp(log_c + (sd.beta + tail.exponent) * L);
    s.provenance.values["mu_plus"] = sd.mu_plus;
    return s;
}

// Backward from the stable manifold of U to the zero end; returns log b of the normalized orbit.
RadialSolution shoot_b(const Parameters& p, const FamilyProfiles& fam, const Saddle& sd,
                       const ShootingSpec& spec, const Tolerances& tol, const std::vector<double>& grid) {
    const ZeroEnd z = zero_end_of(p, sd, fam.near_zero);
    const LogState seed = manifold_point(sd, sd.mu_minus, 0.0);
    const double stop_ly = std::log(kZeroEndY * sd.lambda_coeff);
    TraceOptions po = options(tol, {}, false);
    po.stop_when = [&](const LogState& x) { return log_y(sd, x) < stop_ly; };
    const TraceResult probe = detail::trace(p, seed, kFarBackward, po);
    require_completed(probe, "u_b zero end");
    const double log_b = z.log_b(p, probe.last);
    const double L = (std::log(spec.target.value_or(1.0)) - log_b) / (sd.beta + z.s);

    const std::vector<double> gn = shifted(grid, L);
    Assembled a;
    std::vector<double> bwd;
    for (double t : gn)
        if (t <= 0.0) bwd.push_back(t);
    if (!bwd.empty()) {
        const TraceResult r = detail::trace(p, seed, bwd.front(), options(tol, bwd, false));
        std::vector<LogState> back(r.out.rbegin(), r.out.rend());
        // below the floor the zero-end expansion takes over
        const std::size_t missing = bwd.size() - back.size();
        for (std::size_t i = missing; i-- > 0;) back.insert(back.begin(), z.at(p, log_b, bwd[i]));
        a.states = std::move(back);
    }
    for (double t : gn)
        if (t > 0.0) a.states.push_back(manifold_point(sd, sd.mu_minus, t));
    RadialSolution s = finish(p, sd, grid, a, L);
    s.provenance.method = "stable manifold of U";
    s.provenance.values["b"] = std::exp(log_b + (sd.beta + z.s) * L);
    s.provenance.values["mu_minus"] = sd.mu_minus;
    return s;
}

struct TurningOrbit {
    double log_b = 0.0;
    double log_c = 0.0;
};

TurningOrbit turning_orbit(const Parameters& p, const Saddle& sd, const ZeroEnd& z, const ProfileSpec& tail,
                           double h, const Tolerances& tol) {
    const LogState top{0.0, std::log(h * sd.lambda_coeff), -sd.beta};
    const double stop_ly = std::log(kZeroEndY * sd.lambda_coeff);
    TraceOptions po = options(tol, {}, false);
    po.stop_when = [&](const LogState& x) { return log_y(sd, x) < stop_ly; };
    const TraceResult back = detail::trace(p, top, kFarBackward, po);
    require_completed(back, "u_b_inf_c zero end");
    const TraceResult fwd = detail::trace(p, top, kFarForward, options(tol, {}, true));
    require_completed(fwd, "u_b_inf_c tail");
    return {z.log_b(p, back.last), tail_log_coefficient(tail, fwd)};
}

RadialSolution shoot_b_inf_c(const Parameters& p, const FamilyProfiles& fam, const Saddle& sd,
                             const ShootingSpec& spec, const Tolerances& tol, const std::vector<double>& grid) {
    const ZeroEnd z = zero_end_of(p, sd, fam.near_zero);
    const ProfileSpec& tail = fam.near_infinity;
    const double kb = sd.beta + z.s;         // b scales by sigma^kb
    const double kc = sd.beta + tail.exponent;  // c scales by sigma^kc
    const double log_b_target = std::log(spec.target.value_or(1.0));
    const double log_c_target = std::log(spec.target_c.value_or(1.0));
    const double target = kc * log_b_target - kb * log_c_target;
    auto invariant = [&](double h) {
        const TurningOrbit o = turning_orbit(p, sd, z, tail, h, tol);
        return kc * o.log_b - kb * o.log_c - target;
    };

    // bracket by walking from h = 1/2 toward both ends
    double lo = 0.5, hi = 0.5;
    const double mid = invariant(0.5);
    double f_lo = mid, f_hi = mid;
    bool found = mid == 0.0;
    for (int k = 2; k <= 45 && !found; ++k) {
        const double up = 1.0 - std::ldexp(1.0, -k);
        const double fu = invariant(up);
        if ((fu > 0) != (f_hi > 0)) {
            lo = hi;
            f_lo = f_hi;
            hi = up;
            f_hi = fu;
            found = true;
            break;
        }
        hi = up;
        f_hi = fu;
        const double down = std::ldexp(1.0, -k);
        const double fd = invariant(down);
        if ((fd > 0) != (f_lo > 0)) {
            hi = lo;
            f_hi = f_lo;
            lo = down;
            f_lo = fd;
            found = true;
            break;
        }
        lo = down;
        f_lo = fd;
    }
    if (!found) throw BisectionFailed("u_b_inf_c: no turning height reaches the requested (b, c)");

    double h = 0.5;
    if (mid != 0.0) {
        std::uintmax_t iters = 200;
        const auto res = boost::math::tools::toms748_solve(invariant, lo, hi, f_lo, f_hi,
                                                           boost::math::tools::eps_tolerance<double>(48), iters);
        if (iters >= 200) throw BisectionFailed("u_b_inf_c: turning-height solve did not converge");
        h = 0.5 * (res.first + res.second);
    }

    const TurningOrbit o = turning_orbit(p, sd, z, tail, h, tol);
    const double L = (log_b_target - o.log_b) / kb;
    const std::vector<double> gn = shifted(grid, L);
    const LogState top{0.0, std::log(h * sd.lambda_coeff), -sd.beta};
    Assembled a;
    std::vector<double> bwd, fwd;
    for (double t : gn) (t < 0.0 ? bwd : fwd).push_back(t);
    if (!bwd.empty()) {
        const TraceResult r = detail::trace(p, top, bwd.front(), options(tol, bwd, false));
        std::vector<LogState> back(r.out.rbegin(), r.out.rend());
        const std::size_t missing = bwd.size() - back.size();
        for (std::size_t i = missing; i-- > 0;) back.insert(back.begin(), z.at(p, o.log_b, bwd[i]));
        a.states = std::move(back);
    }
    if (!fwd.empty()) {
        const TraceResult r = detail::trace(p, top, fwd.back(), options(tol, fwd, true));
        a.states.insert(a.states.end(), r.out.begin(), r.out.end());
        a.status = status_of(r.stop);
    }
    RadialSolution s = finish(p, sd, grid, a, L);
    s.provenance.method = "turning-point bisection";
    s.provenance.values["h"] = h;
    s.provenance.values["b"] = std::exp(o.log_b + kb * L);
    s.provenance.values["c"] = std::exp(o.log_c + kc * L);
    return s;
}

void check_window(const ShootingSpec& spec) {
    if (!(spec.t_start < spec.t_end)) throw InvalidInput("shoot: t_start must be < t_end");
    if (spec.target && !(*spec.target > 0.0)) throw InvalidInput("shoot: target must be positive");
    if (spec.target_c && !(*spec.target_c > 0.0)) throw InvalidInput("shoot: target_c must be positive");
}

}  // namespace

RadialSolution shoot(const Parameters& p, const ShootingSpec& spec, const Tolerances& tol) {
    validate(p);
    check_window(spec);
    if (!(p.theta < -2.0))
        throw FamilyUnavailable("shoot: requires theta < -2; theta > -2 is reached through the Kelvin image");
    const GlobalClassification g = predict_global(p);
    const FamilyProfiles& fam = family_or_throw(g, spec.family);
    const Saddle sd = saddle_of(p);
    const std::vector<double> grid = detail::uniform_grid(spec.t_start, spec.t_end, tol.grid_dt);

    RadialSolution s;
    switch (spec.family) {
        case ShootFamily::u_inf_c: s = shoot_inf_c(p, fam, sd, spec, tol, grid); break;
        case ShootFamily::u_b: s = shoot_b(p, fam, sd, spec, tol, grid); break;
        case ShootFamily::u_b_inf_c: s = shoot_b_inf_c(p, fam, sd, spec, tol, grid); break;
    }
    s.provenance.kind = "shooting";
    s.provenance.family = to_string(spec.family);
    s.provenance.values["Lambda"] = sd.lambda_coeff;
    if (spec.family == ShootFamily::u_b_inf_c) s.provenance.values["heuristic"] = 1.0;
    return s;
}

BisectionShot shoot_u_b_by_bisection(const Parameters& p, const ShootingSpec& spec, const Tolerances& tol) {
    validate(p);
    check_window(spec);
    if (!(p.theta < -2.0)) throw FamilyUnavailable("shoot_u_b_by_bisection: requires theta < -2");
    const GlobalClassification g = predict_global(p);
    const FamilyProfiles& fam = family_or_throw(g, ShootFamily::u_b);
    const Saddle sd = saddle_of(p);
    const ProfileSpec prof = spec.seed_profile.value_or(fam.near_zero);
    const double b = spec.target.value_or(1.0);
    const double t0 = spec.t_start;
    const double l0 = std::log(b) + prof.exponent * t0 + prof.log_power * std::log(std::abs(t0));
    const double y0 = prof.exponent + (prof.log_power != 0.0 ? prof.log_power / t0 : 0.0);
    const double logL = std::log(sd.lambda_coeff);

    // +1: crosses above U, -1: turns back below U, 0: still tracking U at t_end
    enum Side { below = -1, tracking = 0, above = 1 };
    auto run = [&](double pert, bool keep) {
        TraceOptions o = options(tol, keep ? detail::uniform_grid(t0, spec.t_end, tol.grid_dt) : std::vector<double>{}, false);
        o.stop_when = [&](const LogState& x) {
            const double ly = log_y(sd, x);
            return ly > logL || (x.Y + sd.beta < 0.0 && ly < logL) || x.Y <= 0.0;
        };
        TraceResult r = detail::trace(p, {t0, l0, y0 * (1.0 + pert)}, spec.t_end, o);
        Side side = tracking;
        if (r.stop == Stop::blow_up) side = above;
        else if (r.stop == Stop::blow_down) side = below;
        else if (r.stop == Stop::predicate) side = log_y(sd, r.last) > logL ? above : below;
        return std::make_pair(side, std::move(r));
    };

    double lo = -0.5, hi = 0.5;
    const Side s_lo = run(lo, false).first, s_hi = run(hi, false).first;
    if (s_lo == s_hi || s_lo == tracking || s_hi == tracking)
        throw BisectionFailed("u_b bisection: perturbation interval [-0.5, 0.5] does not bracket the separatrix");
    int it = 0;
    double best = 0.0;
    for (; it < 80; ++it) {
        best = 0.5 * (lo + hi);
        if (best == lo || best == hi) break;
        const Side s = run(best, false).first;
        if (s == tracking) break;
        (s == s_lo ? lo : hi) = best;
    }
    // the side that turns below is kept: it follows the separatrix up to the departure from U
    const double final_pert = s_lo == below ? lo : hi;
    auto [side, r] = run(final_pert, true);
    (void)side;
    BisectionShot out;
    out.b = b;
    out.iterations = it;
    out.solution.params = p;
    for (const auto& x : r.out) out.solution.samples.push_back(detail::to_sample(x));
    out.solution.t_reached = r.last.t;
    out.solution.status = status_of(r.stop);
    out.solution.provenance.kind = "shooting";
    out.solution.provenance.family = "u_b";
    out.solution.provenance.method = "perturbation bisection";
    out.solution.provenance.values["perturbation"] = final_pert;
    out.solution.provenance.values["b"] = b;
    return out;
}

RadialSolution shoot_from_zero(const Parameters& p, double exponent, double t_seed, double t1, double u1,
                               const Tolerances& tol) {
    validate(p);
    if (!(t_seed < t1)) throw InvalidInput("shoot_from_zero: t_seed must be < t1");
    if (!(u1 > 0.0)) throw InvalidInput("shoot_from_zero: u1 must be positive");
    const double target = std::log(u1);
    auto overshoots = [&](double log_a) {
        const TraceResult r = detail::trace(p, {t_seed, log_a + exponent * t_seed, exponent}, t1, options(tol, {}, false));
        if (r.stop == Stop::blow_up) return true;
        if (r.stop != Stop::reached) return false;
        return r.last.l > target;
    };
    double lo = target - 100.0, hi = target + 100.0;
    if (overshoots(lo) || !overshoots(hi))
        throw BisectionFailed("shoot_from_zero: amplitude range does not bracket u(r1) = u1");
    int it = 0;
    for (; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (overshoots(mid) ? hi : lo) = mid;
    }
    const double log_a = 0.5 * (lo + hi);
    const TraceResult r = detail::trace(p, {t_seed, log_a + exponent * t_seed, exponent}, t1,
                                        options(tol, detail::uniform_grid(t_seed, t1, tol.grid_dt), false));
    RadialSolution s;
    s.params = p;
    for (const auto& x : r.out) s.samples.push_back(detail::to_sample(x));
    s.status = status_of(r.stop);
    s.t_reached = r.last.t;
    s.provenance.kind = "shooting";
    s.provenance.method = "forward amplitude bisection";
    s.provenance.values["seed_amplitude"] = std::exp(log_a);
    s.provenance.values["seed_exponent"] = exponent;
    s.provenance.values["iterations"] = it;
    return s;
}

}  // namespace sel
