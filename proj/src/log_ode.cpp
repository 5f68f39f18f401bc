#include "log_ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>

namespace sel::detail {

namespace {

namespace ode = boost::numeric::odeint;
using vec = boost::numeric::ublas::vector<double>;
using mat = boost::numeric::ublas::matrix<double>;

constexpr double kMaxExponent = 700.0;
constexpr double kSlopeLimit = 1e6;
constexpr double kSaturationY = 1e-8;
constexpr double kSaturationMatch = 1e-3;

// Integration runs in s = dir * t so the stepper always moves forward, on the
// autonomous state (l + beta t, Y). Keeping t out of the right-hand side also avoids
// the df/dt term of rosenbrock4, which loses an order on this system.
struct System {
    const Parameters* p;
    double dir;
    double beta;
    void operator()(const vec& x, vec& dxds, double) const {
        dxds[0] = dir * (x[1] + beta);
        dxds[1] = dir * y_prime(*p, 0.0, x[0], x[1]);
    }
};

struct Jacobian {
    const Parameters* p;
    double dir;
    void operator()(const vec& x, mat& J, const double&, vec& dfds) const {
        const double Y = x[1];
        const double G = forcing(*p, 0.0, x[0]);
        double dg = 0.0;  // d/dY of lambda |Y|^{1-tau}
        if (p->lambda != 0.0 && Y != 0.0) {
            const double a = std::max(std::abs(Y), 1e-300);
            dg = p->lambda * (1.0 - p->tau) * std::pow(a, -p->tau) * (Y > 0 ? 1.0 : -1.0);
        }
        J(0, 0) = 0.0;
        J(0, 1) = dir;
        J(1, 0) = dir * (p->q - 1.0) * G;
        J(1, 1) = dir * (2.0 * p->rho - dg - 2.0 * Y);
        dfds[0] = 0.0;
        dfds[1] = 0.0;
    }
};

bool quasi_static_available(const Parameters& p) {
    return p.lambda > 0.0 && p.tau > 0.0 && p.theta + 2.0 < 0.0;
}

// Y on the slow manifold lambda Y^{1-tau} = G + 2 rho Y - Y' - Y^2, to first order.
double quasi_static_y(const Parameters& p, double t, double l) {
    const double G = forcing(p, t, l);
    const double y0 = std::pow(G / p.lambda, 1.0 / (1.0 - p.tau));
    const double kappa = (p.theta + 2.0) / (1.0 - p.tau);
    const double delta = (2.0 * p.rho * y0 - kappa * y0 - y0 * y0) / ((1.0 - p.tau) * G);
    return y0 * (1.0 + delta);
}

struct QuasiStatic {
    Parameters p;
    double ts, ls, y0s, kappa;
    double l_at(double t) const { return ls + y0s * std::expm1(kappa * (t - ts)) / kappa; }
    LogState at(double t) const {
        const double l = l_at(t);
        return {t, l, quasi_static_y(p, t, l)};
    }
    double l_limit() const { return ls - y0s / kappa; }
};

}  // namespace

double forcing(const Parameters& p, double t, double l) {
    const double e = (p.theta + 2.0) * t + (p.q - 1.0) * l;
    return std::exp(std::min(e, kMaxExponent));
}

double y_prime(const Parameters& p, double t, double l, double Y) {
    double g = 0.0;
    if (p.lambda != 0.0 && Y != 0.0) g = p.lambda * std::pow(std::abs(Y), 1.0 - p.tau);
    return 2.0 * p.rho * Y - g - Y * Y + forcing(p, t, l);
}

std::vector<double> uniform_grid(double t0, double t1, double dt) {
    std::vector<double> g;
    const long n = std::lround(std::floor((t1 - t0) / dt + 1e-9));
    g.reserve(static_cast<std::size_t>(n) + 2);
    for (long i = 0; i <= n; ++i) g.push_back(t0 + static_cast<double>(i) * dt);
    if (t1 - g.back() > 1e-9 * dt) g.push_back(t1);
    return g;
}

Sample to_sample(const LogState& s) {
    const double r = std::exp(s.t);
    const double u = std::exp(s.l);
    return {r, u, s.Y * u / r};
}

TraceResult trace(const Parameters& p, LogState start, double t1, const TraceOptions& opt) {
    TraceResult res;
    const double dir = t1 >= start.t ? 1.0 : -1.0;
    const double s0 = dir * start.t, s1 = dir * t1;

    // grid points in traversal order, restricted to [start.t, t1]
    std::vector<double> pending;
    for (double g : opt.grid) {
        if (dir > 0 ? (g >= start.t && g <= t1) : (g <= start.t && g >= t1)) pending.push_back(g);
    }
    if (dir < 0) std::reverse(pending.begin(), pending.end());
    std::size_t next = 0;
    auto emit_until = [&](double s_hi, auto&& state_at) {
        while (next < pending.size() && dir * pending[next] <= s_hi) {
            res.out.push_back(state_at(pending[next]));
            ++next;
        }
    };

    const bool can_saturate = opt.saturate && dir > 0 && quasi_static_available(p);
    auto bad = [&](const LogState& s) -> Stop {
        if (!std::isfinite(s.l) || !std::isfinite(s.Y)) return dir * s.Y < 0 ? Stop::blow_down : Stop::blow_up;
        // a steep slope means u grows or collapses along the direction of travel
        if (s.l > std::log(kBlowUpCap) || dir * s.Y > kSlopeLimit) return Stop::blow_up;
        if (s.l < std::log(kBlowDownFloor) || dir * s.Y < -kSlopeLimit) return Stop::blow_down;
        return Stop::reached;
    };

    emit_until(s0, [&](double) { return start; });
    res.last = start;
    if (s1 == s0) return res;

    using controller = ode::rosenbrock4_controller<ode::rosenbrock4<double>>;
    ode::rosenbrock4_dense_output<controller> stepper(controller(opt.tol.atol, opt.tol.rtol, opt.tol.max_step));
    const double beta = beta_of(p);
    vec x(2);
    x[0] = start.l + beta * start.t;
    x[1] = start.Y;
    stepper.initialize(x, s0, std::min(1e-3, opt.tol.max_step));
    System sys{&p, dir, beta};
    Jacobian jac{&p, dir};
    vec tmp(2);
    auto state_at = [&](double t) {
        stepper.calc_state(dir * t, tmp);
        return LogState{t, tmp[0] - beta * t, tmp[1]};
    };

    int tiny_steps = 0;
    while (true) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(std::make_pair(sys, jac));
        } catch (const ode::step_adjustment_error&) {
            res.stop = Stop::step_underflow;
            return res;
        }
        const double s_hi = std::min(span.second, s1);
        const vec& xc = stepper.current_state();
        const LogState cur{dir * span.second, xc[0] - beta * dir * span.second, xc[1]};
        const Stop b = bad(cur);
        if (b != Stop::reached) {
            // emit only the points that are still valid
            while (next < pending.size() && dir * pending[next] <= s_hi) {
                const LogState s = state_at(pending[next]);
                if (bad(s) != Stop::reached) break;
                res.out.push_back(s);
                ++next;
            }
            res.stop = b;
            return res;
        }
        emit_until(s_hi, state_at);
        if (span.second >= s1) {
            res.last = state_at(t1);
            return res;
        }
        res.last = cur;
        tiny_steps = (span.second - span.first) < 1e-12 * (1.0 + std::abs(span.second)) ? tiny_steps + 1 : 0;
        if (tiny_steps > 1000) {
            res.stop = Stop::step_underflow;
            return res;
        }
        if (can_saturate && cur.Y > 0.0 && cur.Y < kSaturationY) {
            const double yq = quasi_static_y(p, cur.t, cur.l);
            if (yq > 0.0 && std::abs(cur.Y / yq - 1.0) < kSaturationMatch) {
                const double kappa = (p.theta + 2.0) / (1.0 - p.tau);
                const double y0 = std::pow(forcing(p, cur.t, cur.l) / p.lambda, 1.0 / (1.0 - p.tau));
                const QuasiStatic qs{p, cur.t, cur.l, y0, kappa};
                emit_until(s1, [&](double t) { return qs.at(t); });
                res.stop = Stop::saturated;
                res.l_limit = qs.l_limit();
                res.last = qs.at(t1);
                return res;
            }
        }
        if (opt.stop_when && opt.stop_when(cur)) {
            res.stop = Stop::predicate;
            return res;
        }
    }
}

}  // namespace sel::detail
