#include "sel/radial_solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "log_ode.hpp"

namespace sel {

namespace {

// Endpoints are accepted up to the rounding of exp(log r).
std::size_t bracket(const std::vector<Sample>& s, double& r) {
    if (s.size() < 2 || !(r >= s.front().r * (1 - 1e-12)) || !(r <= s.back().r * (1 + 1e-12)))
        throw InvalidInput("RadialSolution: r outside the sampled range");
    r = std::clamp(r, s.front().r, s.back().r);
    auto it = std::upper_bound(s.begin(), s.end(), r, [](double v, const Sample& x) { return v < x.r; });
    std::size_t i = static_cast<std::size_t>(it - s.begin());
    return std::min(std::max<std::size_t>(i, 1), s.size() - 1) - 1;
}

double slope(const Sample& s) { return s.r * s.du / s.u; }

// Second derivative implied by the equation at (r, u, u').
double d2u_over_u(const Parameters& p, const Sample& s) {
    const double Y = slope(s);
    const double G = std::exp((p.theta + 2.0) * std::log(s.r) + (p.q - 1.0) * std::log(s.u));
    double g = 0.0;
    if (p.lambda != 0.0 && Y != 0.0) g = p.lambda * std::pow(std::abs(Y), 1.0 - p.tau);
    return (G - (1.0 - 2.0 * p.rho) * Y - g) / (s.r * s.r);
}

bool uniform_in_log(const std::vector<Sample>& s, std::size_t i, double& h) {
    if (i < 2 || i + 2 >= s.size()) return false;
    h = std::log(s[i + 1].r) - std::log(s[i].r);
    for (std::size_t k = i - 2; k < i + 2; ++k) {
        const double hk = std::log(s[k + 1].r) - std::log(s[k].r);
        if (std::abs(hk - h) > 1e-6 * std::abs(h)) return false;
    }
    return true;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

double RadialSolution::value(double r) const {
    const std::size_t i = bracket(samples, r);
    const Sample& a = samples[i];
    const Sample& b = samples[i + 1];
    const double x0 = std::log(a.r), x1 = std::log(b.r), h = x1 - x0;
    const double s = (std::log(r) - x0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return std::exp(h00 * std::log(a.u) + h10 * h * slope(a) + h01 * std::log(b.u) + h11 * h * slope(b));
}

double RadialSolution::log_slope(double r) const {
    const std::size_t i = bracket(samples, r);
    const Sample& a = samples[i];
    const Sample& b = samples[i + 1];
    const double x0 = std::log(a.r), x1 = std::log(b.r), h = x1 - x0;
    const double s = (std::log(r) - x0) / h;
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    return (d00 * std::log(a.u) + d01 * std::log(b.u)) / h + d10 * slope(a) + d11 * slope(b);
}

double rhs_log(const Parameters& p, double t, double w, double dw) {
    if (!(w > 0.0)) throw NumericalFailure("rhs_log: w <= 0 (blow-down)");
    double g = 0.0;
    if (p.lambda != 0.0 && dw != 0.0) g = p.lambda * std::pow(w, p.tau) * std::pow(std::abs(dw), 1.0 - p.tau);
    return 2.0 * p.rho * dw - g + std::exp((p.theta + 2.0) * t) * std::pow(w, p.q);
}

RadialSolution integrate(const Parameters& p, double t0, double t1, double w0, double dw0,
                         const Tolerances& tol) {
    validate(p);
    if (!(w0 > 0.0)) throw InvalidInput("integrate: w0 must be positive");
    detail::TraceOptions opt;
    opt.tol = tol;
    opt.grid = detail::uniform_grid(std::min(t0, t1), std::max(t0, t1), tol.grid_dt);
    if (t1 < t0 && opt.grid.back() != t0) opt.grid.push_back(t0);
    opt.saturate = true;
    const detail::TraceResult res = detail::trace(p, {t0, std::log(w0), dw0 / w0}, t1, opt);

    RadialSolution s;
    s.params = p;
    s.provenance.kind = "integration";
    s.provenance.method = "rosenbrock4 in (log w, w'/w)";
    for (const auto& st : res.out) s.samples.push_back(detail::to_sample(st));
    if (t1 < t0) std::reverse(s.samples.begin(), s.samples.end());
    s.t_reached = res.out.empty() ? t0 : res.out.back().t;
    switch (res.stop) {
        case detail::Stop::blow_up: s.status = IntegrationStatus::blow_up; break;
        case detail::Stop::blow_down: s.status = IntegrationStatus::blow_down; break;
        case detail::Stop::step_underflow: s.status = IntegrationStatus::step_underflow; break;
        default: s.status = IntegrationStatus::ok; s.t_reached = t1; break;
    }
    if (res.stop == detail::Stop::saturated) s.provenance.values["log_u_limit"] = res.l_limit;
    return s;
}

RadialSolution construct_exact_U(const Parameters& p, double t0, double t1, double dt) {
    validate(p);
    const DerivedQuantities d = derive(p);
    if (!d.lambda_coeff)
        throw NoSolutions("construct_exact_U: f(beta) = " + std::to_string(d.f_at_beta) + " <= 0");
    RadialSolution s;
    s.params = p;
    s.provenance.kind = "exact_U";
    s.provenance.values["Lambda"] = *d.lambda_coeff;
    const double logL = std::log(*d.lambda_coeff);
    for (double t : detail::uniform_grid(t0, t1, dt)) {
        const double r = std::exp(t), u = std::exp(logL - d.beta * t);
        s.samples.push_back({r, u, -d.beta * u / r});
    }
    s.t_reached = t1;
    return s;
}

RadialSolution scale(const RadialSolution& s, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("scale: sigma must be positive");
    const double beta = beta_of(s.params);
    const double k = std::pow(sigma, beta);
    RadialSolution out = s;
    for (Sample& x : out.samples) x = {x.r / sigma, k * x.u, k * sigma * x.du};
    out.t_reached = s.t_reached - std::log(sigma);
    out.provenance.values["sigma"] = sigma * (s.provenance.values.count("sigma") ? s.provenance.values.at("sigma") : 1.0);
    return out;
}

Parameters kelvin(const Parameters& p) {
    Parameters k = p;
    k.rho = -p.rho;
    k.theta = -p.theta - 4.0;
    return k;
}

RadialSolution kelvin_solution(const RadialSolution& s) {
    RadialSolution out;
    out.params = kelvin(s.params);
    out.provenance = s.provenance;
    out.provenance.kind = "kelvin";
    out.status = s.status;
    out.t_reached = -s.t_reached;
    out.samples.reserve(s.samples.size());
    for (auto it = s.samples.rbegin(); it != s.samples.rend(); ++it)
        out.samples.push_back({1.0 / it->r, it->u, -it->r * it->r * it->du});
    return out;
}

double max_relative_residual(const RadialSolution& s) {
    const Parameters& p = s.params;
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < s.samples.size(); ++i) {
        double h = 0.0;
        if (!uniform_in_log(s.samples, i, h)) continue;
        const double Y = slope(s.samples[i]);
        const double dY = (-slope(s.samples[i + 2]) + 8 * slope(s.samples[i + 1]) - 8 * slope(s.samples[i - 1]) +
                           slope(s.samples[i - 2])) /
                          (12 * h);
        const double G = std::exp((p.theta + 2.0) * std::log(s.samples[i].r) + (p.q - 1.0) * std::log(s.samples[i].u));
        const double g = p.lambda == 0.0 || Y == 0.0 ? 0.0 : p.lambda * std::pow(std::abs(Y), 1.0 - p.tau);
        const double res = dY + Y * Y - 2 * p.rho * Y + g - G;
        const double sc = std::abs(dY) + Y * Y + std::abs(2 * p.rho * Y) + std::abs(g) + G;
        if (sc > 0.0) worst = std::max(worst, std::abs(res) / sc);
    }
    return worst;
}

bool apriori_bound_holds(const RadialSolution& s, double r0) {
    const DerivedQuantities d = derive(s.params);
    for (const Sample& x : s.samples) {
        if (x.r > r0) continue;
        if (x.u > d.c0 * std::pow(x.r, -d.beta) * (1.0 + 1e-12)) return false;
    }
    return true;
}

TransformedSolution to_exponential_form(const RadialSolution& s) {
    const Parameters& p = s.params;
    TransformedSolution out;
    out.form = "exponential";
    out.mu = 2.0 - p.dim - 2.0 * p.rho;
    for (const Sample& x : s.samples) {
        if (!(x.u > 0.0)) throw InvalidInput("to_exponential_form: u must be positive");
        const double dw = x.du / x.u;
        const double d2w = d2u_over_u(p, x) - dw * dw;
        const double w = std::log(x.u);
        out.samples.push_back({x.r, w, dw, d2w});
        const double r = x.r;
        const double terms[] = {d2w, (p.dim - 1.0) * dw / r, dw * dw, out.mu * dw / r,
                                p.lambda * std::pow(std::abs(dw), 1.0 - p.tau) / std::pow(r, 1.0 + p.tau),
                                -std::pow(r, p.theta) * std::exp((p.q - 1.0) * w)};
        double sum = 0.0, mag = 0.0;
        for (double t : terms) {
            sum += t;
            mag += std::abs(t);
        }
        if (mag > 0.0) out.max_residual = std::max(out.max_residual, std::abs(sum) / mag);
    }
    return out;
}

TransformedSolution to_power_form(const RadialSolution& s, double alpha) {
    const Parameters& p = s.params;
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("to_power_form: alpha must lie in (0,1)");
    if (std::abs(p.tau - (1.0 - alpha)) > 1e-12) throw InvalidInput("to_power_form: tau must equal 1 - alpha");
    TransformedSolution out;
    out.form = "power";
    out.alpha = alpha;
    out.mu = 2.0 - p.dim - 2.0 * p.rho;
    out.eta = p.lambda * std::pow(alpha, alpha);
    out.K = p.q * alpha;
    for (const Sample& x : s.samples) {
        if (!(x.u > 0.0)) throw InvalidInput("to_power_form: u must be positive");
        const double r = x.r;
        const double v = std::pow(x.u, 1.0 / alpha);
        const double a1 = x.du / x.u;  // u'/u
        const double dv = v * a1 / alpha;
        const double d2v = v * (d2u_over_u(p, x) / alpha + (1.0 / alpha) * (1.0 / alpha - 1.0) * a1 * a1);
        out.samples.push_back({r, v, dv, d2v});
        // (v^alpha)'' + (N - 1 + mu) (v^alpha)'/r + eta |v'|^alpha / r^{2-alpha} - r^theta v^K
        const double va1 = std::pow(v, alpha - 1.0);
        const double terms[] = {alpha * va1 * d2v, alpha * (alpha - 1.0) * va1 / v * dv * dv,
                                (p.dim - 1.0 + out.mu) * alpha * va1 * dv / r,
                                out.eta * std::pow(std::abs(dv), alpha) / std::pow(r, 2.0 - alpha),
                                -std::pow(r, p.theta) * std::pow(v, out.K)};
        double sum = 0.0, mag = 0.0;
        for (double t : terms) {
            sum += t;
            mag += std::abs(t);
        }
        if (mag > 0.0) out.max_residual = std::max(out.max_residual, std::abs(sum) / mag);
    }
    return out;
}

std::string to_csv(const RadialSolution& s) {
    std::string out = "r,u,du\n";
    for (const Sample& x : s.samples) {
        out += format_double(x.r);
        out += ',';
        out += format_double(x.u);
        out += ',';
        out += format_double(x.du);
        out += '\n';
    }
    return out;
}

std::vector<Sample> samples_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("r,u,du", 0) != 0)
        throw InvalidInput("solution CSV: expected header r,u,du");
    std::vector<Sample> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v[3];
        const char* b = line.data();
        const char* e = b + line.size();
        for (int k = 0; k < 3; ++k) {
            auto res = std::from_chars(b, e, v[k]);
            if (res.ec != std::errc()) throw InvalidInput("solution CSV: bad number on line " + std::to_string(lineno));
            b = res.ptr;
            if (k < 2) {
                if (b == e || *b != ',') throw InvalidInput("solution CSV: expected 3 columns on line " + std::to_string(lineno));
                ++b;
            }
        }
        if (b != e) throw InvalidInput("solution CSV: trailing data on line " + std::to_string(lineno));
        out.push_back({v[0], v[1], v[2]});
    }
    return out;
}

std::string to_string(ShootFamily f) {
    switch (f) {
        case ShootFamily::u_inf_c: return "u_inf_c";
        case ShootFamily::u_b: return "u_b";
        case ShootFamily::u_b_inf_c: return "u_b_inf_c";
    }
    return "?";
}

ShootFamily shoot_family_from_string(const std::string& s) {
    if (s == "u_inf_c") return ShootFamily::u_inf_c;
    if (s == "u_b") return ShootFamily::u_b;
    if (s == "u_b_inf_c") return ShootFamily::u_b_inf_c;
    throw InvalidInput("unknown family: " + s);
}

std::string to_string(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::ok: return "ok";
        case IntegrationStatus::blow_up: return "blow_up";
        case IntegrationStatus::blow_down: return "blow_down";
        case IntegrationStatus::step_underflow: return "step_underflow";
    }
    return "?";
}

}  // namespace sel
