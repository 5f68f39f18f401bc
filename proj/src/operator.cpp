#include "sel/operator.hpp"

#include <cmath>

namespace sel {

namespace {

double gradient_term(const Parameters& p, const RadialTriple& t) {
    if (p.lambda == 0.0 || t.du == 0.0) return 0.0;
    const double g = std::pow(std::abs(t.du), 1.0 - p.tau);
    if (p.tau == 0.0) return p.lambda * g / t.r;
    return p.lambda * std::pow(t.u, p.tau) * g / std::pow(t.r, 1.0 + p.tau);
}

double reaction(const Parameters& p, const RadialTriple& t) {
    return std::pow(t.r, p.theta) * std::pow(t.u, p.q);
}

}  // namespace

double eval_operator(const Parameters& p, const RadialTriple& t) {
    return t.d2u + (1.0 - 2.0 * p.rho) * t.du / t.r + gradient_term(p, t);
}

double residual(const Parameters& p, const RadialTriple& t) {
    return eval_operator(p, t) - reaction(p, t);
}

double residual_scale(const Parameters& p, const RadialTriple& t) {
    return std::abs(t.d2u) + std::abs((1.0 - 2.0 * p.rho) * t.du / t.r) +
           std::abs(gradient_term(p, t)) + reaction(p, t);
}

int residual_sign(const Parameters& p, const RadialTriple& t) {
    const double r = residual(p, t);
    if (std::abs(r) <= kResidualZeroRel * residual_scale(p, t)) return 0;
    return r > 0.0 ? 1 : -1;
}

NormalizedResidual normalized_residual(const Parameters& p, double r, const LogJet& j,
                                       bool include_reaction) {
    const double lin = (1.0 - 2.0 * p.rho) * j.a;
    const double grad = (p.lambda == 0.0 || j.a == 0.0)
                            ? 0.0
                            : p.lambda * std::pow(std::abs(j.a), 1.0 - p.tau);
    const double react =
        include_reaction ? std::exp((p.theta + 2.0) * std::log(r) + (p.q - 1.0) * j.log_u) : 0.0;
    NormalizedResidual n;
    n.value = j.b + lin + grad - react;
    n.scale = std::abs(j.b) + std::abs(lin) + std::abs(grad) + react;
    return n;
}

RadialTriple to_triple(double r, const LogJet& j) {
    const double u = std::exp(j.log_u);
    return {u, j.a * u / r, j.b * u / (r * r), r};
}

}  // namespace sel
