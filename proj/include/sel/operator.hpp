#pragma once

#include "sel/taxonomy.hpp"

namespace sel {

struct RadialTriple {
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
    double r = 1.0;
};

/// Logarithmic jet of a positive radial function:
/// log u, a = r u'/u, b = r^2 u''/u. Free of under/overflow at extreme radii.
struct LogJet {
    double log_u = 0.0;
    double a = 0.0;
    double b = 0.0;
};

inline constexpr double kResidualZeroRel = 1e-13;

double eval_operator(const Parameters& p, const RadialTriple& t);
/// L[u] - r^theta u^q
double residual(const Parameters& p, const RadialTriple& t);
/// Sum of magnitudes of the terms entering residual().
double residual_scale(const Parameters& p, const RadialTriple& t);
/// -1, 0, +1 with |residual| <= 1e-13 * scale counted as zero.
int residual_sign(const Parameters& p, const RadialTriple& t);

/// residual and scale divided by u / r^2, computed from a log jet.
struct NormalizedResidual {
    double value = 0.0;
    double scale = 0.0;
};
NormalizedResidual normalized_residual(const Parameters& p, double r, const LogJet& j,
                                       bool include_reaction = true);

RadialTriple to_triple(double r, const LogJet& j);

}  // namespace sel
