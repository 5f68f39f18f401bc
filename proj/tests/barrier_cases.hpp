#pragma once

// Parameter sets for barrier certification: five per applicable case and family.

#include <algorithm>
#include <string>
#include <vector>

#include "sel/barriers.hpp"
#include "sel/taxonomy.hpp"

namespace sel::testing {

struct Base {
    double q, tau, lambda, rho;
    bool at_upsilon = false;
};

struct BarrierCase {
    Family family;
    std::string label;  // case label: N0a, N0b, N1a, N1b, N2>, N2=
    Parameters p;
    Coefficients coeffs;
};

inline const std::vector<std::pair<std::string, std::vector<Base>>>& bases() {
    static const std::vector<std::pair<std::string, std::vector<Base>>> b = {
        {"N0a", {{2, 0, 1, 0}, {3, 0, 2, 1}, {1.5, 0, 0, -1}, {4, 0, 5, 0.5}, {2.5, 0, -1, -2}}},
        {"N0b", {{2, .5, 1, .5}, {3, .3, 2, -1}, {1.5, .8, 4, 1}, {5, .1, .5, 0}, {2.5, .6, 3, -.5}}},
        {"N1a", {{2, 0, 1, 2}, {3, 0, 0, .5}, {1.5, 0, -2, 0}, {4, 0, 1, 1}, {2.5, 0, 3, 2}}},
        {"N1b", {{2, .5, -1, 1}, {3, .3, -.5, 0}, {1.5, .7, -2, -1}, {4, .2, -3, 2}, {2.5, .9, -.2, .5}}},
        {"N2>", {{3, .5, 12, 6.5}, {3, .5, 1, 2}, {2, .3, 2, 3}, {1.5, .7, 4, 4}, {4, .2, .5, 1.5}}},
        {"N2=",
         {{3, .5, 1, 0, true}, {2, .3, 2, 0, true}, {1.5, .7, 4, 0, true}, {4, .2, .5, 0, true},
          {2.5, .6, 3, 0, true}}},
    };
    return b;
}

inline Parameters with_beta(const Base& b, double beta) {
    Parameters p;
    p.dim = 3;
    p.q = b.q;
    p.tau = b.tau;
    p.lambda = b.lambda;
    p.rho = b.rho;
    if (b.at_upsilon) p.rho = *upsilon_of(p);
    p.theta = beta * (p.q - 1.0) - 2.0;
    return p;
}

inline Parameters base_params(const Base& b) { return with_beta(b, -1.0); }

// beta for families that need f(beta) > 0 and beta < 0.
inline double positive_f_beta(const std::string& label, const Base& b, int i) {
    static const double n0[] = {-2.0, -0.5, -1.0, -3.0, -0.7};
    if (label.rfind("N0", 0) == 0) return n0[i];
    const Roots r = find_negative_roots(base_params(b));
    if (label.rfind("N2", 0) == 0 && i % 2 == 1) return *r.varpi2 / 2.0;
    return 1.5 * *r.varpi1;
}

inline std::vector<BarrierCase> barrier_cases() {
    std::vector<BarrierCase> out;
    for (const auto& [label, list] : bases()) {
        const bool n0 = label.rfind("N0", 0) == 0;
        const bool n2 = label.rfind("N2", 0) == 0;
        const bool ups = label == "N2=";
        for (int i = 0; i < static_cast<int>(list.size()); ++i) {
            const Base& b = list[i];
            const Roots r = find_negative_roots(base_params(b));
            const double pb = positive_f_beta(label, b, i);

            out.push_back({Family::P_pm, label, with_beta(b, pb), {{"sign", 1.0}}});
            out.push_back({Family::P_pm, label, with_beta(b, pb), {{"sign", -1.0}}});
            out.push_back({Family::U, label, with_beta(b, pb), {}});

            double wb = pb;
            if (label == "N0b") wb = std::min(pb, -b.rho - 0.1);
            if (n2) wb = std::min(1.5 * *r.varpi1, -base_params(b).rho) - 0.1;
            out.push_back({Family::W_exp, label, with_beta(b, wb), {}});

            if (n0) continue;
            const double w1 = *r.varpi1;
            const double w2 = r.varpi2 ? *r.varpi2 : w1;

            double zb = w1 / 2.0;
            if (label == "N2>") zb = i % 2 == 0 ? 0.5 * (w1 + w2) : w2 / 2.0;
            out.push_back({Family::Z_exp, label, with_beta(b, zb), {}});

            if (!ups) {
                double vb = w1 / 2.0;
                if (n2) vb = i == 0 ? w2 : 0.5 * (w1 + w2);
                out.push_back({Family::V_sup, label, with_beta(b, vb), {}});
            }

            out.push_back({Family::V_log, label, with_beta(b, w1), {}});
            out.push_back({Family::PLog_pm, label, with_beta(b, w1), {{"sign", 1.0}}});
            out.push_back({Family::PLog_pm, label, with_beta(b, w1), {{"sign", -1.0}}});

            if (ups) {
                out.push_back({Family::Phi2, label, with_beta(b, w1 / 2.0), {}});
                out.push_back({Family::PsiTilde, label, with_beta(b, w1 / 2.0), {}});
                out.push_back({Family::Psi1_sub, label, with_beta(b, w1 - 1.0), {}});
            }
        }
    }
    return out;
}

}  // namespace sel::testing
