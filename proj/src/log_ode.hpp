#pragma once

// Log-radius system shared by integrate() and the shooting routines.
// State (l, Y) with l = log w, Y = w'/w, t = log r:
//   l' = Y,  Y' = 2 rho Y - lambda |Y|^{1-tau} - Y^2 + G,  G = exp((theta+2) t + (q-1) l).

#include <functional>
#include <limits>
#include <vector>

#include "sel/radial_solver.hpp"

namespace sel::detail {

struct LogState {
    double t = 0.0;
    double l = 0.0;
    double Y = 0.0;
};

enum class Stop { reached, blow_up, blow_down, step_underflow, predicate, saturated };

struct TraceOptions {
    Tolerances tol;
    std::vector<double> grid;  // ascending output times; those inside the traversed span are emitted
    std::function<bool(const LogState&)> stop_when;
    bool saturate = false;  // forward quasi-static tail once the gradient term dominates
};

struct TraceResult {
    Stop stop = Stop::reached;
    LogState last;
    std::vector<LogState> out;  // in traversal order
    // set when stop == saturated: limit of l as t -> infinity
    double l_limit = std::numeric_limits<double>::quiet_NaN();
};

double forcing(const Parameters& p, double t, double l);
double y_prime(const Parameters& p, double t, double l, double Y);

TraceResult trace(const Parameters& p, LogState start, double t1, const TraceOptions& opt);

std::vector<double> uniform_grid(double t0, double t1, double dt);

Sample to_sample(const LogState& s);

}  // namespace sel::detail
