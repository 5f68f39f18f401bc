#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "json_io.hpp"
#include "sel/errors.hpp"
#include "sel/harness.hpp"

namespace sel::harness {

namespace {

SweepCell evaluate(const Parameters& p) {
    SweepCell c;
    c.params = p;
    if (!is_valid(p)) {
        c.tag = "invalid";
        return c;
    }
    const CaseTag t = classify(p);
    c.tag = to_string(t.tag);
    if (t.rho_equals_upsilon) c.tag += "=";
    c.outside_taxonomy = t.outside_taxonomy;
    const Roots r = find_negative_roots(p);
    c.root_count = r.multiplicity == Multiplicity::two ? 2 : (r.varpi1 ? 1 : 0);
    c.exists = existence(p).exists;
    return c;
}

}  // namespace

std::vector<SweepCell> run_sweep(const RunConfig& cfg) {
    std::string ax1, ax2;
    if (cfg.axes == "rho,lambda") ax1 = "rho", ax2 = "lambda";
    else if (cfg.axes == "beta,rho") ax1 = "beta", ax2 = "rho";
    else throw InvalidInput("axes must be rho,lambda or beta,rho");

    auto get = [&](const std::string& k) -> const Range& {
        const auto it = cfg.params.find(k);
        if (it == cfg.params.end()) throw InvalidInput("sweep: missing --" + k);
        return it->second;
    };
    // each randomized axis gets its own stream
    const std::vector<double> xs = expand(get(ax1), cfg.seed);
    const std::vector<double> ys = expand(get(ax2), cfg.seed + 1);

    RunConfig fixed = cfg;
    fixed.params.erase(ax1);
    fixed.params.erase(ax2);
    auto scalar = [&](const std::string& k) {
        const Range& r = get(k);
        if (r.kind != Range::Kind::value) throw InvalidInput("sweep: --" + k + " must be a single value");
        return r.a;
    };
    Parameters base;
    if (fixed.params.count("dim")) base.dim = static_cast<int>(scalar("dim"));
    base.q = scalar("q");
    base.tau = scalar("tau");
    if (ax2 != "lambda") base.lambda = scalar("lambda");
    if (ax1 == "rho") base.theta = scalar("theta");

    std::vector<Parameters> grid;
    grid.reserve(xs.size() * ys.size());
    for (double x : xs) {
        for (double y : ys) {
            Parameters p = base;
            if (ax1 == "rho") {
                p.rho = x;
                p.lambda = y;
            } else {
                p.rho = y;
                p.theta = x * (p.q - 1.0) - 2.0;
            }
            grid.push_back(p);
        }
    }

    std::vector<SweepCell> cells(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) cells[i] = evaluate(grid[i]);
    };
    unsigned n = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(grid.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os << "dim,q,tau,lambda,rho,theta,beta,case,outside_taxonomy,root_count,exists\n";
    for (const auto& c : cells) {
        const Parameters& p = c.params;
        os << p.dim << ',' << format_double(p.q) << ',' << format_double(p.tau) << ',' << format_double(p.lambda)
           << ',' << format_double(p.rho) << ',' << format_double(p.theta) << ',' << format_double(beta_of(p)) << ','
           << c.tag << ',' << (c.outside_taxonomy ? 1 : 0) << ',' << c.root_count << ',' << (c.exists ? 1 : 0)
           << '\n';
    }
    return os.str();
}

}  // namespace sel::harness
