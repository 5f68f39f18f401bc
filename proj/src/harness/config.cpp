#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>

#include "json_io.hpp"
#include "sel/errors.hpp"
#include "sel/harness.hpp"

namespace sel::harness {

namespace {

const std::set<std::string> kParamKeys = {"dim", "q", "tau", "lambda", "rho", "theta", "beta"};

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v))
        throw InvalidInput(what + ": not a finite number: '" + s + "'");
    return v;
}

int parse_count(const std::string& s, const std::string& what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
        throw InvalidInput(what + ": point count must be a positive integer: '" + s + "'");
    return v;
}

Range range_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return {Range::Kind::value, j.get<double>(), 0.0, 1};
    if (j.is_string()) return parse_range(j.get<std::string>());
    throw InvalidInput(path + ": expected a number or a range string");
}

}  // namespace

Range parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {Range::Kind::value, parse_double(text, "value"), 0.0, 1};

    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto c = text.find(':', start);
        parts.push_back(text.substr(start, c - start));
        if (c == std::string::npos) break;
        start = c + 1;
    }
    if (parts.size() != 4) throw InvalidInput("range must look like kind:a:b:n, got '" + text + "'");
    Range r;
    if (parts[0] == "linspace") r.kind = Range::Kind::linspace;
    else if (parts[0] == "logspace") r.kind = Range::Kind::logspace;
    else if (parts[0] == "random") r.kind = Range::Kind::random;
    else throw InvalidInput("unknown range kind '" + parts[0] + "'");
    r.a = parse_double(parts[1], parts[0]);
    r.b = parse_double(parts[2], parts[0]);
    r.n = parse_count(parts[3], parts[0]);
    if (r.kind == Range::Kind::random && !(r.a < r.b)) throw InvalidInput("random range needs a < b");
    return r;
}

std::string to_string(const Range& r) {
    switch (r.kind) {
        case Range::Kind::value: return format_double(r.a);
        case Range::Kind::linspace: return "linspace:" + format_double(r.a) + ":" + format_double(r.b) + ":" + std::to_string(r.n);
        case Range::Kind::logspace: return "logspace:" + format_double(r.a) + ":" + format_double(r.b) + ":" + std::to_string(r.n);
        case Range::Kind::random: return "random:" + format_double(r.a) + ":" + format_double(r.b) + ":" + std::to_string(r.n);
    }
    return {};
}

std::vector<double> expand(const Range& r, std::uint64_t seed) {
    std::vector<double> v;
    switch (r.kind) {
        case Range::Kind::value:
            v.push_back(r.a);
            break;
        case Range::Kind::linspace:
        case Range::Kind::logspace:
            for (int i = 0; i < r.n; ++i) {
                const double x = r.n == 1 ? r.a : r.a + (r.b - r.a) * i / (r.n - 1);
                v.push_back(r.kind == Range::Kind::logspace ? std::pow(10.0, x) : x);
            }
            break;
        case Range::Kind::random: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> d(r.a, r.b);
            for (int i = 0; i < r.n; ++i) v.push_back(d(rng));
            std::sort(v.begin(), v.end());
            break;
        }
    }
    return v;
}

RunConfig config_from_json(const json& j) {
    Reader top(j, "config");
    RunConfig c;
    if (const json* p = top.opt("parameters")) {
        Reader pr(*p, "config.parameters");
        for (const auto& [k, v] : p->items()) {
            if (!kParamKeys.count(k)) continue;  // left for pr.finish() to report
            c.params[k] = range_from_json(pr.req(k), "config.parameters." + k);
        }
        pr.finish();
    }
    if (const json* f = top.opt("family")) c.family = as_string(*f, "config.family");
    if (const json* f = top.opt("target")) c.target = as_number(*f, "config.target");
    if (const json* f = top.opt("target_c")) c.target_c = as_number(*f, "config.target_c");
    if (const json* f = top.opt("out")) c.out = as_string(*f, "config.out");
    if (const json* f = top.opt("grid")) c.grid = as_int(*f, "config.grid");
    if (const json* f = top.opt("seed")) c.seed = static_cast<std::uint64_t>(as_int(*f, "config.seed"));
    if (const json* f = top.opt("axes")) c.axes = as_string(*f, "config.axes");
    if (const json* f = top.opt("threads")) c.threads = as_int(*f, "config.threads");
    if (const json* f = top.opt("input")) c.input = as_string(*f, "config.input");
    if (const json* f = top.opt("barriers")) {
        if (!f->is_array()) throw InvalidInput("config.barriers: expected an array");
        for (const auto& b : *f) c.barriers.push_back(as_string(b, "config.barriers[]"));
    }
    top.finish();
    if (c.grid < 2) throw InvalidInput("grid must be >= 2");
    return c;
}

json to_json(const RunConfig& c) {
    json j = json::object();
    json p = json::object();
    for (const auto& [k, r] : c.params) {
        if (r.kind == Range::Kind::value) p[k] = r.a;
        else p[k] = to_string(r);
    }
    j["parameters"] = p;
    if (c.family) j["family"] = *c.family;
    if (c.target) j["target"] = *c.target;
    if (c.target_c) j["target_c"] = *c.target_c;
    j["out"] = c.out;
    j["grid"] = c.grid;
    j["seed"] = c.seed;
    j["axes"] = c.axes;
    j["threads"] = c.threads;
    if (c.input) j["input"] = *c.input;
    if (!c.barriers.empty()) j["barriers"] = c.barriers;
    return j;
}

Parameters single_parameters(const RunConfig& c) {
    auto scalar = [&](const std::string& k) -> std::optional<double> {
        const auto it = c.params.find(k);
        if (it == c.params.end()) return std::nullopt;
        if (it->second.kind != Range::Kind::value) throw InvalidInput("--" + k + " must be a single value here");
        return it->second.a;
    };
    Parameters p;
    if (auto d = scalar("dim")) {
        if (*d != std::floor(*d)) throw InvalidInput("dim must be an integer");
        p.dim = static_cast<int>(*d);
    }
    for (const char* k : {"q", "tau", "lambda", "rho"}) {
        const auto v = scalar(k);
        if (!v) throw InvalidInput(std::string("missing --") + k);
        if (std::string(k) == "q") p.q = *v;
        if (std::string(k) == "tau") p.tau = *v;
        if (std::string(k) == "lambda") p.lambda = *v;
        if (std::string(k) == "rho") p.rho = *v;
    }
    const auto theta = scalar("theta");
    const auto beta = scalar("beta");
    if (theta && beta) throw InvalidInput("give either --theta or --beta, not both");
    if (!theta && !beta) throw InvalidInput("missing --theta");
    p.theta = theta ? *theta : *beta * (p.q - 1.0) - 2.0;
    validate(p);
    return p;
}

}  // namespace sel::harness
