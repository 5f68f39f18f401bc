#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json_io.hpp"
#include "sel/errors.hpp"
#include "sel/harness.hpp"

namespace sel::harness {

namespace {

namespace fs = std::filesystem;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  ok\n"
    "  1  a barrier certificate or kelvin check failed\n"
    "  2  bad input (invalid parameters, missing flag, malformed file, unwritable output)\n"
    "  3  regime violation (no solutions, family unavailable, hypothesis violated)\n"
    "  4  numerical failure (integration, bracketing, derivative cross-check)\n"
    "Environment: SEL_LOG=quiet|info|debug sets stderr verbosity (default quiet).";

struct Log {
    int level = 0;
    std::ostream* err = nullptr;
    void info(const std::string& m) const {
        if (level >= 1) *err << "[sel] " << m << '\n';
    }
    void debug(const std::string& m) const {
        if (level >= 2) *err << "[sel:debug] " << m << '\n';
    }
};

int log_level_from_env() {
    const char* v = std::getenv("SEL_LOG");
    if (!v) return 0;
    const std::string s(v);
    if (s == "info" || s == "1") return 1;
    if (s == "debug" || s == "2") return 2;
    return 0;
}

struct Context {
    RunConfig cfg;
    std::ostream& out;
    Log log;
};

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("output directory not writable: cannot open '" + path.string() + "'");
    f << text;
    if (!f) throw InvalidInput("write failed: '" + path.string() + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(what + ": " + e.what());
    }
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

std::string describe(const ProfileSpec& s) {
    std::string t = to_string(s.label) + ": ";
    if (s.kind == CoefficientKind::known) t += fmt(s.coefficient) + " ";
    else if (s.kind == CoefficientKind::free_positive) t += "C ";
    t += "r^" + fmt(s.exponent);
    if (s.log_power != 0.0) t += " |log r|^" + fmt(s.log_power);
    return t;
}

void print_classification(const ClassificationReport& r, std::ostream& os) {
    const Parameters& p = r.params;
    auto row = [&](const std::string& k, const std::string& v) { os << std::left << std::setw(14) << k << v << '\n'; };
    row("parameters", "dim=" + std::to_string(p.dim) + " q=" + fmt(p.q) + " tau=" + fmt(p.tau) + " lambda=" +
                          fmt(p.lambda) + " rho=" + fmt(p.rho) + " theta=" + fmt(p.theta));
    row("beta", fmt(r.derived.beta, 12));
    std::string tag = to_string(r.tag.tag);
    if (r.tag.rho_equals_upsilon) tag += " (rho = Upsilon)";
    if (r.tag.outside_taxonomy) tag += " (outside the three-case split)";
    row("case", tag);
    if (r.derived.upsilon) row("Upsilon", fmt(*r.derived.upsilon, 12));
    std::string roots = "none";
    if (r.roots.varpi1) {
        roots = "varpi1=" + fmt(*r.roots.varpi1, 12);
        if (r.roots.varpi2) roots += " varpi2=" + fmt(*r.roots.varpi2, 12);
        roots += " (" + to_string(r.roots.multiplicity) + ")";
    }
    row("roots", roots);
    row("f(beta)", fmt(r.derived.f_at_beta, 12));
    std::string ex = r.exists ? "exists" : "no positive solutions";
    ex += " [" + r.existence_reason + "]";
    if (r.derived.lambda_coeff) ex += " Lambda=" + fmt(*r.derived.lambda_coeff, 12);
    row("existence", ex);
    for (const auto& s : r.near_zero) row("near zero", describe(s));
    if (r.global) {
        for (const auto& f : r.global->families)
            row(r.global->mirrored ? "family (K)" : "family",
                f.name + "  zero " + describe(f.near_zero) + "  inf " + describe(f.near_infinity));
    }
}

std::string family_row(const ClassificationReport& r) {
    std::string s = "case " + to_string(r.tag.tag) + ", beta=" + fmt(r.derived.beta) + ": available families";
    if (!r.global) return s + " none (" + r.existence_reason + ")";
    for (const auto& f : r.global->families)
        s += "\n  " + f.name + "  zero " + describe(f.near_zero) + "  inf " + describe(f.near_infinity);
    return s;
}

std::string native_family(const std::string& mirrored) {
    if (mirrored == "u_c_0") return "u_inf_c";
    if (mirrored == "u_b_inf") return "u_b";
    if (mirrored == "u_c_0_b") return "u_b_inf_c";
    return mirrored;
}

int cmd_classify(Context& c) {
    const ClassificationReport r = classify_report(single_parameters(c.cfg));
    print_classification(r, c.out);
    write_file(c.cfg.out, "classify.json", dump(to_json(r)));
    return kExitOk;
}

int cmd_roots(Context& c) {
    const ClassificationReport r = classify_report(single_parameters(c.cfg), "roots");
    c.out << "case " << to_string(r.tag.tag) << '\n';
    c.out << "multiplicity " << to_string(r.roots.multiplicity) << '\n';
    if (r.roots.varpi1) c.out << "varpi1 " << format_double(*r.roots.varpi1) << '\n';
    if (r.roots.varpi2) c.out << "varpi2 " << format_double(*r.roots.varpi2) << '\n';
    write_file(c.cfg.out, "roots.json", dump(to_json(r)));
    return kExitOk;
}

int cmd_solve(Context& c) {
    const Parameters p = single_parameters(c.cfg);
    if (!c.cfg.family) throw InvalidInput("solve needs --family");
    const std::string family = *c.cfg.family;
    ClassificationReport r = classify_report(p, "solve");
    if (!r.global) throw NoSolutions("no positive solutions: " + r.existence_reason + "\n" + family_row(r));
    const bool listed = std::any_of(r.global->families.begin(), r.global->families.end(),
                                    [&](const FamilyProfiles& f) { return f.name == family; });
    if (!listed) throw FamilyUnavailable("family " + family + " is not available here; " + family_row(r));

    RadialSolution sol;
    if (family == "U") {
        sol = construct_exact_U(p);
    } else {
        ShootingSpec spec;
        spec.family = shoot_family_from_string(native_family(family));
        spec.target = c.cfg.target;
        spec.target_c = c.cfg.target_c;
        if (r.global->mirrored) {
            c.log.info("theta > -2: shooting the Kelvin image");
            sol = kelvin_solution(shoot(kelvin(p), spec));
            sol.params = p;
        } else {
            sol = shoot(p, spec);
        }
    }
    c.log.debug("samples " + std::to_string(sol.samples.size()));

    SolveSummary s;
    s.family = family;
    s.mirrored = r.global->mirrored;
    s.status = to_string(sol.status);
    s.csv = "solve_" + family + ".csv";
    s.provenance = sol.provenance.values;
    s.max_residual = max_relative_residual(sol);
    s.apriori_bound = apriori_bound_holds(sol);
    s.fits = fit_ends(sol.samples, &*r.global, family);
    r.solves.push_back(s);

    write_file(c.cfg.out, s.csv, to_csv(sol));
    write_file(c.cfg.out, "solve_" + family + ".json", dump(to_json(r)));

    c.out << "family " << family << (s.mirrored ? " (Kelvin image)" : "") << "  status " << s.status << '\n';
    c.out << "max relative residual " << fmt(s.max_residual, 3) << "  a-priori bound "
          << (s.apriori_bound ? "holds" : "violated") << '\n';
    for (const auto& f : s.fits) {
        c.out << to_string(f.end) << " end: fitted r^" << fmt(f.fit.exponent_hat, 6);
        if (f.predicted)
            c.out << "  predicted " << describe(*f.predicted) << "  " << (f.matched ? "MATCH" : "MISMATCH");
        c.out << '\n';
    }
    return kExitOk;
}

int cmd_verify_barriers(Context& c) {
    const Parameters p = single_parameters(c.cfg);
    ClassificationReport r = classify_report(p, "verify-barriers");
    const bool subset = !c.cfg.barriers.empty();
    std::vector<Family> families;
    if (subset) {
        for (const auto& b : c.cfg.barriers) {
            try {
                families.push_back(family_from_string(b));
            } catch (const std::exception&) {
                throw InvalidInput("unknown barrier family '" + b + "'");
            }
        }
    } else {
        families = all_families();
    }

    GridOptions opt;
    opt.points = c.cfg.grid;
    opt.seed = c.cfg.seed;
    bool any_fail = false;
    for (Family f : families) {
        CertificateEntry e;
        e.family = to_string(f);
        try {
            const Certification cert = certify(p, f, {}, opt);
            e.status = cert.certificate.pass ? "pass" : "fail";
            e.attempts = cert.attempts;
            e.certificate = cert.certificate;
            any_fail = any_fail || !cert.certificate.pass;
        } catch (const HypothesisViolation& h) {
            if (subset) throw;
            e.status = "skipped";
            e.reason = h.constraint();
        }
        c.out << std::left << std::setw(10) << e.family << ' ' << e.status;
        if (!e.reason.empty()) c.out << "  (" << e.reason << ')';
        if (e.certificate && !e.certificate->pass)
            c.out << "  " << e.certificate->violations.size() << " violations";
        c.out << '\n';
        r.certificates.push_back(e);
    }
    write_file(c.cfg.out, "barriers.json", dump(to_json(r)));
    return any_fail ? kExitCheckFailed : kExitOk;
}

double max_rel_diff(const RadialSolution& a, const RadialSolution& b) {
    double worst = 0.0;
    for (const auto& s : a.samples) {
        if (s.r < b.r_min() || s.r > b.r_max()) continue;
        worst = std::max(worst, std::abs(b.value(s.r) / s.u - 1.0));
    }
    return worst;
}

int cmd_kelvin_check(Context& c) {
    const Parameters p = single_parameters(c.cfg);
    ClassificationReport r = classify_report(p, "kelvin-check");
    const Parameters k = kelvin(p);
    const Parameters kk = kelvin(k);
    auto add = [&](std::string name, double value, double tol) {
        r.kelvin_checks.push_back({std::move(name), value <= tol, value, tol});
    };
    const bool same = kk.dim == p.dim && kk.q == p.q && kk.tau == p.tau && kk.lambda == p.lambda &&
                      kk.rho == p.rho && kk.theta == p.theta;
    add("involution", same ? 0.0 : 1.0, 0.0);
    add("beta_sign", std::abs(beta_of(k) + beta_of(p)), 1e-12 * (1.0 + std::abs(beta_of(p))));
    const double f0 = eval_f(p, beta_of(p));
    add("f_invariance", std::abs(eval_f(k, beta_of(k)) - f0), 1e-12 * (1.0 + std::abs(f0)));

    if (r.derived.lambda_coeff) {
        add("exact_U_duality", max_rel_diff(kelvin_solution(construct_exact_U(p)), construct_exact_U(k)), 1e-10);

        // duality of solutions on whichever side has theta < -2
        const Parameters base = p.theta < -2.0 ? p : k;
        const GlobalClassification g = predict_global(base);
        const bool has = std::any_of(g.families.begin(), g.families.end(),
                                     [](const FamilyProfiles& f) { return f.name == "u_inf_c"; });
        if (has) {
            ShootingSpec spec;
            spec.target = 1.0;
            const RadialSolution img = kelvin_solution(shoot(base, spec));
            const GlobalClassification gk = predict_global(kelvin(base));
            const auto fits = fit_ends(img.samples, &gk, "u_c_0");
            double worst = 0.0;
            bool ok = !fits.empty();
            for (const auto& f : fits) {
                ok = ok && f.matched;
                worst = std::max(worst, std::abs(f.d_exponent));
            }
            r.kelvin_checks.push_back({"solution_duality", ok, worst, MatchTolerance{}.exponent_rel});
        }
    }
    bool all = true;
    for (const auto& ch : r.kelvin_checks) {
        c.out << (ch.pass ? "PASS " : "FAIL ") << std::left << std::setw(18) << ch.name << " " << fmt(ch.value, 3)
              << " (tol " << fmt(ch.tolerance, 3) << ")\n";
        all = all && ch.pass;
    }
    write_file(c.cfg.out, "kelvin.json", dump(to_json(r)));
    return all ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(Context& c) {
    const std::vector<SweepCell> cells = run_sweep(c.cfg);
    std::map<std::string, int> counts;
    int existing = 0;
    for (const auto& cell : cells) {
        ++counts[cell.tag];
        existing += cell.exists ? 1 : 0;
    }
    write_file(c.cfg.out, "sweep.csv", sweep_csv(cells));
    json side = json::object();
    side["schema"] = kSweepSchema;
    side["tool_version"] = kToolVersion;
    side["config"] = to_json(c.cfg);
    side["csv"] = "sweep.csv";
    side["cells"] = cells.size();
    side["exists"] = existing;
    json cj = json::object();
    for (const auto& [k, v] : counts) cj[k] = v;
    side["case_counts"] = cj;
    write_file(c.cfg.out, "sweep.json", dump(side));
    c.out << cells.size() << " cells, " << existing << " with positive solutions\n";
    for (const auto& [k, v] : counts) c.out << "  " << k << ' ' << v << '\n';
    return kExitOk;
}

int cmd_fit(Context& c) {
    if (!c.cfg.input) throw InvalidInput("fit needs --input <solution.csv>");
    const Parameters p = single_parameters(c.cfg);
    ClassificationReport r = classify_report(p, "fit");
    const std::vector<Sample> samples = samples_from_csv(read_file(*c.cfg.input));
    if (samples.empty()) throw InvalidInput("no samples in '" + *c.cfg.input + "'");
    r.fits = fit_ends(samples, r.global ? &*r.global : nullptr, c.cfg.family.value_or(""));
    if (r.fits.empty()) throw InvalidInput("the samples do not reach either fit window");
    for (const auto& f : r.fits) {
        c.out << to_string(f.end) << " end: exponent " << format_double(f.fit.exponent_hat) << " coefficient "
              << format_double(f.fit.coeff_hat);
        if (f.predicted) c.out << "  predicted " << describe(*f.predicted) << "  " << (f.matched ? "MATCH" : "MISMATCH");
        c.out << '\n';
    }
    write_file(c.cfg.out, "fit.json", dump(to_json(r)));
    return kExitOk;
}

int cmd_report(Context& c) {
    if (!c.cfg.input) throw InvalidInput("report needs --input <directory>");
    const fs::path dir(*c.cfg.input);
    if (!fs::is_directory(dir)) throw InvalidInput("not a directory: '" + dir.string() + "'");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "bundle.json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::optional<ClassificationReport> bundle;
    json params;
    for (const auto& f : files) {
        const json j = parse_json(read_file(f.string()), f.string());
        if (!j.is_object() || !j.contains("schema") || j["schema"] != kReportSchema) {
            c.log.info("skipping " + f.filename().string() + " (not a " + kReportSchema + " artifact)");
            continue;
        }
        ClassificationReport r;
        try {
            r = report_from_json(j);
        } catch (const InvalidInput& e) {
            throw InvalidInput(f.filename().string() + ": " + e.what());
        }
        if (!bundle) {
            bundle = classify_report(r.params, "bundle");
            params = j["parameters"];
        } else if (j["parameters"] != params) {
            throw InvalidInput(f.filename().string() + ": parameters differ from the first artifact");
        }
        for (auto& s : r.solves) bundle->solves.push_back(s);
        for (auto& x : r.fits) bundle->fits.push_back(x);
        for (auto& x : r.certificates) bundle->certificates.push_back(x);
        for (auto& x : r.kelvin_checks) bundle->kelvin_checks.push_back(x);
        c.log.debug("merged " + f.filename().string());
    }
    if (!bundle) throw InvalidInput("no " + std::string(kReportSchema) + " artifacts in '" + dir.string() + "'");
    const std::string out_dir = c.cfg.out == "." ? dir.string() : c.cfg.out;
    write_file(out_dir, "bundle.json", dump(to_json(*bundle)));
    c.out << "bundle: " << bundle->solves.size() << " solves, " << bundle->fits.size() << " fits, "
          << bundle->certificates.size() << " certificates, " << bundle->kelvin_checks.size() << " kelvin checks\n";
    return kExitOk;
}

struct FlagValues {
    std::map<std::string, std::string> params;
    std::optional<std::string> family, target, target_c, out, grid, seed, config, axes, input, threads;
    std::vector<std::string> barriers;
};

void add_flags(CLI::App* sub, FlagValues& v) {
    for (const char* k : {"dim", "q", "tau", "lambda", "rho", "theta", "beta"}) {
        const std::string key = k;
        sub->add_option_function<std::string>(
            "--" + key, [&v, key](const std::string& s) { v.params[key] = s; },
            key == "beta" ? "sets theta = beta (q-1) - 2" : "value or linspace:a:b:n | logspace:a:b:n | random:a:b:n")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    auto opt = [&](const char* name, std::optional<std::string>& dst, const char* help) {
        sub->add_option_function<std::string>(name, [&dst](const std::string& s) { dst = s; }, help)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };
    opt("--family", v.family, "solution family (U, u_inf_c, u_b, u_b_inf_c; u_c_0, u_b_inf, u_c_0_b when theta > -2)");
    opt("--target", v.target, "c for u_inf_c, b for u_b and u_b_inf_c");
    opt("--target-c", v.target_c, "c for u_b_inf_c");
    opt("--out", v.out, "output directory (default .)");
    opt("--grid", v.grid, "barrier grid points (default 10000)");
    opt("--seed", v.seed, "seed for randomized grids");
    opt("--config", v.config, "JSON config; flags override it");
    opt("--axes", v.axes, "sweep axes: rho,lambda or beta,rho");
    opt("--input", v.input, "fit: solution CSV; report: artifact directory");
    opt("--threads", v.threads, "sweep worker threads (default: hardware)");
    sub->add_option("--barrier", v.barriers, "barrier family to verify (repeatable)");
}

RunConfig build_config(const FlagValues& v) {
    RunConfig c;
    if (v.config) c = config_from_json(parse_json(read_file(*v.config), *v.config));
    for (const auto& [k, s] : v.params) c.params[k] = parse_range(s);
    auto num = [](const std::string& s, const char* what) {
        const Range r = parse_range(s);
        if (r.kind != Range::Kind::value) throw InvalidInput(std::string(what) + " must be a number");
        return r.a;
    };
    auto integer = [&](const std::string& s, const char* what) {
        const double x = num(s, what);
        if (x != std::floor(x)) throw InvalidInput(std::string(what) + " must be an integer");
        return x;
    };
    if (v.family) c.family = *v.family;
    if (v.target) c.target = num(*v.target, "--target");
    if (v.target_c) c.target_c = num(*v.target_c, "--target-c");
    if (v.out) c.out = *v.out;
    if (v.grid) c.grid = static_cast<int>(integer(*v.grid, "--grid"));
    if (v.seed) {
        const double s = integer(*v.seed, "--seed");
        if (s < 0) throw InvalidInput("--seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (v.axes) c.axes = *v.axes;
    if (v.input) c.input = *v.input;
    if (v.threads) c.threads = static_cast<int>(integer(*v.threads, "--threads"));
    if (!v.barriers.empty()) c.barriers = v.barriers;
    if (c.grid < 2) throw InvalidInput("--grid must be >= 2");
    return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classification laboratory for r^theta u^q singular elliptic equations", "sel"};
    app.footer(kExitCodes);
    app.require_subcommand(1);
    FlagValues flags;
    using Cmd = int (*)(Context&);
    const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
        {"classify", "case taxonomy, roots, existence and predicted profiles", cmd_classify},
        {"roots", "negative roots of the indicator function", cmd_roots},
        {"solve", "construct one solution family; CSV plus JSON sidecar", cmd_solve},
        {"verify-barriers", "sign certificates for the barrier catalog", cmd_verify_barriers},
        {"kelvin-check", "Kelvin involution, f invariance and solution duality", cmd_kelvin_check},
        {"sweep", "long-form CSV over a (rho, lambda) or (beta, rho) grid", cmd_sweep},
        {"fit", "fit a solution CSV at both ends against predictions", cmd_fit},
        {"report", "merge report artifacts in a directory into bundle.json", cmd_report},
    };
    std::map<CLI::App*, Cmd> handlers;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->footer(kExitCodes);
        add_flags(sub, flags);
        handlers[sub] = fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        // subcommand help lands here too
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
            out << sub->help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n";
        CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitBadInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    Log log{log_level_from_env(), &err};
    try {
        Context ctx{build_config(flags), out, log};
        log.debug("config " + dump(to_json(ctx.cfg)));
        return handlers.at(sub)(ctx);
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n\n" << sub->help();
        return kExitBadInput;
    } catch (const RegimeError& e) {
        err << "regime: " << e.what() << '\n';
        return kExitRegime;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

}  // namespace sel::harness
