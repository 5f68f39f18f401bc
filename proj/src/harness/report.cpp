#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>

#include "json_io.hpp"
#include "sel/errors.hpp"
#include "sel/harness.hpp"

namespace sel::harness {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double as_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
        if (s == "nan") return std::nan("");
    }
    throw InvalidInput(path + ": expected a number");
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw InvalidInput(path + ": expected an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw InvalidInput(path + ": expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw InvalidInput(path + ": expected a string");
    return j.get<std::string>();
}

namespace {

void dump_to(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += inner + json(k).dump() + ": ";
                dump_to(v, out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                dump_to(j[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

std::string timestamp_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Multiplicity multiplicity_from_string(const std::string& s) {
    for (auto m : {Multiplicity::none, Multiplicity::one, Multiplicity::two, Multiplicity::double_root})
        if (to_string(m) == s) return m;
    throw InvalidInput("unknown multiplicity '" + s + "'");
}

CoefficientKind coefficient_kind_from_string(const std::string& s) {
    for (auto k : {CoefficientKind::known, CoefficientKind::free_positive, CoefficientKind::none})
        if (to_string(k) == s) return k;
    throw InvalidInput("unknown coefficient kind '" + s + "'");
}

json opt_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

json params_json(const Parameters& p) {
    return {{"dim", p.dim}, {"q", number(p.q)}, {"tau", number(p.tau)}, {"lambda", number(p.lambda)},
            {"rho", number(p.rho)}, {"theta", number(p.theta)}};
}

Parameters params_from(const json& j, const std::string& path) {
    Reader r(j, path);
    Parameters p;
    p.dim = r.integer("dim");
    p.q = r.num("q");
    p.tau = r.num("tau");
    p.lambda = r.num("lambda");
    p.rho = r.num("rho");
    p.theta = r.num("theta");
    r.finish();
    return p;
}

json profile_json(const ProfileSpec& s) {
    return {{"end", to_string(s.end)},           {"exponent", number(s.exponent)},
            {"log_power", number(s.log_power)},  {"kind", to_string(s.kind)},
            {"coefficient", number(s.coefficient)}, {"label", to_string(s.label)}};
}

ProfileSpec profile_from(const json& j, const std::string& path) {
    Reader r(j, path);
    ProfileSpec s;
    s.end = end_from_string(r.str("end"));
    s.exponent = r.num("exponent");
    s.log_power = r.num("log_power");
    s.kind = coefficient_kind_from_string(r.str("kind"));
    s.coefficient = r.num("coefficient");
    s.label = label_from_string(r.str("label"));
    r.finish();
    return s;
}

json fit_json(const FitSummary& f) {
    return {{"end", to_string(f.end)},
            {"model", to_string(f.fit.model)},
            {"exponent_hat", number(f.fit.exponent_hat)},
            {"log_power_hat", number(f.fit.log_power_hat)},
            {"coeff_hat", number(f.fit.coeff_hat)},
            {"window", json::array({number(f.fit.window.first), number(f.fit.window.second)})},
            {"rms_residual", number(f.fit.rms_residual)},
            {"predicted", f.predicted ? profile_json(*f.predicted) : json(nullptr)},
            {"matched", f.matched},
            {"d_exponent", number(f.d_exponent)}};
}

FitSummary fit_from(const json& j, const std::string& path) {
    Reader r(j, path);
    FitSummary f;
    f.end = end_from_string(r.str("end"));
    f.fit.end = f.end;
    f.fit.model = fit_model_from_string(r.str("model"));
    f.fit.exponent_hat = r.num("exponent_hat");
    f.fit.log_power_hat = r.num("log_power_hat");
    f.fit.coeff_hat = r.num("coeff_hat");
    const json& w = r.req("window");
    if (!w.is_array() || w.size() != 2) throw InvalidInput(r.sub("window") + ": expected [lo, hi]");
    f.fit.window = {as_number(w[0], r.sub("window")), as_number(w[1], r.sub("window"))};
    f.fit.rms_residual = r.num("rms_residual");
    if (const json* p = r.opt("predicted")) f.predicted = profile_from(*p, r.sub("predicted"));
    f.matched = r.boolean("matched");
    f.d_exponent = r.num("d_exponent");
    r.finish();
    return f;
}

json certificate_json(const SignCertificate& c) {
    json v = json::array();
    for (const auto& [r, x] : c.violations) v.push_back(json::array({number(r), number(x)}));
    return {{"barrier_id", c.barrier_id},       {"grid_size", c.grid_size},
            {"r_min", number(c.r_min)},         {"r_max", number(c.r_max)},
            {"min_abs_residual", number(c.min_abs_residual)},
            {"violations", v},                  {"fd_max_error", number(c.fd_max_error)},
            {"pass", c.pass}};
}

SignCertificate certificate_from(const json& j, const std::string& path) {
    Reader r(j, path);
    SignCertificate c;
    c.barrier_id = r.str("barrier_id");
    c.grid_size = r.integer("grid_size");
    c.r_min = r.num("r_min");
    c.r_max = r.num("r_max");
    c.min_abs_residual = r.num("min_abs_residual");
    const json& v = r.req("violations");
    if (!v.is_array()) throw InvalidInput(r.sub("violations") + ": expected an array");
    for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2) throw InvalidInput(r.sub("violations") + ": expected [r, residual]");
        c.violations.emplace_back(as_number(e[0], r.sub("violations")), as_number(e[1], r.sub("violations")));
    }
    c.fd_max_error = r.num("fd_max_error");
    c.pass = r.boolean("pass");
    r.finish();
    return c;
}

template <class T, class F>
std::vector<T> array_from(const json& j, const std::string& path, F&& one) {
    if (!j.is_array()) throw InvalidInput(path + ": expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(one(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace

std::string dump(const json& j) {
    std::string out;
    dump_to(j, out, 0);
    out += "\n";
    return out;
}

ClassificationReport classify_report(const Parameters& p, const std::string& kind) {
    validate(p);
    ClassificationReport r;
    r.kind = kind;
    r.timestamp = timestamp_now();
    r.params = p;
    r.derived = derive(p);
    r.tag = classify(p);
    r.roots = find_negative_roots(p);
    const Existence e = existence(p);
    r.exists = e.exists;
    if (r.derived.beta == 0.0) r.existence_reason = "f_ρ(0)=0";
    else r.existence_reason = e.exists ? "f_ρ(β)>0" : "f_ρ(β)<=0";
    if (p.theta < -2.0) r.near_zero = predict_near_zero(p);
    try {
        r.global = predict_global(p);
    } catch (const RegimeError&) {
        r.global.reset();
    }
    return r;
}

json to_json(const ClassificationReport& r) {
    json j = json::object();
    j["schema"] = kReportSchema;
    j["kind"] = r.kind;
    j["tool_version"] = r.tool_version;
    j["timestamp"] = r.timestamp;
    j["parameters"] = params_json(r.params);
    j["derived"] = {{"beta", number(r.derived.beta)},
                    {"upsilon", opt_number(r.derived.upsilon)},
                    {"f_at_beta", number(r.derived.f_at_beta)},
                    {"lambda_coeff", opt_number(r.derived.lambda_coeff)},
                    {"c0", number(r.derived.c0)}};
    j["case"] = {{"tag", to_string(r.tag.tag)},
                 {"rho_equals_upsilon", r.tag.rho_equals_upsilon},
                 {"outside_taxonomy", r.tag.outside_taxonomy}};
    j["roots"] = {{"varpi1", opt_number(r.roots.varpi1)},
                  {"varpi2", opt_number(r.roots.varpi2)},
                  {"multiplicity", to_string(r.roots.multiplicity)}};
    j["existence"] = {{"exists", r.exists}, {"reason", r.existence_reason}};
    json nz = json::array();
    for (const auto& s : r.near_zero) nz.push_back(profile_json(s));
    j["near_zero"] = nz;
    if (r.global) {
        json fam = json::array();
        for (const auto& f : r.global->families)
            fam.push_back({{"name", f.name},
                           {"near_zero", profile_json(f.near_zero)},
                           {"near_infinity", profile_json(f.near_infinity)}});
        j["global"] = {{"mirrored", r.global->mirrored}, {"families", fam}};
    } else {
        j["global"] = nullptr;
    }
    json solves = json::array();
    for (const auto& s : r.solves) {
        json prov = json::object();
        for (const auto& [k, v] : s.provenance) prov[k] = number(v);
        json fits = json::array();
        for (const auto& f : s.fits) fits.push_back(fit_json(f));
        solves.push_back({{"family", s.family},
                          {"mirrored", s.mirrored},
                          {"status", s.status},
                          {"csv", s.csv},
                          {"provenance", prov},
                          {"max_residual", number(s.max_residual)},
                          {"apriori_bound", s.apriori_bound},
                          {"fits", fits}});
    }
    j["solves"] = solves;
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(fit_json(f));
    j["fits"] = fits;
    json certs = json::array();
    for (const auto& c : r.certificates)
        certs.push_back({{"family", c.family},
                         {"status", c.status},
                         {"reason", c.reason},
                         {"attempts", c.attempts},
                         {"certificate", c.certificate ? certificate_json(*c.certificate) : json(nullptr)}});
    j["certificates"] = certs;
    json checks = json::array();
    for (const auto& c : r.kelvin_checks)
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"value", number(c.value)},
                          {"tolerance", number(c.tolerance)}});
    j["kelvin_checks"] = checks;
    return j;
}

ClassificationReport report_from_json(const json& j) {
    Reader top(j, "report");
    const std::string schema = top.str("schema");
    if (schema != kReportSchema) throw InvalidInput("report: schema '" + schema + "' is not " + kReportSchema);
    ClassificationReport r;
    r.kind = top.str("kind");
    r.tool_version = top.str("tool_version");
    r.timestamp = top.str("timestamp");
    r.params = params_from(top.req("parameters"), "report.parameters");
    {
        Reader d(top.req("derived"), "report.derived");
        r.derived.beta = d.num("beta");
        r.derived.upsilon = d.opt_num("upsilon");
        r.derived.f_at_beta = d.num("f_at_beta");
        r.derived.lambda_coeff = d.opt_num("lambda_coeff");
        r.derived.c0 = d.num("c0");
        d.finish();
    }
    {
        Reader c(top.req("case"), "report.case");
        r.tag.tag = case_from_string(c.str("tag"));
        r.tag.rho_equals_upsilon = c.boolean("rho_equals_upsilon");
        r.tag.outside_taxonomy = c.boolean("outside_taxonomy");
        c.finish();
    }
    {
        Reader c(top.req("roots"), "report.roots");
        r.roots.varpi1 = c.opt_num("varpi1");
        r.roots.varpi2 = c.opt_num("varpi2");
        r.roots.multiplicity = multiplicity_from_string(c.str("multiplicity"));
        c.finish();
    }
    {
        Reader c(top.req("existence"), "report.existence");
        r.exists = c.boolean("exists");
        r.existence_reason = c.str("reason");
        c.finish();
    }
    r.near_zero = array_from<ProfileSpec>(top.req("near_zero"), "report.near_zero", profile_from);
    if (const json* g = top.opt("global")) {
        Reader gr(*g, "report.global");
        GlobalClassification gc;
        gc.mirrored = gr.boolean("mirrored");
        gc.families = array_from<FamilyProfiles>(gr.req("families"), "report.global.families",
                                                 [](const json& f, const std::string& path) {
                                                     Reader fr(f, path);
                                                     FamilyProfiles fp;
                                                     fp.name = fr.str("name");
                                                     fp.near_zero = profile_from(fr.req("near_zero"), fr.sub("near_zero"));
                                                     fp.near_infinity = profile_from(fr.req("near_infinity"), fr.sub("near_infinity"));
                                                     fr.finish();
                                                     return fp;
                                                 });
        gr.finish();
        r.global = gc;
    }
    r.solves = array_from<SolveSummary>(top.req("solves"), "report.solves", [](const json& s, const std::string& path) {
        Reader sr(s, path);
        SolveSummary out;
        out.family = sr.str("family");
        out.mirrored = sr.boolean("mirrored");
        out.status = sr.str("status");
        out.csv = sr.str("csv");
        const json& prov = sr.req("provenance");
        if (!prov.is_object()) throw InvalidInput(sr.sub("provenance") + ": expected an object");
        for (const auto& [k, v] : prov.items()) out.provenance[k] = as_number(v, sr.sub("provenance") + "." + k);
        out.max_residual = sr.num("max_residual");
        out.apriori_bound = sr.boolean("apriori_bound");
        out.fits = array_from<FitSummary>(sr.req("fits"), sr.sub("fits"), fit_from);
        sr.finish();
        return out;
    });
    r.fits = array_from<FitSummary>(top.req("fits"), "report.fits", fit_from);
    r.certificates = array_from<CertificateEntry>(top.req("certificates"), "report.certificates",
                                                  [](const json& c, const std::string& path) {
                                                      Reader cr(c, path);
                                                      CertificateEntry e;
                                                      e.family = cr.str("family");
                                                      e.status = cr.str("status");
                                                      e.reason = cr.str("reason");
                                                      e.attempts = cr.integer("attempts");
                                                      if (const json* x = cr.opt("certificate"))
                                                          e.certificate = certificate_from(*x, cr.sub("certificate"));
                                                      cr.finish();
                                                      return e;
                                                  });
    r.kelvin_checks = array_from<CheckResult>(top.req("kelvin_checks"), "report.kelvin_checks",
                                              [](const json& c, const std::string& path) {
                                                  Reader cr(c, path);
                                                  CheckResult k;
                                                  k.name = cr.str("name");
                                                  k.pass = cr.boolean("pass");
                                                  k.value = cr.num("value");
                                                  k.tolerance = cr.num("tolerance");
                                                  cr.finish();
                                                  return k;
                                              });
    top.finish();
    return r;
}

std::vector<FitSummary> fit_ends(const std::vector<Sample>& samples, const GlobalClassification* g,
                                 const std::string& family) {
    constexpr std::size_t kMinPoints = 8;
    const FamilyProfiles* fam = nullptr;
    if (g) {
        for (const auto& f : g->families)
            if (f.name == family) fam = &f;
    }
    std::vector<FitSummary> out;
    for (End end : {End::zero, End::infinity}) {
        const auto win = end == End::zero ? kZeroWindow : kInfinityWindow;
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : samples)
            if (s.r >= win.first && s.r <= win.second) pts.emplace_back(s.r, s.u);
        if (pts.size() < kMinPoints) continue;

        FitSummary f;
        f.end = end;
        if (fam) f.predicted = end == End::zero ? fam->near_zero : fam->near_infinity;
        const FitModel model = f.predicted && f.predicted->log_power != 0.0 ? FitModel::power_log : FitModel::power;
        f.fit = fit_profile(pts, end, model);
        if (f.predicted) {
            const MatchReport m = match_profile(f.fit, {*f.predicted});
            f.matched = m.matched;
            f.d_exponent = m.d_exponent;
        }
        out.push_back(f);
    }
    return out;
}

}  // namespace sel::harness
