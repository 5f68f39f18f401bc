#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sel/barriers.hpp"
#include "sel/profiles.hpp"
#include "sel/radial_solver.hpp"
#include "sel/taxonomy.hpp"

namespace sel::harness {

inline constexpr const char* kReportSchema = "sel-report/1";
inline constexpr const char* kSweepSchema = "sel-sweep/1";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,  // a certificate or kelvin check came out false
    kExitBadInput = 2,
    kExitRegime = 3,
    kExitNumerical = 4,
};

using json = nlohmann::ordered_json;

/// One parameter field: a single value or a 1-D grid.
struct Range {
    enum class Kind { value, linspace, logspace, random };
    Kind kind = Kind::value;
    double a = 0.0;
    double b = 0.0;
    int n = 1;
};

/// "2.5", "linspace:a:b:n", "logspace:a:b:n" (10^a..10^b), "random:a:b:n" (uniform, sorted).
Range parse_range(const std::string& text);
std::string to_string(const Range& r);
/// Random ranges draw from a generator seeded with seed, so results are reproducible.
std::vector<double> expand(const Range& r, std::uint64_t seed = 0);

struct RunConfig {
    std::map<std::string, Range> params;  // keys: dim q tau lambda rho theta beta
    std::optional<std::string> family;
    std::optional<double> target;
    std::optional<double> target_c;
    std::string out = ".";
    int grid = 10000;
    std::uint64_t seed = 0;
    std::string axes = "rho,lambda";  // sweep: rho,lambda or beta,rho
    std::vector<std::string> barriers;
    std::optional<std::string> input;  // fit: CSV file, report: directory
    int threads = 0;                   // sweep; 0 = hardware concurrency
};

/// Same keys as RunConfig. Throws InvalidInput on unknown keys or bad values.
RunConfig config_from_json(const json& j);
json to_json(const RunConfig& c);

/// Single point from scalar ranges; beta, when given, fixes theta = beta (q - 1) - 2.
/// Throws InvalidInput when a required field is missing or not a single value.
Parameters single_parameters(const RunConfig& c);

struct FitSummary {
    End end = End::zero;
    FittedAsymptotics fit;
    std::optional<ProfileSpec> predicted;
    bool matched = false;
    double d_exponent = 0.0;
};

struct SolveSummary {
    std::string family;
    bool mirrored = false;
    std::string status;
    std::string csv;  // file name relative to the report
    std::map<std::string, double> provenance;
    double max_residual = 0.0;
    bool apriori_bound = false;
    std::vector<FitSummary> fits;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  // measured discrepancy
    double tolerance = 0.0;
};

struct CertificateEntry {
    std::string family;
    std::string status;  // pass, fail, skipped
    std::string reason;  // hypothesis text when skipped
    int attempts = 0;
    std::optional<SignCertificate> certificate;
};

struct ClassificationReport {
    std::string kind;  // classify, roots, solve, verify-barriers, kelvin-check, fit, bundle
    std::string tool_version = kToolVersion;
    std::string timestamp;
    Parameters params;
    DerivedQuantities derived;
    CaseTag tag;
    Roots roots;
    bool exists = false;
    std::string existence_reason;
    std::vector<ProfileSpec> near_zero;
    std::optional<GlobalClassification> global;
    std::vector<SolveSummary> solves;
    std::vector<FitSummary> fits;
    std::vector<CertificateEntry> certificates;
    std::vector<CheckResult> kelvin_checks;
};

/// Taxonomy, roots, existence and predictions for p; optional sections left empty.
ClassificationReport classify_report(const Parameters& p, const std::string& kind = "classify");

json to_json(const ClassificationReport& r);
/// Rejects a wrong schema tag and unknown fields at every level.
ClassificationReport report_from_json(const json& j);

/// JSON text with every floating value printed to 17 significant digits.
std::string dump(const json& j);

/// Fits both ends of s on the standard windows clipped to the sampled range
/// and matches each against `family`'s predicted profile when given.
std::vector<FitSummary> fit_ends(const std::vector<Sample>& samples, const GlobalClassification* g,
                                 const std::string& family);

struct SweepCell {
    Parameters params;
    std::string tag;
    bool outside_taxonomy = false;
    int root_count = 0;
    bool exists = false;
};

/// Grid over the two axes; cells run on worker threads and come back in grid order.
std::vector<SweepCell> run_sweep(const RunConfig& c);
std::string sweep_csv(const std::vector<SweepCell>& cells);

/// Full command line: argv[0] is the program name. Output goes to out / err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sel::harness
