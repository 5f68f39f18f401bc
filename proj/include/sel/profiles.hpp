#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sel/taxonomy.hpp"

namespace sel {

enum class End { zero, infinity };
enum class CoefficientKind { known, free_positive, none };
enum class ProfileLabel { U, PowerW1, PhiW2, PsiW1, Constant, Log, Z1Rate, Z2Rate };

/// u ~ C r^e |log r|^lp at the given end.
struct ProfileSpec {
    End end = End::zero;
    double exponent = 0.0;
    double log_power = 0.0;
    CoefficientKind kind = CoefficientKind::free_positive;
    double coefficient = 0.0;  // meaningful when kind == known
    ProfileLabel label = ProfileLabel::U;
};

struct ZGammaConstants {
    double p = 0.0;
    double gamma = 0.0;
};

struct FamilyProfiles {
    std::string name;  // U, u_inf_c, u_b, u_b_inf_c (mirrored: u_c_0, u_b_inf, u_c_0_b)
    ProfileSpec near_zero;
    ProfileSpec near_infinity;
};

struct GlobalClassification {
    bool mirrored = false;  // theta > -2, obtained through the Kelvin image
    std::vector<FamilyProfiles> families;
};

enum class FitModel { power, power_log };

struct FittedAsymptotics {
    double exponent_hat = 0.0;
    double log_power_hat = 0.0;
    double coeff_hat = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    double rms_residual = 0.0;
    End end = End::zero;
    FitModel model = FitModel::power;
};

struct MatchTolerance {
    double exponent_rel = 0.05;          // |de| <= exponent_rel (1 + |e|)
    std::optional<double> exponent_abs;  // overrides exponent_rel when set
    double log_power = 0.2;
};

struct MatchReport {
    bool matched = false;
    int index = -1;
    ProfileLabel label = ProfileLabel::U;
    double d_exponent = 0.0;
    double d_log_power = 0.0;
};

inline constexpr double kBoundaryRelTol = 1e-9;
inline constexpr std::pair<double, double> kZeroWindow{1e-8, 1e-5};
inline constexpr std::pair<double, double> kInfinityWindow{1e5, 1e8};

/// |a - b| <= 1e-9 (1 + |b|)
bool near_equal(double a, double b);

/// Near-zero profiles for the case; requires theta < -2.
std::vector<ProfileSpec> predict_near_zero(const Parameters& p);
/// Global solution set, Kelvin-mirrored for theta > -2. Throws NoSolutions when f(beta) <= 0.
GlobalClassification predict_global(const Parameters& p);
/// Requires beta = varpi1 unless check_beta is false.
ZGammaConstants zgamma(const Parameters& p, bool check_beta = true);

/// C r^e |log r|^lp; C is the known coefficient or `coefficient` for free ones.
double eval_profile(const ProfileSpec& spec, double r, std::optional<double> coefficient = {});

FittedAsymptotics fit_profile(const std::vector<std::pair<double, double>>& samples, End end,
                              FitModel model);
MatchReport match_profile(const FittedAsymptotics& fit, const std::vector<ProfileSpec>& specs,
                          const MatchTolerance& tol = {});

/// Profile seen from the other end after r -> 1/r.
ProfileSpec mirror(const ProfileSpec& s);

std::string to_string(End e);
std::string to_string(ProfileLabel l);
std::string to_string(CoefficientKind k);
std::string to_string(FitModel m);
End end_from_string(const std::string& s);
ProfileLabel label_from_string(const std::string& s);
FitModel fit_model_from_string(const std::string& s);

}  // namespace sel
