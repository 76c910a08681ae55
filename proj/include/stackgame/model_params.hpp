#pragma once

#include <stackgame/errors.hpp>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stackgame {

struct FinancialMarket {
    double r0 = 0.05;
    double r = 0.1;
    double sigma = 0.4;
    double beta = 1.0;
    double s0 = 1.0;
    double T = 10.0;
};

/// Poisson-level inputs. lambda_own_i excludes the common shock intensity.
struct RawClaims {
    double lambda_own1 = 0, lambda_own2 = 0, lambda_common = 0;
    double mu1 = 0, mu2 = 0;
    double second_moment1 = 0, second_moment2 = 0;
};

struct ClaimModel {
    double a1 = 4, a2 = 4;
    double sigma1 = 3, sigma2 = 2;
    double theta1 = 1.2, theta2 = 1.0;
    double rho = 0.3;
    double theta_bar = 2.0;

    /// a_i = lambda_i mu_i, sigma_i^2 = lambda_i E[Y_i^2], lambda_i = own + common.
    static ClaimModel from_raw(const RawClaims& raw, double theta1, double theta2, double theta_bar);

    double a(int i) const { return i == 1 ? a1 : a2; }
    double sig(int i) const { return i == 1 ? sigma1 : sigma2; }
    double theta(int i) const { return i == 1 ? theta1 : theta2; }
};

struct DelaySpec {
    double h = 0, alpha = 0, eta = 0;

    /// The memoryless triple (0, 0, 0).
    static DelaySpec none() { return {}; }
    bool is_none() const { return h == 0 && alpha == 0 && eta == 0; }
};

struct DerivedDelayCoeffs {
    double A = 0, B = 0, C = 0;
};

struct Preferences {
    double gamma_L = 0.1, gamma1 = 2, gamma2 = 3;
    double k1 = 0.4, k2 = 0.3;

    double gamma(int i) const { return i == 1 ? gamma1 : gamma2; }
    double k(int i) const { return i == 1 ? k1 : k2; }
};

struct ScenarioConfig {
    FinancialMarket market;
    ClaimModel claims;
    Preferences prefs;
    DelaySpec delay_L, delay_1, delay_2;
    double x_L0 = 10, x_10 = 5, x_20 = 5;
    /// When false, validate() derives delay_2.eta from insurer 1.
    bool eta2_supplied = false;

    const DelaySpec& delay(int i) const { return i == 1 ? delay_1 : delay_2; }
    double x0(int i) const { return i == 1 ? x_10 : x_20; }

    /// Same scenario with every delay switched off.
    ScenarioConfig without_delay() const;
};

/// Tables 6-8 of the reference study, eta2 left to derivation.
ScenarioConfig paper_default();

struct Violation {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

DerivedDelayCoeffs derive_delay_coefficients(const DelaySpec& spec, double r0);

/// A + eta for a delay spec, i.e. the exponent rate of the wealth kernel.
double kernel_rate(const DelaySpec& spec, double r0);

/// eta_j that equalises A_j + eta_j with the anchor's A_i + eta_i.
/// Throws EtaOutOfRange when the result is outside (0, 1).
double derive_partner_eta(const DelaySpec& anchor, double h_partner, double alpha_partner, double r0);

inline double derive_eta2(const DelaySpec& delay1, double h2, double alpha2, double r0) {
    return derive_partner_eta(delay1, h2, alpha2, r0);
}

/// (c_F, c_bar). Throws DegenerateBand when c_F >= c_bar.
std::pair<double, double> premium_bounds(const ClaimModel& claims);

/// Re-derives the partner's eta from insurer `anchor` and marks both as supplied.
ScenarioConfig anchor_insurer(ScenarioConfig cfg, int anchor);

/// Validated scenario plus everything derived from it.
class CheckedScenario {
public:
    const ScenarioConfig& config() const { return cfg_; }
    const FinancialMarket& market() const { return cfg_.market; }
    const ClaimModel& claims() const { return cfg_.claims; }
    const Preferences& prefs() const { return cfg_.prefs; }

    const DerivedDelayCoeffs& coeffs_L() const { return coeffs_L_; }
    const DerivedDelayCoeffs& coeffs(int i) const { return i == 1 ? coeffs_1_ : coeffs_2_; }

    /// A_L + eta_L and A_i + eta_i.
    double rate_L() const { return rate_L_; }
    double rate_F(int i) const { return i == 1 ? rate_1_ : rate_2_; }

    double c_F() const { return c_F_; }
    double c_bar() const { return c_bar_; }

private:
    friend CheckedScenario validate(const ScenarioConfig& cfg);
    CheckedScenario() = default;

    ScenarioConfig cfg_;
    DerivedDelayCoeffs coeffs_L_, coeffs_1_, coeffs_2_;
    double rate_L_ = 0, rate_1_ = 0, rate_2_ = 0;
    double c_F_ = 0, c_bar_ = 0;
};

/// Collects every violated condition without throwing.
ValidationReport check(const ScenarioConfig& cfg);

/// Throws ValidationError carrying the full report.
CheckedScenario validate(const ScenarioConfig& cfg);

/// Named scalar inside a scenario, e.g. "prefs.gamma_L" or "delay_1.h".
double& param_ref(ScenarioConfig& cfg, std::string_view path);
double param_value(const ScenarioConfig& cfg, std::string_view path);
std::vector<std::string> param_paths();

}  // namespace stackgame
