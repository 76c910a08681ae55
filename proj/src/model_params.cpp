#include <stackgame/model_params.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stackgame {

namespace {

bool rel_equal(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max({std::abs(x), std::abs(y), 1e-300});
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// Denominator of the partner-eta formula, shared by both terms.
double eta_factor(const DelaySpec& d, double r0) {
    return r0 - 1.0 + std::exp(-d.alpha * d.h) + d.alpha;
}

}  // namespace

ClaimModel ClaimModel::from_raw(const RawClaims& raw, double theta1, double theta2, double theta_bar) {
    const double l1 = raw.lambda_own1 + raw.lambda_common;
    const double l2 = raw.lambda_own2 + raw.lambda_common;
    ClaimModel c;
    c.a1 = l1 * raw.mu1;
    c.a2 = l2 * raw.mu2;
    c.sigma1 = std::sqrt(l1 * raw.second_moment1);
    c.sigma2 = std::sqrt(l2 * raw.second_moment2);
    c.rho = raw.lambda_common * raw.mu1 * raw.mu2 / (c.sigma1 * c.sigma2);
    c.theta1 = theta1;
    c.theta2 = theta2;
    c.theta_bar = theta_bar;
    return c;
}

ScenarioConfig ScenarioConfig::without_delay() const {
    ScenarioConfig out = *this;
    out.delay_L = DelaySpec::none();
    out.delay_1 = DelaySpec::none();
    out.delay_2 = DelaySpec::none();
    out.eta2_supplied = true;
    return out;
}

ScenarioConfig paper_default() {
    ScenarioConfig cfg;
    cfg.delay_L = {2.0, 0.3, 0.05};
    cfg.delay_1 = {2.0, 0.5, 0.05};
    cfg.delay_2 = {3.0, 0.3, 0.0};
    return cfg;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.field << ": " << v.message << '\n';
    return os.str();
}

ValidationError::ValidationError(ValidationReport report)
    : Error("scenario validation failed:\n" + report.to_string()), report_(std::move(report)) {}

DerivedDelayCoeffs derive_delay_coefficients(const DelaySpec& spec, double r0) {
    const double e = std::exp(-spec.alpha * spec.h);
    DerivedDelayCoeffs c;
    c.A = (r0 - (spec.alpha + spec.eta) * spec.eta - spec.eta * e) / (1.0 + spec.eta);
    c.C = spec.eta * e;
    c.B = spec.eta * (spec.alpha + c.A + spec.eta);
    return c;
}

double kernel_rate(const DelaySpec& spec, double r0) {
    return derive_delay_coefficients(spec, r0).A + spec.eta;
}

double derive_partner_eta(const DelaySpec& anchor, double h_partner, double alpha_partner, double r0) {
    const DelaySpec partner{h_partner, alpha_partner, 0.0};
    const double fi = eta_factor(anchor, r0);
    const double fj = eta_factor(partner, r0);
    const double cross = alpha_partner - anchor.alpha + std::exp(-alpha_partner * h_partner)
                         - std::exp(-anchor.alpha * anchor.h);
    const double eta = fi * anchor.eta / (fj + cross * anchor.eta);
    if (!(eta > 0.0 && eta < 1.0)) {
        throw EtaOutOfRange(eta, "derived partner eta " + fmt(eta) + " lies outside (0, 1)");
    }
    return eta;
}

std::pair<double, double> premium_bounds(const ClaimModel& c) {
    const double c_F = std::max((1 + c.theta1) * c.a1, (1 + c.theta2) * c.a2);
    const double c_bar = (1 + c.theta_bar) * std::max(c.a1, c.a2);
    if (!(c_F < c_bar)) {
        throw DegenerateBand(c_F, c_bar, "premium band is empty: c_F=" + fmt(c_F) + " >= c_bar=" + fmt(c_bar));
    }
    return {c_F, c_bar};
}

ScenarioConfig anchor_insurer(ScenarioConfig cfg, int anchor) {
    const DelaySpec& a = cfg.delay(anchor);
    DelaySpec& p = anchor == 1 ? cfg.delay_2 : cfg.delay_1;
    p.eta = derive_partner_eta(a, p.h, p.alpha, cfg.market.r0);
    cfg.eta2_supplied = true;
    return cfg;
}

namespace {

void check_delay(const DelaySpec& d, const std::string& name, std::vector<Violation>& out) {
    if (d.is_none()) return;
    if (!(d.h > 0)) out.push_back({name + ".h", "must be > 0, got " + fmt(d.h)});
    if (!(d.alpha > 0)) out.push_back({name + ".alpha", "must be > 0, got " + fmt(d.alpha)});
    if (!(d.eta > 0 && d.eta < 1)) out.push_back({name + ".eta", "must lie in (0, 1), got " + fmt(d.eta)});
}

// Resolves the derived eta2 in place; records a violation when it cannot be produced.
void complete(ScenarioConfig& cfg, std::vector<Violation>& out) {
    if (cfg.eta2_supplied || cfg.delay_2.is_none()) return;
    if (cfg.delay_1.is_none()) {
        out.push_back({"delay_2.eta", "cannot be derived while insurer 1 has no delay"});
        return;
    }
    try {
        cfg.delay_2.eta = derive_eta2(cfg.delay_1, cfg.delay_2.h, cfg.delay_2.alpha, cfg.market.r0);
    } catch (const EtaOutOfRange& e) {
        out.push_back({"delay_2.eta", e.what()});
    }
}

ValidationReport check_completed(const ScenarioConfig& cfg, std::vector<Violation> v) {
    const auto& m = cfg.market;
    if (!(m.r0 > 0)) v.push_back({"market.r0", "must be > 0, got " + fmt(m.r0)});
    if (!(m.r > m.r0)) v.push_back({"market.r", "must exceed r0, got r=" + fmt(m.r) + " r0=" + fmt(m.r0)});
    if (!(m.sigma > 0)) v.push_back({"market.sigma", "must be > 0, got " + fmt(m.sigma)});
    if (!(m.T > 0)) v.push_back({"market.T", "must be > 0, got " + fmt(m.T)});
    if (!(m.s0 > 0)) v.push_back({"market.s0", "must be > 0, got " + fmt(m.s0)});
    if (!std::isfinite(m.beta)) v.push_back({"market.beta", "must be finite"});

    const auto& c = cfg.claims;
    if (!(c.a1 > 0)) v.push_back({"claims.a1", "must be > 0, got " + fmt(c.a1)});
    if (!(c.a2 > 0)) v.push_back({"claims.a2", "must be > 0, got " + fmt(c.a2)});
    if (!(c.sigma1 > 0)) v.push_back({"claims.sigma1", "must be > 0, got " + fmt(c.sigma1)});
    if (!(c.sigma2 > 0)) v.push_back({"claims.sigma2", "must be > 0, got " + fmt(c.sigma2)});
    if (!(c.theta1 > 0)) v.push_back({"claims.theta1", "must be > 0, got " + fmt(c.theta1)});
    if (!(c.theta2 > 0)) v.push_back({"claims.theta2", "must be > 0, got " + fmt(c.theta2)});
    if (!(c.theta_bar > std::max(c.theta1, c.theta2)))
        v.push_back({"claims.theta_bar", "must exceed max(theta1, theta2), got " + fmt(c.theta_bar)});
    if (c.rho < 0)
        v.push_back({"claims.rho", "negative correlation is unsupported, got " + fmt(c.rho)});
    else if (!(c.rho < 1))
        v.push_back({"claims.rho", "must be < 1 (rho = 1 is the single-insurer reduction), got " + fmt(c.rho)});
    if (c.a1 > 0 && c.a2 > 0 && c.theta_bar > std::max(c.theta1, c.theta2)) {
        try {
            premium_bounds(c);
        } catch (const DegenerateBand& e) {
            v.push_back({"claims", e.what()});
        }
    }

    const auto& p = cfg.prefs;
    if (!(p.gamma_L > 0)) v.push_back({"prefs.gamma_L", "must be > 0, got " + fmt(p.gamma_L)});
    if (!(p.gamma1 > 0)) v.push_back({"prefs.gamma1", "must be > 0, got " + fmt(p.gamma1)});
    if (!(p.gamma2 > 0)) v.push_back({"prefs.gamma2", "must be > 0, got " + fmt(p.gamma2)});
    if (!(p.k1 >= 0 && p.k1 <= 1)) v.push_back({"prefs.k1", "must lie in [0, 1], got " + fmt(p.k1)});
    if (!(p.k2 >= 0 && p.k2 <= 1)) v.push_back({"prefs.k2", "must lie in [0, 1], got " + fmt(p.k2)});
    if (!(p.k1 * p.k2 < 1)) v.push_back({"prefs", "k1*k2 < 1 violated, got " + fmt(p.k1 * p.k2)});
    const double kkr = p.k1 * p.k2 * c.rho * c.rho;
    if (!(kkr < 1)) v.push_back({"prefs", "k1*k2*rho^2 < 1 violated, got " + fmt(kkr)});

    check_delay(cfg.delay_L, "delay_L", v);
    check_delay(cfg.delay_1, "delay_1", v);
    check_delay(cfg.delay_2, "delay_2", v);
    if (cfg.delay_1.is_none() != cfg.delay_2.is_none())
        v.push_back({"delay", "both insurers must be delayed or both memoryless"});

    const double x1 = kernel_rate(cfg.delay_1, m.r0);
    const double x2 = kernel_rate(cfg.delay_2, m.r0);
    if (!rel_equal(x1, x2, 1e-10)) {
        v.push_back({"delay", "A1+eta1 = A2+eta2 violated: " + fmt(x1) + " vs " + fmt(x2) + " (mismatch "
                                  + fmt(x1 - x2) + ")"});
    }
    for (const auto& [name, x] : {std::pair{"x_L0", cfg.x_L0}, {"x_10", cfg.x_10}, {"x_20", cfg.x_20}}) {
        if (!std::isfinite(x)) v.push_back({name, "must be finite"});
    }
    return {std::move(v)};
}

}  // namespace

ValidationReport check(const ScenarioConfig& cfg) {
    ScenarioConfig work = cfg;
    std::vector<Violation> v;
    complete(work, v);
    return check_completed(work, std::move(v));
}

CheckedScenario validate(const ScenarioConfig& cfg) {
    ScenarioConfig work = cfg;
    std::vector<Violation> v;
    complete(work, v);
    ValidationReport report = check_completed(work, std::move(v));
    if (!report.ok()) throw ValidationError(std::move(report));

    CheckedScenario out;
    const double r0 = work.market.r0;
    out.coeffs_L_ = derive_delay_coefficients(work.delay_L, r0);
    out.coeffs_1_ = derive_delay_coefficients(work.delay_1, r0);
    out.coeffs_2_ = derive_delay_coefficients(work.delay_2, r0);
    out.rate_L_ = out.coeffs_L_.A + work.delay_L.eta;
    out.rate_1_ = out.coeffs_1_.A + work.delay_1.eta;
    out.rate_2_ = out.coeffs_2_.A + work.delay_2.eta;
    std::tie(out.c_F_, out.c_bar_) = premium_bounds(work.claims);
    work.eta2_supplied = true;
    out.cfg_ = work;
    return out;
}

namespace {

struct ParamEntry {
    const char* path;
    double& (*ref)(ScenarioConfig&);
};

#define STACKGAME_PARAM(path, expr) \
    ParamEntry { path, [](ScenarioConfig& c) -> double& { return expr; } }

const ParamEntry kParams[] = {
    STACKGAME_PARAM("market.r0", c.market.r0),
    STACKGAME_PARAM("market.r", c.market.r),
    STACKGAME_PARAM("market.sigma", c.market.sigma),
    STACKGAME_PARAM("market.beta", c.market.beta),
    STACKGAME_PARAM("market.s0", c.market.s0),
    STACKGAME_PARAM("market.T", c.market.T),
    STACKGAME_PARAM("claims.a1", c.claims.a1),
    STACKGAME_PARAM("claims.a2", c.claims.a2),
    STACKGAME_PARAM("claims.sigma1", c.claims.sigma1),
    STACKGAME_PARAM("claims.sigma2", c.claims.sigma2),
    STACKGAME_PARAM("claims.theta1", c.claims.theta1),
    STACKGAME_PARAM("claims.theta2", c.claims.theta2),
    STACKGAME_PARAM("claims.rho", c.claims.rho),
    STACKGAME_PARAM("claims.theta_bar", c.claims.theta_bar),
    STACKGAME_PARAM("prefs.gamma_L", c.prefs.gamma_L),
    STACKGAME_PARAM("prefs.gamma1", c.prefs.gamma1),
    STACKGAME_PARAM("prefs.gamma2", c.prefs.gamma2),
    STACKGAME_PARAM("prefs.k1", c.prefs.k1),
    STACKGAME_PARAM("prefs.k2", c.prefs.k2),
    STACKGAME_PARAM("delay_L.h", c.delay_L.h),
    STACKGAME_PARAM("delay_L.alpha", c.delay_L.alpha),
    STACKGAME_PARAM("delay_L.eta", c.delay_L.eta),
    STACKGAME_PARAM("delay_1.h", c.delay_1.h),
    STACKGAME_PARAM("delay_1.alpha", c.delay_1.alpha),
    STACKGAME_PARAM("delay_1.eta", c.delay_1.eta),
    STACKGAME_PARAM("delay_2.h", c.delay_2.h),
    STACKGAME_PARAM("delay_2.alpha", c.delay_2.alpha),
    STACKGAME_PARAM("delay_2.eta", c.delay_2.eta),
    STACKGAME_PARAM("x_L0", c.x_L0),
    STACKGAME_PARAM("x_10", c.x_10),
    STACKGAME_PARAM("x_20", c.x_20),
};

#undef STACKGAME_PARAM

}  // namespace

double& param_ref(ScenarioConfig& cfg, std::string_view path) {
    for (const auto& e : kParams) {
        if (path == e.path) return e.ref(cfg);
    }
    throw Error("unknown parameter path '" + std::string(path) + "'");
}

double param_value(const ScenarioConfig& cfg, std::string_view path) {
    ScenarioConfig copy = cfg;
    return param_ref(copy, path);
}

std::vector<std::string> param_paths() {
    std::vector<std::string> out;
    for (const auto& e : kParams) out.emplace_back(e.path);
    return out;
}

}  // namespace stackgame
