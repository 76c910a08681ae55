#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stackgame/model_params.hpp>
#include <stackgame/scenario_file.hpp>

#include <cmath>
#include <sstream>

using namespace stackgame;

namespace {

// Kernel rate written as (r0 + eta (1 - alpha - e^{-alpha h})) / (1 + eta).
double rate_oracle(const DelaySpec& d, double r0) {
    return (r0 + d.eta * (1 - d.alpha - std::exp(-d.alpha * d.h))) / (1 + d.eta);
}

// eta solving rate_oracle(partner) = target.
double partner_eta_oracle(double target, double h, double alpha, double r0) {
    const double d = 1 - alpha - std::exp(-alpha * h);
    return (target - r0) / (d - target);
}

bool has_field(const ValidationReport& r, const std::string& field) {
    for (const auto& v : r.violations) {
        if (v.field == field) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("delay coefficients") {
    const DelaySpec d{2.0, 0.3, 0.05};
    const double r0 = 0.05;
    const auto c = derive_delay_coefficients(d, r0);
    CHECK(c.C == doctest::Approx(0.05 * std::exp(-0.6)).epsilon(1e-15));
    CHECK(c.A + d.eta == doctest::Approx(rate_oracle(d, r0)).epsilon(1e-14));
    CHECK(c.B == doctest::Approx(d.eta * (d.alpha + c.A + d.eta)).epsilon(1e-14));
    CHECK(kernel_rate(DelaySpec::none(), r0) == r0);
}

TEST_CASE("derived eta2 equalises the insurer kernels") {
    const CheckedScenario cfg = validate(paper_default());
    const auto& c = cfg.config();
    const double eta2 = partner_eta_oracle(rate_oracle(c.delay_1, 0.05), 3.0, 0.3, 0.05);
    CHECK(c.delay_2.eta == doctest::Approx(eta2).epsilon(1e-12));
    CHECK(c.delay_2.eta == doctest::Approx(0.0163264256).epsilon(1e-8));
    CHECK(cfg.rate_F(1) == doctest::Approx(cfg.rate_F(2)).epsilon(1e-14));
}

TEST_CASE("partner eta out of range throws") {
    // A long, fast-decaying partner would need a negative weight.
    CHECK_THROWS_AS(derive_partner_eta({0.5, 0.5, 0.9}, 10.0, 0.01, 0.05), EtaOutOfRange);
}

TEST_CASE("anchoring insurer 2 re-derives eta1") {
    ScenarioConfig c = validate(paper_default()).config();
    c.delay_2.h = 2.5;
    const ScenarioConfig a = anchor_insurer(c, 2);
    CHECK(a.eta2_supplied);
    CHECK(a.delay_2.eta == c.delay_2.eta);
    CHECK(rate_oracle(a.delay_1, 0.05) == doctest::Approx(rate_oracle(a.delay_2, 0.05)).epsilon(1e-13));
}

TEST_CASE("premium band") {
    const CheckedScenario cfg = validate(paper_default());
    CHECK(cfg.c_F() == doctest::Approx(8.8));
    CHECK(cfg.c_bar() == doctest::Approx(12.0));
    ClaimModel cl;
    cl.theta_bar = 1.1;
    cl.theta1 = 1.2;
    CHECK_THROWS_AS(premium_bounds(cl), DegenerateBand);
}

TEST_CASE("raw claim inputs") {
    RawClaims raw{0.6, 0.8, 0.2, 5.0, 4.0, 30.0, 20.0};
    const ClaimModel c = ClaimModel::from_raw(raw, 1.2, 1.0, 2.0);
    CHECK(c.a1 == doctest::Approx(4.0));
    CHECK(c.a2 == doctest::Approx(4.0));
    CHECK(c.sigma1 == doctest::Approx(std::sqrt(24.0)));
    CHECK(c.sigma2 == doctest::Approx(std::sqrt(20.0)));
    // Cov = lambda_common mu1 mu2.
    CHECK(c.rho * c.sigma1 * c.sigma2 == doctest::Approx(0.2 * 5 * 4));
}

TEST_CASE("validation collects every violation") {
    ScenarioConfig c = paper_default();
    c.market.sigma = -1;
    c.claims.rho = 1.0;
    c.prefs.k1 = 1.0;
    c.prefs.k2 = 1.0;
    c.delay_L.eta = 1.5;
    const ValidationReport r = check(c);
    CHECK(has_field(r, "market.sigma"));
    CHECK(has_field(r, "claims.rho"));
    CHECK(has_field(r, "prefs"));
    CHECK(has_field(r, "delay_L.eta"));
    CHECK_THROWS_AS(validate(c), ValidationError);
    try {
        validate(c);
    } catch (const ValidationError& e) {
        CHECK(e.report().violations.size() == r.violations.size());
    }
}

TEST_CASE("mismatched supplied eta2 is rejected") {
    ScenarioConfig c = paper_default();
    c.delay_2.eta = 0.05;
    c.eta2_supplied = true;
    CHECK(has_field(check(c), "delay"));
}

TEST_CASE("memoryless scenario") {
    const CheckedScenario cfg = validate(paper_default().without_delay());
    CHECK(cfg.rate_L() == 0.05);
    CHECK(cfg.rate_F(1) == 0.05);
    ScenarioConfig half = paper_default();
    half.delay_1 = DelaySpec::none();
    CHECK_FALSE(check(half).ok());
}

TEST_CASE("scenario file round trip") {
    const ScenarioConfig cfg = validate(paper_default()).config();
    std::istringstream in(format_scenario(cfg));
    const ScenarioConfig back = parse_scenario(in);
    CHECK(format_scenario(back) == format_scenario(cfg));
}

TEST_CASE("shipped scenario file holds the default parameters") {
    const ScenarioConfig file = load_scenario(STACKGAME_SCENARIO);
    CHECK_FALSE(file.eta2_supplied);
    CHECK(format_scenario(validate(file).config()) == format_scenario(validate(paper_default()).config()));
}

TEST_CASE("parse errors") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_scenario(in);
    };
    std::string good = format_scenario(validate(paper_default()).config());
    CHECK_THROWS_AS(parse(good + "\n[bogus]\n"), ScenarioParseError);
    CHECK_THROWS_AS(parse(good + "\n[market]\nr0 = 0.05\n"), ScenarioParseError);
    CHECK_THROWS_AS(parse("[market]\nr0 = 0.05\n"), ScenarioParseError);
    std::string typo = good;
    typo.replace(typo.find("sigma1"), 6, "sigmaX");
    CHECK_THROWS_AS(parse(typo), ScenarioParseError);
}

TEST_CASE("parameter paths") {
    ScenarioConfig c = paper_default();
    param_ref(c, "prefs.gamma_L") = 0.2;
    CHECK(c.prefs.gamma_L == 0.2);
    CHECK(param_value(c, "delay_1.h") == 2.0);
    CHECK_THROWS_AS(param_ref(c, "prefs.nope"), Error);
    for (const auto& p : param_paths()) CHECK_NOTHROW(param_value(c, p));
}
