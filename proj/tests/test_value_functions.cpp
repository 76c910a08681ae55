#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stackgame/oracle.hpp>
#include <stackgame/value_functions.hpp>
#include <stackgame/verify.hpp>

#include <cmath>
#include <functional>

using namespace stackgame;

namespace {

const CheckedScenario& defaults() {
    static const CheckedScenario cfg = validate(paper_default());
    return cfg;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * f(a + k * h);
    return s * h / 3;
}

// Terms of each player's generator that do not involve state, written out by hand.
double integrand(Agent a, double s, CaseId c, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const KernelEval k = eval_case_constants(s, cfg);
    const PremiumRetention st = case_strategy(c, k, cfg);
    const double drift = m.beta * (2 * m.beta + 1) * m.sigma * m.sigma * k.g1;
    const double c1 = 1 - st.q1, c2 = 1 - st.q2;
    if (a == Agent::L) {
        const double gf = pr.gamma_L * k.phi_L;
        return drift - gf * ((st.p - cl.a1) * c1 + (st.p - cl.a2) * c2)
               + 0.5 * gf * gf * (c1 * c1 * 9 + c2 * c2 * 4 + 2 * c1 * c2 * cl.rho * 6);
    }
    const int i = a == Agent::F1 ? 1 : 2;
    const double qi = i == 1 ? st.q1 : st.q2, qj = i == 1 ? st.q2 : st.q1;
    const double ki = pr.k(i), si = cl.sig(i), sj = cl.sig(3 - i);
    const double gf = pr.gamma(i) * k.phi_Fi(i);
    const double income = cl.theta(i) * cl.a(i) - (st.p - cl.a(i)) * (1 - qi)
                          - ki * (cl.theta(3 - i) * cl.a(3 - i) - (st.p - cl.a(3 - i)) * (1 - qj));
    const double var = qi * qi * si * si + ki * ki * qj * qj * sj * sj - 2 * cl.rho * ki * si * sj * qi * qj;
    return drift - gf * income + 0.5 * gf * gf * var;
}

}  // namespace

TEST_CASE("g2 vanishes at the horizon") {
    for (int c = 1; c <= 10; ++c) {
        const G2Eval g = g2_eval(10, case_from_number(c), defaults());
        CHECK(g.g2_L == 0.0);
        CHECK(g.g2_F1 == 0.0);
        CHECK(g.g2_F2 == 0.0);
    }
}

TEST_CASE("g2 per case against a hand-written generator") {
    const auto& cfg = defaults();
    for (CaseId c : {CaseId::C1, CaseId::C3, CaseId::C6, CaseId::C8, CaseId::C9, CaseId::C10}) {
        for (double t : {0.0, 4.0, 8.5}) {
            const G2Eval g = g2_eval(t, c, cfg);
            for (Agent a : {Agent::L, Agent::F1, Agent::F2}) {
                const double oracle = simpson([&](double s) { return integrand(a, s, c, cfg); }, t, 10, 4000);
                CAPTURE(case_number(c));
                CAPTURE(t);
                CHECK(g.get(a) == doctest::Approx(oracle).epsilon(1e-10).scale(1));
            }
        }
    }
}

TEST_CASE("stitched g2 splits at the case switch") {
    const auto& cfg = defaults();
    const auto tl = case_timeline(0, cfg);
    REQUIRE(tl.size() == 2);
    CHECK(tl[0].hi == doctest::Approx(6.602974842121).epsilon(1e-11));
    const double sw = tl[0].hi;
    const G2Eval g = g2_eval(0, cfg);
    CHECK(g.stitched);
    for (Agent a : {Agent::L, Agent::F1, Agent::F2}) {
        const double oracle = simpson([&](double s) { return integrand(a, s, CaseId::C8, cfg); }, 0, sw, 4000)
                              + simpson([&](double s) { return integrand(a, s, CaseId::C10, cfg); }, sw, 10, 4000);
        CHECK(g.get(a) == doctest::Approx(oracle).epsilon(1e-10));
    }
    // Past the switch only one case is in force.
    CHECK(g2_eval(8, cfg).g2_F1 == g2_eval(8, CaseId::C10, cfg).g2_F1);
}

TEST_CASE("g2 at t = 0 for the defaults") {
    const G2Eval g = g2_eval(0, defaults());
    CHECK(g.g2_L == doctest::Approx(-11.0318).epsilon(1e-5));
    CHECK(g.g2_F1 == doctest::Approx(47.156).epsilon(1e-5));
    CHECK(g.g2_F2 == doctest::Approx(66.669).epsilon(1e-5));
}

TEST_CASE("g2 rates are the negated integrands") {
    const auto& cfg = defaults();
    const G2Rates r = g2_rates(3, CaseId::C8, cfg);
    CHECK(r.L == doctest::Approx(-integrand(Agent::L, 3, CaseId::C8, cfg)).epsilon(1e-12));
    CHECK(r.F2 == doctest::Approx(-integrand(Agent::F2, 3, CaseId::C8, cfg)).epsilon(1e-12));
}

TEST_CASE("terminal values are the utilities") {
    const auto& cfg = defaults();
    const ValueEval v = value_L(10, 3, 2, 1.7, cfg);
    CHECK(v.value == doctest::Approx(-std::exp(-0.1 * (3 + 0.05 * 2)) / 0.1).epsilon(1e-14));
    const ValueEval f = value_F(10, 1.5, 2, 4, 0.8, 2, cfg);
    const double eta2 = cfg.config().delay_2.eta, eta1 = cfg.config().delay_1.eta;
    CHECK(f.value == doctest::Approx(-std::exp(-3 * (1.5 + eta2 * 2 - 0.3 * eta1 * 4)) / 3).epsilon(1e-14));
}

TEST_CASE("geometric market, full retention: reinsurer g2 is zero") {
    ScenarioConfig c = paper_default();
    c.market.beta = 0;
    c.prefs.gamma1 = 0.01;
    c.prefs.gamma2 = 0.01;
    const CheckedScenario cfg = validate(c);
    REQUIRE(case_number(classify_case(0, cfg)) == 1);
    CHECK(g2_eval(0, CaseId::C1, cfg).g2_L == 0.0);
}

TEST_CASE("zero kernel rate keeps phi at one") {
    ScenarioConfig c = paper_default();
    // r0 + eta (1 - alpha - e^{-alpha h}) = 0.
    const double d = 1 - 1.5 - std::exp(-7.5);
    c.delay_L = {5.0, 1.5, -0.05 / d};
    const CheckedScenario cfg = validate(c);
    CHECK(std::abs(cfg.rate_L()) < 1e-15);
    CHECK(eval_phi(0, cfg.rate_L(), 10) == doctest::Approx(1.0).epsilon(1e-14));
    const auto rep = ode_check_g2(std::vector<double>{0, 2, 5, 9}, cfg);
    CHECK(rep.max_dev < 1e-8);
}

TEST_CASE("random scenarios: terminal condition and backward ODE") {
    std::vector<double> times;
    for (int n = 0; n <= 10; ++n) times.push_back(n);
    double worst = 0;
    for (int d = 0; d < 50; ++d) {
        const CheckedScenario cfg = validate(random_scenario(paper_default(), 7, d));
        const double T = cfg.market().T;
        const G2Eval g = g2_eval(T, cfg);
        CHECK(g.g2_L == 0.0);
        CHECK(g.g2_F1 == 0.0);
        const auto rep = ode_check_g2(times, cfg);
        worst = std::max(worst, rep.max_dev);
        CAPTURE(d);
        CHECK(rep.max_dev < 1e-7);
    }
    MESSAGE("worst g2 ODE deviation over 50 draws: " << worst);
}

TEST_CASE("HJB residual vanishes at equilibrium and drops elsewhere") {
    const auto& cfg = defaults();
    for (double t : {0.5, 6.0, 8.0}) {
        const PremiumRetention st = premium_and_retention(t, cfg);
        const Investments b = investment_strategies(t, 1.2, cfg);
        const LeaderState ls{10, 12, 9, 1.2};
        const Residual eq = hjb_residual_L(t, ls, st.p, b.bL, cfg);
        CHECK(std::abs(eq.relative()) < 1e-12);
        CHECK(hjb_residual_L(t, ls, st.p, 1.1 * b.bL, cfg).value < eq.value);
        CHECK(hjb_residual_L(t, ls, cfg.c_F(), b.bL, cfg).value < eq.value);

        const InsurerState is{5, 6, 7, 8, 4, 5, 1.2};
        for (int i = 1; i <= 2; ++i) {
            const double q = i == 1 ? st.q1 : st.q2, bi = i == 1 ? b.b1 : b.b2;
            const Residual e = hjb_residual_F(t, is, q, bi, i, cfg);
            CHECK(std::abs(e.relative()) < 1e-12);
            CHECK(hjb_residual_F(t, is, q * 0.9, bi, i, cfg).value < e.value);
            CHECK(hjb_residual_F(t, is, q, bi * 0.9, i, cfg).value < e.value);
        }
    }
}
