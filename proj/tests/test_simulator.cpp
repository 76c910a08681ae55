#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stackgame/simulator.hpp>
#include <stackgame/verify.hpp>

#include <cmath>
#include <sstream>

using namespace stackgame;

namespace {

const CheckedScenario& defaults() {
    static const CheckedScenario cfg = validate(paper_default());
    return cfg;
}

struct Trapezoid {
    double value = 0, bound = 0;
};

// Trapezoid rule for int_{-h}^0 e^{alpha s} X(t+s) ds over the buffer nodes, with
// the exact error bound for a piecewise-linear X: dt^3/12 max|f''| per interval.
Trapezoid trapezoid_y(const AgentPath& a, double alpha, double dt) {
    const int lag = a.past.lag();
    Trapezoid out;
    for (int j = 0; j < lag; ++j) {
        const double x0 = a.past.at(j), x1 = a.past.at(j + 1);
        const double e0 = std::exp(-alpha * j * dt), e1 = std::exp(-alpha * (j + 1) * dt);
        out.value += 0.5 * dt * (e0 * x0 + e1 * x1);
        const double slope = (x0 - x1) / dt;
        out.bound += dt * dt * dt / 12 * e0 * (alpha * alpha * std::max(std::abs(x0), std::abs(x1)) + 2 * alpha * std::abs(slope));
    }
    return out;
}

double corr(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

SimConfig quick(std::size_t paths, double dt = 0.01) {
    SimConfig s;
    s.dt = dt;
    s.n_paths = paths;
    s.threads = 1;
    return s;
}

}  // namespace

TEST_CASE("delay buffer history") {
    DelayBuffer b(5.0, 4);
    for (int k = 0; k <= 4; ++k) CHECK(b.at(k) == 5.0);
    b.push(6);
    b.push(7);
    CHECK(b.at(0) == 7);
    CHECK(b.at(1) == 6);
    CHECK(b.at(2) == 5);
    CHECK(b.at(4) == 5);
}

TEST_CASE("step size must land on delay nodes") {
    CHECK_NOTHROW(SimModel(defaults(), 1e-3));
    CHECK_THROWS_AS(SimModel(defaults(), 0.003), Error);
}

TEST_CASE("initial state") {
    const SimModel model(defaults(), 0.01);
    const PathState st = initial_state(defaults(), model, 0);
    CHECK(st.L.X == 10);
    CHECK(st.L.Y == doctest::Approx(10 / 0.3 * (1 - std::exp(-0.6))).epsilon(1e-14));
    CHECK(st.F2.Y == doctest::Approx(5 / 0.3 * (1 - std::exp(-0.9))).epsilon(1e-14));
    CHECK(st.F1.Z() == 5);
}

TEST_CASE("null dynamics keep wealth constant") {
    ScenarioConfig c = paper_default().without_delay();
    SimModel model(validate(c), 0.01);
    model.market.r0 = 0;
    model.market.r = 0;
    model.claims.theta1 = 0;
    model.claims.theta2 = 0;
    for (auto& d : model.d) d.co = {};
    PathState st = initial_state(validate(c), model, 0);
    PolicyRow pol{model.claims.a1, 1, 1, 0, 0, 0};
    for (int k = 0; k < 100; ++k) step(st, pol, {}, model);
    CHECK(st.L.X == 10);
    CHECK(st.F1.X == 5);
    CHECK(st.F2.X == 5);
}

TEST_CASE("full retention and no investment leave the reinsurer riskless") {
    const SimModel model(defaults(), 0.01);
    PathState a = initial_state(defaults(), model, 0), b = a;
    const PolicyRow pol{12, 1, 1, 0, 0.2, 0.1};
    step(a, pol, {0.1, -0.2, 0.3}, model);
    step(b, pol, {-0.4, 0.5, -0.1}, model);
    CHECK(a.L.X == b.L.X);
    CHECK(a.F1.X != b.F1.X);
}

TEST_CASE("incremental Y against the buffer") {
    const auto& cfg = defaults();
    const double dt = 1e-3;
    const SimModel model(cfg, dt);
    const Policy pol = equilibrium_policy(cfg);
    PathState st = initial_state(cfg, model, 0);
    IncrementStream inc(99, 0, 0, cfg.claims().rho, dt);
    for (int k = 0; k < 3000; ++k) step(st, pol(k * dt), inc.next(), model);
    const double alpha[3] = {0.3, 0.5, 0.3};
    for (int n = 0; n < 3; ++n) {
        const AgentPath& a = st.agent(n);
        CAPTURE(n);
        // Same quadrature as the recurrence: agreement to round-off.
        CHECK(std::abs(recompute_y(a, model.d[n], dt) - a.Y) <= 1e-8 * std::abs(a.Y));
        // Independent trapezoid: agreement up to its own error bound.
        const Trapezoid tr = trapezoid_y(a, alpha[n], dt);
        const double gap = std::abs(tr.value - a.Y);
        MESSAGE("agent " << n << ": |trapezoid - Y|/|Y| = " << gap / std::abs(a.Y) << ", bound "
                         << tr.bound / std::abs(a.Y));
        CHECK(gap <= tr.bound + 1e-12 * std::abs(a.Y));
    }
}

TEST_CASE("Brownian correlation") {
    const double rho = 0.3;
    IncrementStream s(5, 0, 0, rho, 1.0);
    std::vector<double> w1, w2, w;
    for (int k = 0; k < 1000000; ++k) {
        const Increments i = s.next();
        w1.push_back(i.dW1);
        w2.push_back(i.dW2);
        w.push_back(i.dW);
    }
    CHECK(std::abs(corr(w1, w2) - rho) < 0.005);
    CHECK(std::abs(corr(w, w1)) < 0.005);
    CHECK(std::abs(corr(w, w2)) < 0.005);
}

TEST_CASE("standard error") {
    const MCEstimate e = estimate({1, 2, 3, 4});
    CHECK(e.mean == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3 / 4)));
    CHECK(e.n_paths == 4);
}

TEST_CASE("determinism") {
    const auto& cfg = defaults();
    SimConfig s = quick(1);
    s.keep_paths = true;
    const SimResult a = simulate_terminal_utilities(cfg, s, equilibrium_policy(cfg));
    const SimResult b = simulate_terminal_utilities(cfg, s, equilibrium_policy(cfg));
    CHECK(a.paths[0].X_L == b.paths[0].X_L);
    CHECK(a.paths[0].Y2 == b.paths[0].Y2);
    CHECK(a.L.mean == b.L.mean);

    // Thread count does not change the result.
    SimConfig s1 = quick(64), s3 = quick(64);
    s3.threads = 3;
    const SimResult one = simulate_terminal_utilities(cfg, s1, equilibrium_policy(cfg));
    const SimResult three = simulate_terminal_utilities(cfg, s3, equilibrium_policy(cfg));
    CHECK(one.L.mean == three.L.mean);
    CHECK(one.F2.std_error == three.F2.std_error);
}

TEST_CASE("positive price schemes") {
    const auto& cfg = defaults();
    SimConfig s = quick(2000);
    s.scheme = PriceScheme::LogEuler;
    CHECK(simulate_terminal_utilities(cfg, s, equilibrium_policy(cfg)).flagged == 0);

    SimConfig e = quick(2000);
    e.keep_paths = true;
    const SimResult r = simulate_terminal_utilities(cfg, e, equilibrium_policy(cfg));
    for (const auto& p : r.paths) {
        if (p.flagged) CHECK(p.S == kPriceFloor);
    }
    CHECK(r.flagged_fraction == doctest::Approx(double(r.flagged) / 2000));
}

TEST_CASE("reinsurer value against the closed form") {
    const auto& cfg = defaults();
    const SimResult r = simulate_terminal_utilities(cfg, quick(20000), equilibrium_policy(cfg));
    const StartValues v = start_values(cfg);
    const double z = (r.L.mean - v.L.value) / r.L.std_error;
    MESSAGE("reinsurer: mc " << r.L.mean << " se " << r.L.std_error << " closed " << v.L.value << " z " << z);
    CHECK(std::abs(z) < 3);
}

// Shared large run: equilibrium policy, 1e5 paths at dt = 0.01.
const SimResult& fine_run() {
    static const SimResult r =
        simulate_terminal_utilities(defaults(), quick(100000, 0.01), equilibrium_policy(defaults()));
    return r;
}

TEST_CASE("over-investing reinsurer does worse") {
    const auto& cfg = defaults();
    const SimResult& eq = fine_run();
    const SimResult up =
        simulate_terminal_utilities(cfg, quick(100000, 0.01), scaled_policy(equilibrium_policy(cfg), "bL", 1.5));
    const double se = std::hypot(eq.L.std_error, up.L.std_error);
    MESSAGE("equilibrium " << eq.L.mean << " vs bL x1.5 " << up.L.mean << ", combined se " << se);
    CHECK(eq.L.mean - up.L.mean > 3 * se);
}

TEST_CASE("halving the step barely moves the reinsurer estimate") {
    const auto& cfg = defaults();
    SimConfig coarse = quick(100000, 0.02);
    coarse.brownian_substeps = 2;  // same Brownian paths as the fine run
    const SimResult a = simulate_terminal_utilities(cfg, coarse, equilibrium_policy(cfg));
    const SimResult& b = fine_run();
    const double se = std::hypot(a.L.std_error, b.L.std_error);
    MESSAGE("dt 0.02: " << a.L.mean << ", dt 0.01: " << b.L.mean << ", combined se " << se);
    CHECK(std::abs(a.L.mean - b.L.mean) < se);
}

TEST_CASE("policy selectors") {
    const auto& cfg = defaults();
    CHECK_NOTHROW(parse_policy("nodelay", cfg));
    const Policy p = parse_policy("perturb:q1=0.5", cfg);
    CHECK(p(3).q1 == doctest::Approx(0.5 * equilibrium_policy(cfg)(3).q1));
    CHECK_THROWS_AS(parse_policy("perturb:zz=2", cfg), Error);
    CHECK_THROWS_AS(parse_policy("greedy", cfg), Error);
}

TEST_CASE("path CSV") {
    std::ostringstream os;
    write_paths_csv(os, {{3, 1, 2, 3, 4, 5, 6, 0.5, true}});
    CHECK(os.str().rfind("path_id,X_L_T,X1_T,X2_T,Y_L_T,Y1_T,Y2_T,S_T,flagged\n", 0) == 0);
    CHECK(os.str().find("\r") == std::string::npos);
}
