#include <stackgame/oracle.hpp>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

namespace stackgame {

namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kOdeTol = 1e-12;

int grid_count(double step) { return static_cast<int>(std::lround(1.0 / step)) + 1; }

double clamp01(double x) { return std::min(std::max(x, 0.0), 1.0); }

// Own-premium retention slope term (p - a_i)/(gamma_i sigma_i^2 phi).
double own_term(double p, int i, double phi, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    return (p - cl.a(i)) / (cfg.prefs().gamma(i) * cl.sig(i) * cl.sig(i) * phi);
}

// Descending copy of the requested times with T prepended.
std::vector<double> backward_times(const std::vector<double>& times, double T) {
    std::vector<double> out{T};
    std::vector<double> sorted(times);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (double t : sorted) {
        if (t < T) out.push_back(t);
    }
    return out;
}

}  // namespace

double insurer_maximand(double t, double s, double p, double q_i, double b_i, double q_j, double b_j, int i,
                        const CheckedScenario& cfg) {
    const int j = 3 - i;
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const double gi = cfg.prefs().gamma(i), ki = cfg.prefs().k(i);
    const double gf = gi * eval_phi(t, cfg.rate_F(i), m.T);
    const double s2b = std::pow(s, 2.0 * m.beta);
    const double Es = -2.0 * m.beta * eval_g1(t, m) / (s2b * s);
    const double bd = b_i - ki * b_j;
    const double si = cl.sig(i), sj = cl.sig(j);
    return gf * ((p - cl.a(i)) * q_i + (m.r - m.r0) * b_i)
           - 0.5 * gf * gf * (q_i * q_i * si * si - 2.0 * cl.rho * ki * si * sj * q_i * q_j + bd * bd * m.sigma * m.sigma * s2b)
           + bd * m.sigma * m.sigma * s2b * s * gf * Es;
}

double leader_maximand(double t, double p, double q1, double q2, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    const double gf = cfg.prefs().gamma_L * eval_phi(t, cfg.rate_L(), cfg.market().T);
    const double c1 = 1 - q1, c2 = 1 - q2;
    const double income = (p - cl.a1) * c1 + (p - cl.a2) * c2;
    const double var = c1 * c1 * cl.sigma1 * cl.sigma1 + c2 * c2 * cl.sigma2 * cl.sigma2
                       + 2.0 * c1 * c2 * cl.rho * cl.sigma1 * cl.sigma2;
    return gf * income - 0.5 * gf * gf * var;
}

InsurerResponse brute_force_insurer_response(double t, double s, double p, double q_other, int i,
                                             const CheckedScenario& cfg, const GridSpec& grid) {
    const Investments inv = investment_strategies(t, s, cfg);
    const double b_star = i == 1 ? inv.b1 : inv.b2;
    const double b_j = i == 1 ? inv.b2 : inv.b1;

    // The maximand separates into a q part and a b part, so each grid is scanned alone.
    InsurerResponse best;
    double best_v = -INFINITY;
    const int nq = grid_count(grid.q_step);
    for (int n = 0; n < nq; ++n) {
        const double q = std::min(1.0, n * grid.q_step);
        const double v = insurer_maximand(t, s, p, q, 0.0, q_other, b_j, i, cfg);
        if (v > best_v) {
            best_v = v;
            best.q = q;
        }
    }
    best_v = -INFINITY;
    const double lo = -grid.b_span * std::abs(b_star), step = grid.b_step(b_star);
    for (int n = 0; n < grid.b_points; ++n) {
        const double b = lo + n * step;
        const double v = insurer_maximand(t, s, p, 0.0, b, q_other, b_j, i, cfg);
        if (v > best_v) {
            best_v = v;
            best.b = b;
        }
    }
    return best;
}

NashResult nash_fixed_point(double t, double p, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double T = cfg.market().T;
    const double n1 = own_term(p, 1, eval_phi(t, cfg.rate_F(1), T), cfg);
    const double n2 = own_term(p, 2, eval_phi(t, cfg.rate_F(2), T), cfg);
    const double c1 = pr.k1 * cl.rho * cl.sigma2 / cl.sigma1;
    const double c2 = pr.k2 * cl.rho * cl.sigma1 / cl.sigma2;

    NashResult r;
    r.q1 = 1.0;
    r.q2 = 1.0;
    for (r.sweeps = 1; r.sweeps <= 10000; ++r.sweeps) {
        const double q1 = clamp01(n1 + c1 * r.q2);
        const double q2 = clamp01(n2 + c2 * q1);
        const double d1 = std::abs(q1 - r.q1), d2 = std::abs(q2 - r.q2);
        r.q1 = q1;
        r.q2 = q2;
        r.distances.push_back(std::max(c2 * d1, d2));
        if (std::max(d1, d2) < 1e-12) return r;
    }
    throw NoConvergence("follower fixed point did not settle within 10^4 sweeps");
}

double brute_force_premium(double t, const CheckedScenario& cfg, const GridSpec& grid) {
    const int n = grid_count(grid.p_step_fraction);
    const double lo = cfg.c_F(), band = cfg.c_bar() - cfg.c_F();
    double best_p = lo, best_v = -INFINITY;
    for (int k = 0; k < n; ++k) {
        const double p = k == n - 1 ? cfg.c_bar() : lo + band * k / (n - 1);
        const NashResult q = nash_fixed_point(t, p, cfg);
        const double v = leader_maximand(t, p, q.q1, q.q2, cfg);
        if (v > best_v) {
            best_v = v;
            best_p = p;
        }
    }
    return best_p;
}

double brute_force_single_premium(double t, const SingleInsurerScenario& sc, const GridSpec& grid) {
    const auto& m = sc.market;
    const double fL = sc.gamma_L * eval_phi(t, kernel_rate(sc.delay_L, m.r0), m.T);
    const double fF = eval_phi(t, kernel_rate(sc.delay_1, m.r0), m.T);
    const int n = grid_count(grid.p_step_fraction);
    const double lo = sc.c_F(), band = sc.c_bar() - sc.c_F();
    double best_p = lo, best_v = -INFINITY;
    for (int k = 0; k < n; ++k) {
        const double p = k == n - 1 ? sc.c_bar() : lo + band * k / (n - 1);
        const double q = clamp01((p - sc.a1) / (sc.gamma1 * sc.sigma1 * sc.sigma1 * fF));
        const double v = fL * (p - sc.a1) * (1 - q) - 0.5 * fL * fL * sc.sigma1 * sc.sigma1 * (1 - q) * (1 - q);
        if (v > best_v) {
            best_v = v;
            best_p = p;
        }
    }
    return best_p;
}

KernelOdeReport ode_check_kernels(const CheckedScenario& cfg, int n_points) {
    using State = std::array<double, 4>;
    const auto& m = cfg.market();
    const double rates[3] = {cfg.rate_L(), cfg.rate_F(1), cfg.rate_F(2)};
    const double half_sharpe = 0.5 * std::pow((m.r - m.r0) / m.sigma, 2);
    auto rhs = [&](const State& x, State& dx, double) {
        for (int n = 0; n < 3; ++n) dx[n] = -rates[n] * x[n];
        dx[3] = 2.0 * m.beta * m.r0 * x[3] + half_sharpe;
    };
    std::vector<double> times;
    for (int n = 0; n < std::max(n_points, 2); ++n) times.push_back(m.T * n / (std::max(n_points, 2) - 1));
    const auto back = backward_times(times, m.T);

    KernelOdeReport rep;
    State x{1.0, 1.0, 1.0, 0.0};
    auto observe = [&](const State& s, double t) {
        for (int n = 0; n < 3; ++n) rep.max_phi_dev = std::max(rep.max_phi_dev, std::abs(s[n] - eval_phi(t, rates[n], m.T)));
        rep.max_g1_dev = std::max(rep.max_g1_dev, std::abs(s[3] - eval_g1(t, m)));
    };
    auto stepper = odeint::make_controlled(kOdeTol, kOdeTol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, x, back.begin(), back.end(), -1e-3, observe);
    return rep;
}

double generator_g2_integrand(Agent a, double s, const CheckedScenario& cfg, const CaseId* c) {
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const KernelEval k = eval_case_constants(s, cfg);
    const PremiumRetention st = c ? case_strategy(*c, k, cfg) : premium_and_retention(s, cfg);
    const double drift = m.beta * (2.0 * m.beta + 1.0) * m.sigma * m.sigma * k.g1;
    if (a == Agent::L) {
        // Same expression as the leader maximand, sign flipped.
        return drift - leader_maximand(s, st.p, st.q1, st.q2, cfg);
    }
    const int i = a == Agent::F1 ? 1 : 2, j = 3 - i;
    const double qi = i == 1 ? st.q1 : st.q2, qj = i == 1 ? st.q2 : st.q1;
    const double gf = pr.gamma(i) * k.phi_Fi(i), ki = pr.k(i);
    const double income = cl.theta(i) * cl.a(i) - ki * cl.theta(j) * cl.a(j) - (st.p - cl.a(i)) * (1 - qi)
                          + ki * (st.p - cl.a(j)) * (1 - qj);
    const double var = qi * qi * cl.sig(i) * cl.sig(i) + ki * ki * qj * qj * cl.sig(j) * cl.sig(j)
                       - 2.0 * cl.rho * ki * cl.sig(i) * cl.sig(j) * qi * qj;
    return drift - gf * income + 0.5 * gf * gf * var;
}

namespace {

G2OdeReport run_g2_ode(const CaseId* c, const std::vector<double>& times, const CheckedScenario& cfg) {
    using State = std::array<double, 3>;
    const double T = cfg.market().T;
    auto rhs = [&](const State&, State& dx, double s) {
        dx[0] = -generator_g2_integrand(Agent::L, s, cfg, c);
        dx[1] = -generator_g2_integrand(Agent::F1, s, cfg, c);
        dx[2] = -generator_g2_integrand(Agent::F2, s, cfg, c);
    };
    const auto back = backward_times(times, T);
    G2OdeReport rep;
    State x{0.0, 0.0, 0.0};
    auto observe = [&](const State& s, double t) {
        G2Eval o;
        o.t = t;
        o.g2_L = s[0];
        o.g2_F1 = s[1];
        o.g2_F2 = s[2];
        const G2Eval q = c ? g2_eval(t, *c, cfg) : g2_eval(t, cfg);
        o.id = q.id;
        rep.times.push_back(t);
        rep.ode.push_back(o);
        rep.quadrature.push_back(q);
        for (Agent a : {Agent::L, Agent::F1, Agent::F2}) rep.max_dev = std::max(rep.max_dev, std::abs(o.get(a) - q.get(a)));
    };
    auto stepper = odeint::make_controlled(kOdeTol, kOdeTol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, x, back.begin(), back.end(), -1e-3, observe);
    return rep;
}

}  // namespace

G2OdeReport ode_check_g2(CaseId c, const std::vector<double>& times, const CheckedScenario& cfg) {
    return run_g2_ode(&c, times, cfg);
}

G2OdeReport ode_check_g2(const std::vector<double>& times, const CheckedScenario& cfg) {
    return run_g2_ode(nullptr, times, cfg);
}

}  // namespace stackgame
