#include <stackgame/kernels.hpp>

#include <cmath>

namespace stackgame {

namespace {

// (1 - e^{-x}) / x, with value 1 at x = 0.
double decay_ratio(double x) {
    if (x == 0.0) return 1.0;
    return -std::expm1(-x) / x;
}

// 1 - (1 - e^{-x}) / x. Series near zero to dodge the cancellation.
double decay_ratio_complement(double x) {
    if (std::abs(x) < 1e-2) {
        return x * (1.0 / 2 - x * (1.0 / 6 - x * (1.0 / 24 - x * (1.0 / 120 - x / 720))));
    }
    return 1.0 - decay_ratio(x);
}

double sharpe_sq(const FinancialMarket& m) {
    const double s = (m.r - m.r0) / m.sigma;
    return s * s;
}

}  // namespace

double eval_phi(double t, double A_plus_eta, double T) { return std::exp(A_plus_eta * (T - t)); }

double growth_integral(double rate, double tau) {
    if (rate == 0.0) return tau;
    return std::expm1(rate * tau) / rate;
}

double eval_g1(double t, const FinancialMarket& m) {
    const double tau = m.T - t;
    const double x = 2.0 * m.beta * m.r0 * tau;
    return -0.5 * sharpe_sq(m) * tau * decay_ratio(x);
}

double eval_g1_rate(double t, const FinancialMarket& m) {
    const double tau = m.T - t;
    return 0.5 * sharpe_sq(m) * std::exp(-2.0 * m.beta * m.r0 * tau);
}

double eval_g_plain(double t, const FinancialMarket& m) {
    if (m.beta == 0.0) return 0.0;
    const double tau = m.T - t;
    const double x = 2.0 * m.beta * m.r0 * tau;
    const double pre = (2.0 * m.beta + 1.0) * (m.r - m.r0) * (m.r - m.r0) / (4.0 * m.r0);
    return -pre * tau * decay_ratio_complement(x);
}

double eval_g_plain_rate(double t, const FinancialMarket& m) {
    const double tau = m.T - t;
    const double x = 2.0 * m.beta * m.r0 * tau;
    const double pre = (2.0 * m.beta + 1.0) * (m.r - m.r0) * (m.r - m.r0) / (4.0 * m.r0);
    return -pre * std::expm1(-x);
}

KernelEval eval_case_constants(double t, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double s1 = cl.sigma1, s2 = cl.sigma2, rho = cl.rho;
    const double g1 = pr.gamma1, g2 = pr.gamma2, gL = pr.gamma_L;
    const double k1 = pr.k1, k2 = pr.k2;
    const double a1 = cl.a1, a2 = cl.a2;

    KernelEval e;
    e.t = t;
    e.phi_L = eval_phi(t, cfg.rate_L(), m.T);
    e.phi_F1 = eval_phi(t, cfg.rate_F(1), m.T);
    e.phi_F2 = eval_phi(t, cfg.rate_F(2), m.T);
    e.phi_F = e.phi_F1;
    e.g1 = eval_g1(t, m);
    e.g_plain = eval_g_plain(t, m);

    const double fL = e.phi_L, f1 = e.phi_F1, f2 = e.phi_F2;
    e.c1 = k1 * rho * s2 / s1;
    e.c2 = k2 * rho * s1 / s2;

    e.K = 1.0 / (1.0 - k1 * k2 * rho * rho);
    e.K_bar_F1 = (g2 * s2 * s2 / (g1 * s1 * s1) + e.c1) * (1.0 - e.c2);
    e.K_bar_F2 = (g1 * s1 * s1 / (g2 * s2 * s2) + e.c2) * (1.0 - e.c1);
    e.K_F1 = (1.0 + k1 * rho * g1 * s1 / (g2 * s2)) * (1.0 - e.c1);
    e.K_F2 = (1.0 + k2 * rho * g2 * s2 / (g1 * s1)) * (1.0 - e.c2);

    const double v1 = g1 * s1 * s1 * f1, v2 = g2 * s2 * s2 * f2;
    e.N_c1 = (cfg.c_F() - a1) / v1;
    e.N_c2 = (cfg.c_F() - a2) / v2;
    e.N_cbar1 = (cfg.c_bar() - a1) / v1;
    e.N_cbar2 = (cfg.c_bar() - a2) / v2;
    e.N_a1 = (a2 - a1) / v1;
    e.N_a2 = (a1 - a2) / v2;
    e.M_F1 = (g1 * f1 + gL * fL) / (2.0 * g1 * f1 + gL * fL);
    e.M_F2 = (g2 * f2 + gL * fL) / (2.0 * g2 * f2 + gL * fL);

    const double K = e.K;
    e.D_F1 = g1 * f1 / K + gL * fL * (1.0 + k2 * rho * rho + (s2 * rho / s1) * (1.0 + k2));
    e.D_F2 = g2 * f2 / K + gL * fL * (1.0 + k1 * rho * rho + (s1 * rho / s2) * (1.0 + k1));
    e.D_bar_F1 = 1.0 + K * (1.0 + (k2 * rho) * (k2 * rho) + 2.0 * k2 * rho * rho) * gL * fL / (2.0 * g1 * f1);
    e.D_bar_F2 = 1.0 + K * (1.0 + (k1 * rho) * (k1 * rho) + 2.0 * k1 * rho * rho) * gL * fL / (2.0 * g2 * f2);
    e.D_F12 = k1 * g1 * f1 + k2 * g2 * f2 + K * (1.0 + k1 + k2 + k1 * k2 * rho * rho) * gL * fL;

    e.P_N = (s1 * s2) * (s1 * s2) * (g2 * f2 * e.D_F1 + g1 * f1 * e.D_F2)
            + 2.0 * a1 * s2 * s2 * g2 * f2 * e.D_bar_F1 + 2.0 * a2 * s1 * s1 * g1 * f1 * e.D_bar_F2
            + (a1 + a2) * rho * s1 * s2 * e.D_F12;
    e.P_D = 2.0 * s2 * s2 * g2 * f2 * e.D_bar_F1 + 2.0 * s1 * s1 * g1 * f1 * e.D_bar_F2
            + 2.0 * rho * s1 * s2 * e.D_F12;
    return e;
}

}  // namespace stackgame
