#pragma once

#include <stackgame/model_params.hpp>

namespace stackgame {

/// Every time-dependent scalar the strategies and value functions consume, at one t.
struct KernelEval {
    double t = 0;
    double phi_L = 1, phi_F = 1, phi_F1 = 1, phi_F2 = 1;
    double g1 = 0, g_plain = 0;

    double K = 1, K_bar_F1 = 0, K_bar_F2 = 0, K_F1 = 0, K_F2 = 0;
    double N_c1 = 0, N_c2 = 0, N_cbar1 = 0, N_cbar2 = 0, N_a1 = 0, N_a2 = 0;
    double M_F1 = 0, M_F2 = 0;
    double D_F1 = 0, D_F2 = 0, D_bar_F1 = 0, D_bar_F2 = 0, D_F12 = 0;
    double P_N = 0, P_D = 0;

    /// Cross-retention slopes k1 rho sigma2/sigma1 and k2 rho sigma1/sigma2.
    double c1 = 0, c2 = 0;

    double phi_Fi(int i) const { return i == 1 ? phi_F1 : phi_F2; }
    double N_c(int i) const { return i == 1 ? N_c1 : N_c2; }
    double N_cbar(int i) const { return i == 1 ? N_cbar1 : N_cbar2; }
    double N_a(int i) const { return i == 1 ? N_a1 : N_a2; }
    double M_F(int i) const { return i == 1 ? M_F1 : M_F2; }
    double K_bar_F(int i) const { return i == 1 ? K_bar_F1 : K_bar_F2; }
    double D_F(int i) const { return i == 1 ? D_F1 : D_F2; }
    double D_bar_F(int i) const { return i == 1 ? D_bar_F1 : D_bar_F2; }
    double c(int i) const { return i == 1 ? c1 : c2; }
    double premium_fraction() const { return P_N / P_D; }
};

/// exp{(A + eta)(T - t)}.
double eval_phi(double t, double A_plus_eta, double T);

/// Asset kernel; beta = 0 uses the GBM limit.
double eval_g1(double t, const FinancialMarket& m);
/// d g1 / dt.
double eval_g1_rate(double t, const FinancialMarket& m);

/// The g(t) accumulator, i.e. the integral of beta(2 beta + 1) sigma^2 g1 over [t, T].
double eval_g_plain(double t, const FinancialMarket& m);
double eval_g_plain_rate(double t, const FinancialMarket& m);

/// (exp(rate * tau) - 1) / rate, equal to tau at rate = 0.
double growth_integral(double rate, double tau);

KernelEval eval_case_constants(double t, const CheckedScenario& cfg);

}  // namespace stackgame
