#pragma once

#include <stackgame/equilibrium.hpp>
#include <stackgame/value_functions.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace stackgame {

struct GridSpec {
    double q_step = 1e-3;
    /// Premium step as a fraction of c_bar - c_F.
    double p_step_fraction = 1e-3;
    /// The b grid spans [-b_span |b*|, +b_span |b*|] with b_points nodes.
    double b_span = 5.0;
    int b_points = 1001;

    double b_step(double b_star) const { return 2.0 * b_span * std::abs(b_star) / (b_points - 1); }
};

/// Strategy-dependent part of insurer i's generator divided by |V|, with the
/// rival fixed at (q_j, b_j).
double insurer_maximand(double t, double s, double p, double q_i, double b_i, double q_j, double b_j, int i,
                        const CheckedScenario& cfg);

/// Premium-dependent part of the reinsurer's generator divided by |V|, at given retentions.
double leader_maximand(double t, double p, double q1, double q2, const CheckedScenario& cfg);

struct InsurerResponse {
    double q = 0, b = 0;
};

/// Grid argmax of insurer_maximand. The rival's investment is its closed-form value.
InsurerResponse brute_force_insurer_response(double t, double s, double p, double q_other, int i,
                                             const CheckedScenario& cfg, const GridSpec& grid = {});

struct NashResult {
    double q1 = 0, q2 = 0;
    int sweeps = 0;
    /// Contraction distance after each sweep.
    std::vector<double> distances;
};

/// Gauss-Seidel on the projected best responses until successive change < 1e-12.
/// Throws NoConvergence after 10^4 sweeps.
NashResult nash_fixed_point(double t, double p, const CheckedScenario& cfg);

/// Grid argmax over [c_F, c_bar] of the reinsurer's maximand with followers at their
/// fixed point. Ties go to the lowest premium.
double brute_force_premium(double t, const CheckedScenario& cfg, const GridSpec& grid = {});

/// The same for one reinsurer and one insurer.
double brute_force_single_premium(double t, const SingleInsurerScenario& sc, const GridSpec& grid = {});

struct KernelOdeReport {
    double max_phi_dev = 0;
    double max_g1_dev = 0;
    double max() const { return std::max(max_phi_dev, max_g1_dev); }
};

/// Backward integration of the phi and g1 equations against their closed forms.
KernelOdeReport ode_check_kernels(const CheckedScenario& cfg, int n_points);

/// g2 integrand read straight off the generator: g2(t) = int_t^T G(s) ds.
/// Uses case c's premium and retentions, or the equilibrium when c is absent.
double generator_g2_integrand(Agent a, double s, const CheckedScenario& cfg, const CaseId* c = nullptr);

struct G2OdeReport {
    std::vector<double> times;
    std::vector<G2Eval> ode, quadrature;
    double max_dev = 0;
};

/// Backward ODE for g2 under case c held on [t, T], compared with g2_eval at each time.
G2OdeReport ode_check_g2(CaseId c, const std::vector<double>& times, const CheckedScenario& cfg);

/// Same along the equilibrium, compared with the stitched g2_eval.
G2OdeReport ode_check_g2(const std::vector<double>& times, const CheckedScenario& cfg);

}  // namespace stackgame
