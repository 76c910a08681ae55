#pragma once

#include <stackgame/equilibrium.hpp>

#include <vector>

namespace stackgame {

/// Which player a quantity belongs to.
enum class Agent { L, F1, F2 };

inline Agent insurer_agent(int i) { return i == 1 ? Agent::F1 : Agent::F2; }

struct G2Eval {
    double t = 0;
    /// Case in force at t.
    CaseId id = CaseId::C10;
    double g2_L = 0, g2_F1 = 0, g2_F2 = 0;
    /// True when [t, T] crosses at least one case switch.
    bool stitched = false;

    double get(Agent a) const { return a == Agent::L ? g2_L : a == Agent::F1 ? g2_F1 : g2_F2; }
};

struct G2Rates {
    double L = 0, F1 = 0, F2 = 0;
    double get(Agent a) const { return a == Agent::L ? L : a == Agent::F1 ? F1 : F2; }
};

/// Maximal interval of [t, T] on which one case prevails.
struct CaseSegment {
    double lo = 0, hi = 0;
    CaseId id = CaseId::C10;
};

/// Cases over [t, T], ordered by time. Switches are found on a uniform scan
/// of `scan_points` nodes and refined by bisection.
std::vector<CaseSegment> case_timeline(double t, const CheckedScenario& cfg, int scan_points = 256);

/// g2 for all three players assuming case c holds on all of [t, T].
G2Eval g2_eval(double t, CaseId c, const CheckedScenario& cfg);

/// g2 along the equilibrium, summed over the case timeline of [t, T].
G2Eval g2_eval(double t, const CheckedScenario& cfg);

/// d g2 / dt at t under case c.
G2Rates g2_rates(double t, CaseId c, const CheckedScenario& cfg);

struct ValueEval {
    double t = 0, s = 0;
    /// (x_L, y_L, -) for the reinsurer, (x_hat_i, y_i, y_j) for insurer i.
    double x = 0, y = 0, y_other = 0;
    double exponent = 0;
    double value = 0;
};

ValueEval value_L(double t, double x_L, double y_L, double s, const CheckedScenario& cfg);
ValueEval value_F(double t, double x_hat, double y_i, double y_j, double s, int i, const CheckedScenario& cfg);

/// Same, with g2 supplied by the caller (avoids repeating the quadrature).
ValueEval value_L(double t, double x_L, double y_L, double s, double g2, const CheckedScenario& cfg);
ValueEval value_F(double t, double x_hat, double y_i, double y_j, double s, int i, double g2,
                  const CheckedScenario& cfg);

struct LeaderState {
    double x = 0, y = 0, z = 0, s = 1;
};

/// Insurer i's view: own and rival wealth, delay integrals and lagged wealth.
struct InsurerState {
    double x_i = 0, x_j = 0, y_i = 0, y_j = 0, z_i = 0, z_j = 0, s = 1;
};

struct Residual {
    /// Generator applied to the value function. Zero at the optimum, negative elsewhere.
    double value = 0;
    /// Largest absolute term of the generator.
    double scale = 0;
    double relative() const { return scale > 0 ? value / scale : value; }
};

/// Reinsurer generator at control (p, b_L). Followers answer p with their joint response.
Residual hjb_residual_L(double t, const LeaderState& st, double p, double b_L, const CheckedScenario& cfg);

/// Insurer-i generator at control (q_i, b_i). Premium and rival stay at equilibrium.
Residual hjb_residual_F(double t, const InsurerState& st, double q_i, double b_i, int i, const CheckedScenario& cfg);

}  // namespace stackgame
