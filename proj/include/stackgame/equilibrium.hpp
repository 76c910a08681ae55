#pragma once

#include <stackgame/kernels.hpp>
#include <stackgame/model_params.hpp>

#include <string>
#include <vector>

namespace stackgame {

/// Cases (1)-(10) of the equilibrium theorem.
///  1: both insurers retain everything, premium indeterminate.
///  2-4: insurer 1 capped at q = 1, premium at c_bar / c_F / interior.
///  5-7: the same with the insurers swapped.
///  8-10: both interior, premium at c_bar / c_F / P^N/P^D.
enum class CaseId : int { C1 = 1, C2, C3, C4, C5, C6, C7, C8, C9, C10 };

inline int case_number(CaseId c) { return static_cast<int>(c); }
CaseId case_from_number(int n);

struct Investments {
    double bL = 0, b1 = 0, b2 = 0;
};

struct Retentions {
    double q1 = 0, q2 = 0;
    double q(int i) const { return i == 1 ? q1 : q2; }
};

struct PremiumRetention {
    double p = 0, q1 = 0, q2 = 0;
    CaseId id = CaseId::C10;
    /// Case 1: every p in [p_lo, p_hi] is optimal; p reports c_bar.
    bool non_unique = false;
    double p_lo = 0, p_hi = 0;
    /// More than one condition set matched within the comparison slack.
    bool boundary = false;
};

struct EquilibriumPoint {
    double t = 0, s = 0;
    CaseId id = CaseId::C10;
    double p_star = 0, bL_star = 0, b1_star = 0, b2_star = 0, q1_star = 0, q2_star = 0;
    bool non_unique = false;
    bool boundary = false;
};

struct Classification {
    CaseId id = CaseId::C10;
    bool boundary = false;
    std::vector<CaseId> matched;
};

/// (r - r0)/sigma^2 - 2 beta g1(t), the bracket shared by all investment amounts.
double investment_bracket(double t, const FinancialMarket& m);

Investments investment_strategies(double t, double s, const CheckedScenario& cfg);

/// Whether the full condition set of case c holds at these kernels (relative slack 1e-12).
bool case_conditions_hold(CaseId c, const KernelEval& k, const CheckedScenario& cfg);

/// Scans cases 1 -> 10. When several match, `boundary` is set and the case with
/// the highest reinsurer objective wins, ties going to the lowest number.
/// Throws NoCaseMatched with per-condition diagnostics when nothing holds.
Classification classify(const KernelEval& k, const CheckedScenario& cfg);

/// Premium-dependent part of the reinsurer's generator divided by |V| for a case's strategy.
double reinsurer_objective(const KernelEval& k, const PremiumRetention& st, const CheckedScenario& cfg);
CaseId classify_case(double t, const CheckedScenario& cfg);

/// Premium and retentions prescribed by case c, whether or not its conditions hold.
PremiumRetention case_strategy(CaseId c, const KernelEval& k, const CheckedScenario& cfg);

PremiumRetention premium_and_retention(double t, const CheckedScenario& cfg);

/// min{(p - a_i)/(gamma_i sigma_i^2 phi) + k_i rho sigma_j q_other / sigma_i, 1}.
double best_response_retention(double t, double p, double q_other, int i, const CheckedScenario& cfg);
double best_response_retention(const KernelEval& k, double p, double q_other, int i, const CheckedScenario& cfg);

/// The followers' joint response to a premium: the unique fixed point of the two
/// projected best responses, solved by enumerating which caps bind.
Retentions follower_response(const KernelEval& k, double p, const CheckedScenario& cfg);

EquilibriumPoint equilibrium_point(double t, double s, const CheckedScenario& cfg);

/// The memoryless equilibrium: the same scenario with every delay switched off.
EquilibriumPoint no_delay_strategy(double t, double s, const CheckedScenario& cfg);

/// One reinsurer, one insurer (rho = 1, k = 0).
struct SingleInsurerScenario {
    FinancialMarket market;
    double a1 = 4, sigma1 = 3, theta1 = 1.2, theta_bar = 2;
    double gamma_L = 0.1, gamma1 = 2;
    DelaySpec delay_L, delay_1;

    double c_F() const { return (1 + theta1) * a1; }
    double c_bar() const { return (1 + theta_bar) * a1; }
};

/// Drops insurer 2 from a checked scenario.
SingleInsurerScenario reduce_to_single_insurer(const CheckedScenario& cfg);

struct SingleInsurerPoint {
    double t = 0, s = 0;
    int case_no = 4;
    double p = 0, bL = 0, q1 = 0, b1 = 0;
    bool non_unique = false;
    /// Kernel values used, for identity checks.
    double phi_L = 1, phi_F = 1, M = 0;
};

SingleInsurerPoint single_insurer_strategy(double t, double s, const SingleInsurerScenario& sc);

}  // namespace stackgame
