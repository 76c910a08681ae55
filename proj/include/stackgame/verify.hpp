#pragma once

#include <stackgame/simulator.hpp>
#include <stackgame/value_functions.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace stackgame {

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
    /// Not applicable to this scenario. Counts as passing.
    bool skipped = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckLine> checks;
    double seconds = 0;

    bool pass() const;
    std::size_t failures() const;
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    /// Used by the montecarlo suite only.
    SimConfig sim;
};

/// table9, cases, oracle, ode, hjb, signs, variance, montecarlo.
std::vector<std::string> suite_names();

/// Suites run by "all". The Monte Carlo run is long and must be asked for.
std::vector<std::string> default_suites();

/// Throws Error on an unknown name.
SuiteReport run_suite(const std::string& name, const CheckedScenario& cfg, const VerifyOptions& opt = {});

/// True when cfg carries the reference parameters that table9 and cases compare against.
bool is_reference_scenario(const CheckedScenario& cfg);

/// Scenario near `base` with every free parameter scaled by U(0.7, 1.3)
/// (k_i and rho redrawn), redrawn until it validates.
ScenarioConfig random_scenario(const ScenarioConfig& base, std::uint64_t seed, int draw);

/// Closed-form values at t0 for constant wealth history x0 before t0.
struct StartValues {
    ValueEval L, F1, F2;
    double y_L = 0, y_1 = 0, y_2 = 0;
};
StartValues start_values(const CheckedScenario& cfg, double t0 = 0);

/// Integer thousandths of x, for comparisons with three-decimal tables.
long thousandths(double x);

/// Reference table at t = 0..10: with delay p, q1, q2, then without delay p, q1, q2.
const std::vector<std::vector<double>>& reference_table();

}  // namespace stackgame
