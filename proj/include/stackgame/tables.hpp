#pragma once

#include <stackgame/equilibrium.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stackgame {

/// start:end:count with count >= 2 and start != end.
struct GridSpec1D {
    double start = 0, end = 0;
    int count = 0;

    /// Node k as (start (n-1) + (end - start) k) / (n-1), which is exact on integer grids.
    double at(int k) const;
    std::vector<double> values() const;
};

/// Parses "start:end:count". Throws Error on malformed or degenerate input.
GridSpec1D parse_grid(const std::string& text);

/// Times on [0, T] snapped to multiples of T / 2^20 when within 1e-12 of one.
std::vector<double> time_grid(const GridSpec1D& g, double T);

struct StrategyRow {
    double t = 0;
    int case_no = 0;
    double p_star = 0, q1_star = 0, q2_star = 0, bL_star = 0, b1_star = 0, b2_star = 0;
    double p_nodelay = 0, q1_nodelay = 0, q2_nodelay = 0;
};

StrategyRow strategy_row(double t, double s, const CheckedScenario& cfg);
std::vector<StrategyRow> strategy_table(const std::vector<double>& times, double s, const CheckedScenario& cfg);
void write_strategy_csv(std::ostream& os, const std::vector<StrategyRow>& rows);

/// param=start:end:count.
struct SweepSpec {
    std::string param;
    GridSpec1D grid;
};

SweepSpec parse_sweep(const std::string& text);

struct SweepRow {
    double value = 0;
    std::optional<StrategyRow> row;
    /// Validation or evaluation failure for this point.
    std::string error;
};

/// One row per grid value at time t. Sweeping delay_2.eta marks it as supplied;
/// otherwise it is re-derived at each point.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepSpec& sw, double t, double s);
void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows);

/// 12 significant digits.
std::string fmt12(double x);

}  // namespace stackgame
