#pragma once

#include <stackgame/equilibrium.hpp>

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace stackgame {

/// What to do when a step drives S to or below zero.
enum class PriceFloor {
    Absorb,    ///< clamp S to 1e-8 and flag the path
    Resample,  ///< redraw the path from a fresh substream
};

/// Discretisation of the price. Euler can step S below zero; LogEuler applies
/// the Euler step to log S and stays positive.
enum class PriceScheme { Euler, LogEuler };

struct SimConfig {
    double dt = 1e-3;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 20240601;
    double t_start = 0;
    /// Negative means the scenario horizon T.
    double t_end = -1;
    /// Normal triples drawn per step. Runs with dt and 2 substeps share
    /// Brownian paths with runs at dt/2 and 1 substep.
    int brownian_substeps = 1;
    PriceFloor floor = PriceFloor::Absorb;
    PriceScheme scheme = PriceScheme::Euler;
    /// Steps between exact recomputations of Y from the wealth buffer. 0 disables.
    int reconcile_every = 1000;
    /// 0 reads STACKGAME_THREADS, falling back to the hardware count.
    unsigned threads = 0;
    /// Keep per-path terminal states in the result.
    bool keep_paths = false;
};

constexpr double kPriceFloor = 1e-8;

/// Controls at one time. Investments are b = c s^{-2 beta}.
struct PolicyRow {
    double p = 0, q1 = 1, q2 = 1;
    double cL = 0, c1 = 0, c2 = 0;
};

using Policy = std::function<PolicyRow(double t)>;

Policy equilibrium_policy(const CheckedScenario& cfg);
/// Memoryless equilibrium strategies applied to the delayed dynamics.
Policy nodelay_policy(const CheckedScenario& cfg);
/// Scales one control: p, q1, q2, bL, b1 or b2.
Policy scaled_policy(Policy base, const std::string& field, double factor);
/// "equilibrium", "nodelay" or "perturb:<field>=<factor>". Throws Error otherwise.
Policy parse_policy(const std::string& text, const CheckedScenario& cfg);

/// Past wealth on grid nodes over [t - h, t]. Nodes before the first push read x0.
class DelayBuffer {
public:
    DelayBuffer(double x0 = 0, int lag_steps = 0);
    /// X at node k - back, back in [0, lag].
    double at(int back) const;
    void push(double x);
    int lag() const { return lag_; }

private:
    std::vector<double> ring_;
    int lag_ = 0;
    std::size_t head_ = 0;
};

struct AgentPath {
    double X = 0, Y = 0;
    DelayBuffer past;
    /// Pointwise delay X(t - h).
    double Z() const { return past.at(past.lag()); }
};

struct PathState {
    double t = 0, S = 1;
    AgentPath L, F1, F2;
    /// Set when S hit the floor. The price then stays there and the risky positions are closed.
    bool flagged = false;

    AgentPath& agent(int n) { return n == 0 ? L : n == 1 ? F1 : F2; }
    const AgentPath& agent(int n) const { return n == 0 ? L : n == 1 ? F1 : F2; }
};

struct Increments {
    double dW1 = 0, dW2 = 0, dW = 0;
};

/// Brownian increments of one path attempt, seeded from (seed, path, attempt).
/// dW1 and dW2 have correlation rho, dW is independent of both.
class IncrementStream {
public:
    IncrementStream(std::uint64_t seed, std::uint64_t path, int attempt, double rho, double dt, int substeps = 1);
    Increments next();

private:
    std::mt19937_64 rng_;
    boost::random::normal_distribution<double> normal_;
    double rho_, rho_perp_, sub_sd_;
    int substeps_;
};

/// Per-agent delay data on the step grid.
struct DelayGrid {
    DelaySpec spec;
    DerivedDelayCoeffs co;
    int lag_steps = 0;
    double decay = 1, tail = 1, w0 = 0, w1 = 0;
};

/// Scenario constants bound to a step size.
struct SimModel {
    FinancialMarket market;
    ClaimModel claims;
    double dt = 0;
    PriceScheme scheme = PriceScheme::Euler;
    DelayGrid d[3];  // reinsurer, insurer 1, insurer 2

    SimModel(const CheckedScenario& cfg, double dt);
};

PathState initial_state(const CheckedScenario& cfg, const SimModel& model, double t0);

/// One Euler-Maruyama step. Y follows the exact recurrence for the
/// piecewise-linear wealth path, Z is read from the buffer.
void step(PathState& st, const PolicyRow& pol, const Increments& inc, const SimModel& model);

/// Y recomputed from the buffer with the same piecewise-linear weights.
double recompute_y(const AgentPath& a, const DelayGrid& g, double dt);

struct MCEstimate {
    double mean = 0, std_error = 0;
    std::size_t n_paths = 0;
};

/// Pairwise-summed mean and standard error.
MCEstimate estimate(const std::vector<double>& values);

struct PathTerminal {
    std::size_t path_id = 0;
    double X_L = 0, X1 = 0, X2 = 0, Y_L = 0, Y1 = 0, Y2 = 0, S = 0;
    bool flagged = false;
};

struct SimResult {
    MCEstimate L, F1, F2;
    std::size_t flagged = 0;
    double flagged_fraction = 0;
    std::vector<PathTerminal> paths;
};

SimResult simulate_terminal_utilities(const CheckedScenario& cfg, const SimConfig& sim, const Policy& policy);

/// Per-path CSV: path_id, X_L_T, X1_T, X2_T, Y_L_T, Y1_T, Y2_T, S_T, flagged.
void write_paths_csv(std::ostream& os, const std::vector<PathTerminal>& paths);

/// Threads used when SimConfig::threads is 0.
unsigned default_threads();

}  // namespace stackgame
