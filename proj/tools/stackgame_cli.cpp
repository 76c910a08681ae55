// stackgame: strategies, sweeps, Monte Carlo runs and verification suites.
//
// Exit status: 0 success, 1 a check or threshold failed, 2 usage or validation error.

#include <stackgame/scenario_file.hpp>
#include <stackgame/simulator.hpp>
#include <stackgame/tables.hpp>
#include <stackgame/verify.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

using namespace stackgame;

namespace {

constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Common {
    std::string scenario;
    std::string out;
    std::optional<double> s;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "Scenario file (default: built-in reference parameters)");
    cmd->add_option("--out", c.out, "Output file (default: stdout)");
    cmd->add_option("--s", c.s, "Risky asset price (default: s0)")->check(CLI::PositiveNumber);
}

ScenarioConfig load(const Common& c) { return c.scenario.empty() ? paper_default() : load_scenario(c.scenario); }

// Writes through `fn` to --out or stdout. Binary mode keeps LF endings.
template <class Fn>
void emit(const std::string& path, Fn fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path + "'");
    fn(os);
}

int cmd_strategy(const Common& c, const std::string& tspec) {
    const CheckedScenario cfg = validate(load(c));
    const auto times = time_grid(parse_grid(tspec), cfg.market().T);
    const auto rows = strategy_table(times, c.s.value_or(cfg.market().s0), cfg);
    emit(c.out, [&](std::ostream& os) { write_strategy_csv(os, rows); });
    return 0;
}

int cmd_sweep(const Common& c, const std::string& spec, double t) {
    const ScenarioConfig base = load(c);
    const SweepSpec sw = parse_sweep(spec);
    const double s = c.s.value_or(base.market.s0);
    const auto rows = run_sweep(base, sw, t, s);
    emit(c.out, [&](std::ostream& os) { write_sweep_csv(os, sw.param, rows); });
    int failed = 0;
    for (const auto& r : rows) {
        if (!r.row) {
            ++failed;
            std::cerr << sw.param << " = " << fmt12(r.value) << ": " << r.error << '\n';
        }
    }
    return failed ? kFail : 0;
}

void print_estimates(std::ostream& os, const std::string& label, const SimResult& r, const StartValues& v) {
    const MCEstimate* est[3] = {&r.L, &r.F1, &r.F2};
    const ValueEval* closed[3] = {&v.L, &v.F1, &v.F2};
    const char* names[3] = {"reinsurer", "insurer1", "insurer2"};
    for (int a = 0; a < 3; ++a) {
        const double z = (est[a]->mean - closed[a]->value) / est[a]->std_error;
        os << label << ',' << names[a] << ',' << fmt12(est[a]->mean) << ',' << fmt12(est[a]->std_error) << ','
           << fmt12(closed[a]->value) << ',' << fmt12(z) << '\n';
    }
}

int cmd_simulate(const Common& c, SimConfig sim, const std::string& policy, const std::string& scheme,
                 const std::string& floor) {
    const CheckedScenario cfg = validate(load(c));
    if (scheme == "euler")
        sim.scheme = PriceScheme::Euler;
    else if (scheme == "log-euler")
        sim.scheme = PriceScheme::LogEuler;
    else
        throw CLI::ValidationError("--scheme", "expected euler or log-euler");
    if (floor == "absorb")
        sim.floor = PriceFloor::Absorb;
    else if (floor == "resample")
        sim.floor = PriceFloor::Resample;
    else
        throw CLI::ValidationError("--floor", "expected absorb or resample");
    sim.keep_paths = !c.out.empty();

    const Policy pol = parse_policy(policy, cfg);
    const StartValues v = start_values(cfg, sim.t_start);
    const SimResult r = simulate_terminal_utilities(cfg, sim, pol);

    std::cout << "policy,agent,mc_mean,std_error,closed_form,z\n";
    print_estimates(std::cout, policy, r, v);
    SimResult ref;
    if (policy != "equilibrium") {
        // Same seed, so the comparison uses common random numbers.
        SimConfig plain = sim;
        plain.keep_paths = false;
        ref = simulate_terminal_utilities(cfg, plain, equilibrium_policy(cfg));
        print_estimates(std::cout, "equilibrium", ref, v);
    }
    std::cout << "flagged," << r.flagged << ',' << fmt12(r.flagged_fraction) << '\n';
    if (!c.out.empty()) emit(c.out, [&](std::ostream& os) { write_paths_csv(os, r.paths); });
    if (r.flagged_fraction > 1e-3 || ref.flagged_fraction > 1e-3) {
        std::cerr << "flagged-path fraction above 0.1%\n";
        return kFail;
    }
    return 0;
}

int cmd_verify(const Common& c, const std::string& suite, const VerifyOptions& opt) {
    ScenarioConfig raw = load(c);
    const ValidationReport vr = check(raw);
    if (!vr.ok()) {
        std::cerr << "scenario validation failed:\n" << vr.to_string() << "suites skipped\n";
        return kUsage;
    }
    const CheckedScenario cfg = validate(raw);
    const std::vector<std::string> suites = suite == "all" ? default_suites() : std::vector<std::string>{suite};
    std::size_t failures = 0;
    auto run = [&](std::ostream& os) {
        for (const auto& name : suites) {
            const SuiteReport rep = run_suite(name, cfg, opt);
            for (const auto& ch : rep.checks) {
                os << rep.suite << " | " << ch.name << " | " << (ch.skipped ? "SKIP" : ch.pass ? "PASS" : "FAIL")
                   << " | " << ch.detail << '\n';
            }
            os << rep.suite << " | " << (rep.pass() ? "PASS" : "FAIL") << " in " << fmt12(rep.seconds) << " s\n";
            failures += rep.failures();
        }
    };
    emit(c.out, run);
    return failures ? kFail : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinsurance-investment game with delay: equilibrium strategies, sweeps, simulation, checks"};
    app.require_subcommand(1);

    Common common;
    std::string tspec, sweep_spec, policy = "equilibrium", suite = "all", scheme = "euler", floor = "absorb";
    double t_fixed = 0;
    SimConfig sim;
    VerifyOptions vopt;

    auto* strategy = app.add_subcommand("strategy", "Equilibrium and no-delay strategies on a time grid");
    add_common(strategy, common);
    strategy->add_option("--t", tspec, "Time grid start:end:count")->required();

    auto* sweep = app.add_subcommand("sweep", "Strategies at a fixed time over a parameter grid");
    add_common(sweep, common);
    sweep->add_option("--sweep", sweep_spec, "param=start:end:count, e.g. prefs.k1=0:0.8:9")->required();
    sweep->add_option("--t", t_fixed, "Evaluation time")->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo terminal utilities against the closed-form values");
    add_common(simulate, common);
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--paths", sim.n_paths, "Number of paths")->check(CLI::PositiveNumber);
    simulate->add_option("--dt", sim.dt, "Time step in years")->check(CLI::PositiveNumber);
    simulate->add_option("--policy", policy, "equilibrium, nodelay or perturb:<field>=<factor>");
    simulate->add_option("--scheme", scheme, "Price discretisation: euler or log-euler");
    simulate->add_option("--floor", floor, "Non-positive price handling: absorb or resample");

    auto* verify = app.add_subcommand("verify", "Run verification suites");
    add_common(verify, common);
    verify->add_option("--suite", suite, "all, or one of table9, cases, oracle, ode, hjb, signs, variance, montecarlo");
    verify->add_option("--seed", vopt.seed, "Seed for random draws");
    verify->add_option("--paths", vopt.sim.n_paths, "Paths for the montecarlo suite")->check(CLI::PositiveNumber);
    verify->add_option("--dt", vopt.sim.dt, "Time step for the montecarlo suite")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsage;
    }

    try {
        if (*strategy) return cmd_strategy(common, tspec);
        if (*sweep) return cmd_sweep(common, sweep_spec, t_fixed);
        if (*simulate) return cmd_simulate(common, sim, policy, scheme, floor);
        if (*verify) {
            if (suite != "all") {
                const auto names = suite_names();
                if (std::find(names.begin(), names.end(), suite) == names.end()) {
                    std::cerr << "unknown suite '" << suite << "'\n";
                    return kUsage;
                }
            }
            return cmd_verify(common, suite, vopt);
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what();
        return kUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
