#include <stackgame/simulator.hpp>

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace stackgame {

namespace {

constexpr int kMaxResamples = 100;

// Weight of the right endpoint in int_0^tau e^{a v} X(v) dv for linear X.
double right_weight(double a, double tau) {
    const double x = a * tau;
    if (std::abs(x) < 0.1) {
        // tau * sum_n x^n / (n! (n + 2))
        double term = 1.0, sum = 0.0;
        for (int n = 0; n < 16; ++n) {
            if (n > 0) term *= x / n;
            sum += term / (n + 2);
        }
        return tau * sum;
    }
    return (std::exp(x) * (x - 1.0) + 1.0) / (a * x);
}

// Pairwise summation, so the result does not depend on how paths were scheduled.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double utility(double gamma, double w) { return -std::exp(-gamma * w) / gamma; }

int lag_steps(double h, double dt) {
    const double m = std::round(h / dt);
    if (std::abs(m * dt - h) > 1e-9) {
        std::ostringstream os;
        os << "dt = " << dt << " does not divide the delay h = " << h;
        throw Error(os.str());
    }
    return static_cast<int>(m);
}

}  // namespace

Policy equilibrium_policy(const CheckedScenario& cfg) {
    return [cfg](double t) {
        const EquilibriumPoint e = equilibrium_point(t, 1.0, cfg);
        return PolicyRow{e.p_star, e.q1_star, e.q2_star, e.bL_star, e.b1_star, e.b2_star};
    };
}

Policy nodelay_policy(const CheckedScenario& cfg) {
    return equilibrium_policy(validate(cfg.config().without_delay()));
}

Policy scaled_policy(Policy base, const std::string& field, double factor) {
    double PolicyRow::*member = nullptr;
    if (field == "p") member = &PolicyRow::p;
    else if (field == "q1") member = &PolicyRow::q1;
    else if (field == "q2") member = &PolicyRow::q2;
    else if (field == "bL") member = &PolicyRow::cL;
    else if (field == "b1") member = &PolicyRow::c1;
    else if (field == "b2") member = &PolicyRow::c2;
    else throw Error("unknown policy field '" + field + "' (expected p, q1, q2, bL, b1 or b2)");
    return [base = std::move(base), member, factor](double t) {
        PolicyRow r = base(t);
        r.*member *= factor;
        return r;
    };
}

Policy parse_policy(const std::string& text, const CheckedScenario& cfg) {
    if (text == "equilibrium") return equilibrium_policy(cfg);
    if (text == "nodelay") return nodelay_policy(cfg);
    const std::string prefix = "perturb:";
    const auto eq = text.find('=');
    if (text.rfind(prefix, 0) == 0 && eq != std::string::npos) {
        const std::string field = text.substr(prefix.size(), eq - prefix.size());
        std::size_t used = 0;
        double factor = 0;
        try {
            factor = std::stod(text.substr(eq + 1), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - eq - 1 || !std::isfinite(factor))
            throw Error("bad perturbation factor in '" + text + "'");
        return scaled_policy(equilibrium_policy(cfg), field, factor);
    }
    throw Error("unknown policy '" + text + "' (expected equilibrium, nodelay or perturb:<field>=<factor>)");
}

DelayBuffer::DelayBuffer(double x0, int lag_steps)
    : ring_(static_cast<std::size_t>(std::max(lag_steps, 0)) + 1, x0), lag_(std::max(lag_steps, 0)) {}

double DelayBuffer::at(int back) const {
    const std::size_t n = ring_.size();
    return ring_[(head_ + n - static_cast<std::size_t>(back) % n) % n];
}

void DelayBuffer::push(double x) {
    head_ = (head_ + 1) % ring_.size();
    ring_[head_] = x;
}

SimModel::SimModel(const CheckedScenario& cfg, double dt_) : market(cfg.market()), claims(cfg.claims()), dt(dt_) {
    if (!(dt > 0)) throw Error("dt must be positive");
    const DelaySpec specs[3] = {cfg.config().delay_L, cfg.config().delay_1, cfg.config().delay_2};
    const DerivedDelayCoeffs cos[3] = {cfg.coeffs_L(), cfg.coeffs(1), cfg.coeffs(2)};
    for (int n = 0; n < 3; ++n) {
        DelayGrid& g = d[n];
        g.spec = specs[n];
        g.co = cos[n];
        g.lag_steps = lag_steps(g.spec.h, dt);
        const double a = g.spec.alpha;
        g.decay = std::exp(-a * dt);
        g.tail = std::exp(-a * g.spec.h);
        g.w1 = right_weight(a, dt);
        g.w0 = growth_integral(a, dt) - g.w1;
    }
}

PathState initial_state(const CheckedScenario& cfg, const SimModel& model, double t0) {
    PathState st;
    st.t = t0;
    st.S = cfg.market().s0;
    const double x0[3] = {cfg.config().x_L0, cfg.config().x_10, cfg.config().x_20};
    for (int n = 0; n < 3; ++n) {
        const DelayGrid& g = model.d[n];
        AgentPath& a = st.agent(n);
        a.X = x0[n];
        a.past = DelayBuffer(x0[n], g.lag_steps);
        // Wealth equals x0 before the start, so Y = x0 int_{-h}^0 e^{alpha s} ds.
        a.Y = x0[n] * g.spec.h * (g.spec.alpha == 0 ? 1.0 : -std::expm1(-g.spec.alpha * g.spec.h) / (g.spec.alpha * g.spec.h));
    }
    return st;
}

void step(PathState& st, const PolicyRow& pol, const Increments& inc, const SimModel& model) {
    const auto& m = model.market;
    const auto& cl = model.claims;
    const double dt = model.dt;
    const double inv = st.flagged ? 0.0 : std::pow(st.S, -2.0 * m.beta);
    const double vol = m.sigma * std::pow(st.S, m.beta);
    const double b[3] = {pol.cL * inv, pol.c1 * inv, pol.c2 * inv};
    // b sigma S^beta = c sigma S^{-beta}, kept finite for very large S.
    const double expo = st.flagged ? 0.0 : m.sigma * std::pow(st.S, -m.beta);
    const double c[3] = {pol.cL, pol.c1, pol.c2};
    const double q[3] = {0, pol.q1, pol.q2};
    const double dWi[3] = {0, inc.dW1, inc.dW2};

    double next[3];
    for (int n = 0; n < 3; ++n) {
        const AgentPath& a = st.agent(n);
        const auto& co = model.d[n].co;
        const double memory = co.A * a.X + co.B * a.Y + co.C * a.Z();
        double drift, noise;
        if (n == 0) {
            drift = (pol.p - cl.a1) * (1 - pol.q1) + (pol.p - cl.a2) * (1 - pol.q2);
            noise = (1 - pol.q1) * cl.sigma1 * inc.dW1 + (1 - pol.q2) * cl.sigma2 * inc.dW2;
        } else {
            drift = cl.theta(n) * cl.a(n) - (pol.p - cl.a(n)) * (1 - q[n]);
            noise = q[n] * cl.sig(n) * dWi[n];
        }
        drift += memory + (m.r - m.r0) * b[n];
        noise += c[n] * expo * inc.dW;
        next[n] = a.X + drift * dt + noise;
    }

    for (int n = 0; n < 3; ++n) {
        AgentPath& a = st.agent(n);
        const DelayGrid& g = model.d[n];
        const int lag = g.lag_steps;
        if (lag > 0) {
            const double enter = g.w0 * a.X + g.w1 * next[n];
            const double leave = g.w0 * a.past.at(lag) + g.w1 * a.past.at(lag - 1);
            a.Y = g.decay * (a.Y + enter - g.tail * leave);
        }
        a.X = next[n];
        a.past.push(next[n]);
    }

    if (!st.flagged) {
        if (model.scheme == PriceScheme::LogEuler) {
            st.S *= std::exp((m.r - 0.5 * vol * vol) * dt + vol * inc.dW);
        } else {
            st.S += st.S * (m.r * dt + vol * inc.dW);
        }
    }
    st.t += dt;
}

double recompute_y(const AgentPath& a, const DelayGrid& g, double) {
    double acc = 0;
    for (int back = g.lag_steps - 1; back >= 0; --back) {
        acc = acc * g.decay + (g.w0 * a.past.at(back + 1) + g.w1 * a.past.at(back));
    }
    return g.decay * acc;
}

IncrementStream::IncrementStream(std::uint64_t seed, std::uint64_t path, int attempt, double rho, double dt,
                                 int substeps)
    : rho_(rho), rho_perp_(std::sqrt(1.0 - rho * rho)), sub_sd_(std::sqrt(dt / substeps)), substeps_(substeps) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                      static_cast<std::uint32_t>(attempt)};
    rng_.seed(seq);
}

Increments IncrementStream::next() {
    double z1 = 0, z2 = 0, z3 = 0;
    for (int j = 0; j < substeps_; ++j) {
        z1 += normal_(rng_);
        z2 += normal_(rng_);
        z3 += normal_(rng_);
    }
    return {z1 * sub_sd_, (rho_ * z1 + rho_perp_ * z2) * sub_sd_, z3 * sub_sd_};
}

MCEstimate estimate(const std::vector<double>& values) {
    MCEstimate e;
    e.n_paths = values.size();
    if (values.empty()) return e;
    const double n = static_cast<double>(values.size());
    e.mean = pairwise_sum(values.data(), values.size()) / n;
    if (values.size() > 1) {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.mean) * (values[i] - e.mean);
        e.std_error = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (n - 1.0) / n);
    }
    return e;
}

unsigned default_threads() {
    if (const char* env = std::getenv("STACKGAME_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SimResult simulate_terminal_utilities(const CheckedScenario& cfg, const SimConfig& sim, const Policy& policy) {
    if (sim.n_paths < 1) throw Error("n_paths must be at least 1");
    if (sim.brownian_substeps < 1) throw Error("brownian_substeps must be at least 1");
    SimModel model(cfg, sim.dt);
    model.scheme = sim.scheme;
    const double T = cfg.market().T;
    const double t_end = sim.t_end < 0 ? T : sim.t_end;
    const double span = (t_end - sim.t_start) / sim.dt;
    const long n_steps = std::lround(span);
    if (n_steps < 1 || std::abs(n_steps - span) > 1e-6) throw Error("dt must divide [t_start, t_end]");

    std::vector<PolicyRow> rows(static_cast<std::size_t>(n_steps));
    for (long k = 0; k < n_steps; ++k) rows[k] = policy(sim.t_start + k * sim.dt);

    const auto& pr = cfg.prefs();
    const double eta[3] = {cfg.config().delay_L.eta, cfg.config().delay_1.eta, cfg.config().delay_2.eta};
    const double rho = cfg.claims().rho;

    const std::size_t N = sim.n_paths;
    std::vector<double> uL(N), u1(N), u2(N);
    std::vector<PathTerminal> terminals(sim.keep_paths ? N : 0);
    std::vector<char> flagged(N, 0);

    auto run_path = [&](std::size_t path) {
        for (int attempt = 0;; ++attempt) {
            IncrementStream stream(sim.seed, path, attempt, rho, sim.dt, sim.brownian_substeps);
            PathState st = initial_state(cfg, model, sim.t_start);
            bool bad = false;
            for (long k = 0; k < n_steps; ++k) {
                const Increments inc = stream.next();
                step(st, rows[k], inc, model);
                if (!(st.S > 0 && std::isfinite(st.S))) {
                    if (sim.floor == PriceFloor::Resample) {
                        bad = true;
                        break;
                    }
                    st.S = kPriceFloor;
                    st.flagged = true;
                }
                if (sim.reconcile_every > 0 && (k + 1) % sim.reconcile_every == 0) {
                    for (int n = 0; n < 3; ++n) st.agent(n).Y = recompute_y(st.agent(n), model.d[n], sim.dt);
                }
            }
            if (bad) {
                if (attempt + 1 >= kMaxResamples) throw NonPositivePrice("price stayed non-positive after resampling");
                continue;
            }
            const double wL = st.L.X + eta[0] * st.L.Y;
            const double w1 = st.F1.X + eta[1] * st.F1.Y, w2 = st.F2.X + eta[2] * st.F2.Y;
            uL[path] = utility(pr.gamma_L, wL);
            u1[path] = utility(pr.gamma1, w1 - pr.k1 * w2);
            u2[path] = utility(pr.gamma2, w2 - pr.k2 * w1);
            flagged[path] = st.flagged || attempt > 0;
            if (sim.keep_paths) {
                terminals[path] = {path, st.L.X, st.F1.X, st.F2.X, st.L.Y, st.F1.Y, st.F2.Y, st.S, st.flagged || attempt > 0};
            }
            return;
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(sim.threads ? sim.threads : default_threads(),
                                                             static_cast<unsigned>(std::min<std::size_t>(N, 1024))));
    if (threads == 1) {
        for (std::size_t p = 0; p < N; ++p) run_path(p);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t p = w; p < N; p += threads) run_path(p);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    SimResult r;
    r.L = estimate(uL);
    r.F1 = estimate(u1);
    r.F2 = estimate(u2);
    r.flagged = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
    r.flagged_fraction = static_cast<double>(r.flagged) / N;
    r.paths = std::move(terminals);
    return r;
}

void write_paths_csv(std::ostream& os, const std::vector<PathTerminal>& paths) {
    os << "path_id,X_L_T,X1_T,X2_T,Y_L_T,Y1_T,Y2_T,S_T,flagged\n";
    os << std::setprecision(12);
    for (const auto& p : paths) {
        os << p.path_id << ',' << p.X_L << ',' << p.X1 << ',' << p.X2 << ',' << p.Y_L << ',' << p.Y1 << ',' << p.Y2
           << ',' << p.S << ',' << (p.flagged ? 1 : 0) << '\n';
    }
}

}  // namespace stackgame
