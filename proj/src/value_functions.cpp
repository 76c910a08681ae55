#include <stackgame/value_functions.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stackgame {

namespace {

constexpr double kAbsTol = 1e-10;
constexpr unsigned kMaxDepth = 14;

// One (agent, case) g2 in the form closed(t) + int_T^t integrand(s) ds.
struct Form {
    double closed = 0;
    double closed_rate = 0;
    double integrand = 0;
};

// Insurer roles inside a case.
enum class Role { AllFull, Capped, Interior, BothInterior };

Role insurer_role(CaseId c, int i) {
    const int n = case_number(c);
    if (n == 1) return Role::AllFull;
    if (n >= 8) return Role::BothInterior;
    const int capped = n <= 4 ? 1 : 2;
    return i == capped ? Role::Capped : Role::Interior;
}

// The interior insurer of a one-capped case.
int interior_insurer(CaseId c) { return case_number(c) <= 4 ? 2 : 1; }

// (phi - 1)/rate and (phi^2 - 1)/rate with their t-derivatives.
struct Growth {
    double e1, e1_rate, e2, e2_rate;
};

Growth growth(double rate, double tau, double phi) {
    return {growth_integral(rate, tau), -phi, 2.0 * growth_integral(2.0 * rate, tau), -2.0 * phi * phi};
}

Form leader_form(CaseId c, double s, const KernelEval& k, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double gL = pr.gamma_L, fL = k.phi_L;
    Form f;
    f.closed = k.g_plain;
    f.closed_rate = eval_g_plain_rate(s, m);
    const int n = case_number(c);
    if (n == 1) return f;

    const Growth G = growth(cfg.rate_L(), m.T - s, fL);
    const double p = case_strategy(c, k, cfg).p;
    if (n <= 7) {
        const int j = interior_insurer(c), i = 3 - j;
        const double sj = cl.sig(j), gj = pr.gamma(j), fF = k.phi_Fi(j);
        const double st = sj - pr.k(j) * cl.rho * cl.sig(i);
        const double u = p - cl.a(j);
        const double mj = 1.0 - k.c(j);
        const double ratio = fL / fF;
        f.closed += gL * gL * st * st * G.e2 / 4.0;
        f.closed_rate += gL * gL * st * st * G.e2_rate / 4.0;
        f.integrand = u * gL * mj * (fL + (gL / gj) * fL * fL / fF)
                      - u * u * gL / (gj * sj * sj) * (ratio + gL / (2.0 * gj) * ratio * ratio);
        return f;
    }

    const double s1 = cl.sigma1, s2 = cl.sigma2, rho = cl.rho;
    const double g1 = pr.gamma1, g2 = pr.gamma2, f1 = k.phi_F1, f2 = k.phi_F2;
    const double tot = s1 * s1 + s2 * s2 + 2.0 * rho * s1 * s2;
    const double u1 = p - cl.a1, u2 = p - cl.a2;
    f.closed += gL * gL * tot * G.e2 / 4.0;
    f.closed_rate += gL * gL * tot * G.e2_rate / 4.0;
    f.integrand = k.K * gL
                  * (fL * k.D_F1 * u1 / (g1 * f1) + fL * k.D_F2 * u2 / (g2 * f2)
                     - fL * k.D_bar_F1 * u1 * u1 / (g1 * s1 * s1 * f1) - fL * k.D_bar_F2 * u2 * u2 / (g2 * s2 * s2 * f2)
                     - rho * fL * k.D_F12 * u1 * u2 / (g1 * g2 * s1 * s2 * f1 * f2));
    return f;
}

Form insurer_form(int i, CaseId c, double s, const KernelEval& k, const CheckedScenario& cfg) {
    const int j = 3 - i;
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double gi = pr.gamma(i), gj = pr.gamma(j), ki = pr.k(i), kj = pr.k(j);
    const double si = cl.sig(i), sj = cl.sig(j), rho = cl.rho;
    const double k12 = pr.k1 * pr.k2;
    const double phi = k.phi_Fi(i);
    const double loading = cl.theta(i) * cl.a(i) - ki * cl.theta(j) * cl.a(j);
    const Growth G = growth(cfg.rate_F(i), m.T - s, phi);

    Form f;
    f.closed = k.g_plain - gi * loading * G.e1;
    f.closed_rate = eval_g_plain_rate(s, m) - gi * loading * G.e1_rate;

    const Role role = insurer_role(c, i);
    if (role == Role::AllFull) {
        const double v = gi * gi * (si * si + ki * ki * sj * sj - 2.0 * rho * ki * si * sj) / 4.0;
        f.closed += v * G.e2;
        f.closed_rate += v * G.e2_rate;
        return f;
    }

    const double p = case_strategy(c, k, cfg).p;
    if (role == Role::Capped) {
        const double v = gi * gi * si * si * (1.0 + k12 * rho * k12 * rho - 2.0 * k12 * rho * rho) / 4.0;
        f.closed += v * G.e2;
        f.closed_rate += v * G.e2_rate;
        const double u = p - cl.a(j);
        const double lin = -1.0 + kj * rho * si / sj + k12 * rho * gi * si / (gj * sj) - rho * si * gi / (gj * sj);
        f.integrand = -ki * gi / (gj * sj * sj) * (1.0 + ki * gi / (2.0 * gj)) * u * u - ki * gi * lin * u * phi;
        return f;
    }
    if (role == Role::Interior) {
        // Here insurer i is the interior one and j is capped.
        const double v = (ki * gi * sj) * (ki * gi * sj) * (1.0 - rho * rho) / 4.0;
        f.closed += v * G.e2;
        f.closed_rate += v * G.e2_rate;
        const double u = p - cl.a(i);
        f.integrand = u * u / (2.0 * si * si) - gi * (1.0 - ki * rho * sj / si) * u * phi;
        return f;
    }

    const double K = k.K;
    const double ui = p - cl.a(i), uj = p - cl.a(j);
    const double quad = (1.0 - k12 * rho * k12 * rho) / (si * si) * ui * ui
                        - ki * gi * (2.0 * gj * (1.0 - k12 * rho * rho) + ki * gi * (1.0 - rho * rho)) / (gj * sj * gj * sj) * uj * uj
                        - 2.0 * ki * rho * (-gi * (1.0 - k12) + kj * gj * (1.0 - k12 * rho * rho)) / (si * sj * gj) * ui * uj;
    f.integrand = -gi * phi * ui + ki * gi * phi * uj + K * K / 2.0 * quad;
    return f;
}

Form agent_form(Agent a, CaseId c, double s, const CheckedScenario& cfg) {
    const KernelEval k = eval_case_constants(s, cfg);
    switch (a) {
        case Agent::L: return leader_form(c, s, k, cfg);
        case Agent::F1: return insurer_form(1, c, s, k, cfg);
        case Agent::F2: return insurer_form(2, c, s, k, cfg);
    }
    return {};
}

double integrate(Agent a, CaseId c, double lo, double hi, const CheckedScenario& cfg) {
    if (hi <= lo) return 0.0;
    auto f = [&](double s) { return agent_form(a, c, s, cfg).integrand; };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // The relative tolerance is derived from the absolute target. Asking for more
    // than round-off allows makes Boost subdivide and inflates its error estimate.
    double err = 0, l1 = 0;
    GK::integrate(f, lo, hi, 0, 0.0, &err, &l1);
    const double tol = std::clamp(0.1 * kAbsTol / std::max(l1, 1e-300), 1e-13, 1e-6);
    const double v = GK::integrate(f, lo, hi, kMaxDepth, tol, &err);
    if (!(err <= kAbsTol) || !std::isfinite(v)) {
        std::ostringstream os;
        os.precision(6);
        os << "g2 quadrature on [" << lo << ", " << hi << "] case " << case_number(c) << " reached error " << err;
        throw QuadratureFailure(os.str());
    }
    return v;
}

// Contribution of one case segment [lo, hi] to g2(lo), given g2(hi) is accounted for.
double segment_increment(Agent a, CaseId c, double lo, double hi, const CheckedScenario& cfg) {
    return agent_form(a, c, lo, cfg).closed - agent_form(a, c, hi, cfg).closed - integrate(a, c, lo, hi, cfg);
}

CaseId case_at(double t, const CheckedScenario& cfg) { return classify(eval_case_constants(t, cfg), cfg).id; }

constexpr Agent kAgents[] = {Agent::L, Agent::F1, Agent::F2};

void set(G2Eval& g, Agent a, double v) {
    (a == Agent::L ? g.g2_L : a == Agent::F1 ? g.g2_F1 : g.g2_F2) = v;
}

// Generator pieces shared by the residuals.
struct Exponential {
    double V, Es, Ess;
};

Exponential exponential(double exponent, double gamma, double g1, double s, double beta) {
    const double sp = std::pow(s, -2.0 * beta);
    return {-std::exp(exponent) / gamma, -2.0 * beta * g1 * sp / s, 2.0 * beta * (2.0 * beta + 1.0) * g1 * sp / (s * s)};
}

template <std::size_t N>
Residual finish(const double (&terms)[N]) {
    Residual r;
    for (double x : terms) {
        r.value += x;
        r.scale = std::max(r.scale, std::abs(x));
    }
    return r;
}

}  // namespace

std::vector<CaseSegment> case_timeline(double t, const CheckedScenario& cfg, int scan_points) {
    const double T = cfg.market().T;
    std::vector<CaseSegment> out;
    if (t >= T) {
        out.push_back({T, T, case_at(T, cfg)});
        return out;
    }
    scan_points = std::max(scan_points, 2);
    double prev_t = t;
    CaseId prev = case_at(t, cfg);
    out.push_back({t, T, prev});
    for (int n = 1; n <= scan_points; ++n) {
        const double u = n == scan_points ? T : t + (T - t) * n / scan_points;
        const CaseId cur = case_at(u, cfg);
        if (cur != prev) {
            double lo = prev_t, hi = u;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, T); ++it) {
                const double mid = 0.5 * (lo + hi);
                (case_at(mid, cfg) == prev ? lo : hi) = mid;
            }
            const double sw = 0.5 * (lo + hi);
            out.back().hi = sw;
            out.push_back({sw, T, cur});
            prev = cur;
        }
        prev_t = u;
    }
    return out;
}

G2Eval g2_eval(double t, CaseId c, const CheckedScenario& cfg) {
    const double T = cfg.market().T;
    G2Eval g;
    g.t = t;
    g.id = c;
    for (Agent a : kAgents) set(g, a, t >= T ? 0.0 : segment_increment(a, c, t, T, cfg));
    return g;
}

G2Eval g2_eval(double t, const CheckedScenario& cfg) {
    const auto segs = case_timeline(t, cfg);
    G2Eval g;
    g.t = t;
    g.id = segs.front().id;
    g.stitched = segs.size() > 1;
    if (t >= cfg.market().T) return g;
    for (Agent a : kAgents) {
        double v = 0;
        for (const auto& seg : segs) v += segment_increment(a, seg.id, seg.lo, seg.hi, cfg);
        set(g, a, v);
    }
    return g;
}

G2Rates g2_rates(double t, CaseId c, const CheckedScenario& cfg) {
    G2Rates r;
    const KernelEval k = eval_case_constants(t, cfg);
    const Form L = leader_form(c, t, k, cfg), F1 = insurer_form(1, c, t, k, cfg), F2 = insurer_form(2, c, t, k, cfg);
    r.L = L.closed_rate + L.integrand;
    r.F1 = F1.closed_rate + F1.integrand;
    r.F2 = F2.closed_rate + F2.integrand;
    return r;
}

ValueEval value_L(double t, double x_L, double y_L, double s, double g2, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const double gL = cfg.prefs().gamma_L;
    ValueEval v;
    v.t = t;
    v.s = s;
    v.x = x_L;
    v.y = y_L;
    v.exponent = -gL * eval_phi(t, cfg.rate_L(), m.T) * (x_L + cfg.config().delay_L.eta * y_L)
                 + eval_g1(t, m) * std::pow(s, -2.0 * m.beta) + g2;
    v.value = -std::exp(v.exponent) / gL;
    return v;
}

ValueEval value_L(double t, double x_L, double y_L, double s, const CheckedScenario& cfg) {
    return value_L(t, x_L, y_L, s, g2_eval(t, cfg).g2_L, cfg);
}

ValueEval value_F(double t, double x_hat, double y_i, double y_j, double s, int i, double g2,
                  const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const double gi = cfg.prefs().gamma(i);
    const double eta_i = cfg.config().delay(i).eta, eta_j = cfg.config().delay(3 - i).eta;
    ValueEval v;
    v.t = t;
    v.s = s;
    v.x = x_hat;
    v.y = y_i;
    v.y_other = y_j;
    v.exponent = -gi * eval_phi(t, cfg.rate_F(i), m.T) * (x_hat + eta_i * y_i - cfg.prefs().k(i) * eta_j * y_j)
                 + eval_g1(t, m) * std::pow(s, -2.0 * m.beta) + g2;
    v.value = -std::exp(v.exponent) / gi;
    return v;
}

ValueEval value_F(double t, double x_hat, double y_i, double y_j, double s, int i, const CheckedScenario& cfg) {
    return value_F(t, x_hat, y_i, y_j, s, i, g2_eval(t, cfg).get(insurer_agent(i)), cfg);
}

Residual hjb_residual_L(double t, const LeaderState& st, double p, double b_L, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const double gL = cfg.prefs().gamma_L;
    const auto& d = cfg.config().delay_L;
    const auto& co = cfg.coeffs_L();
    const KernelEval k = eval_case_constants(t, cfg);
    const Classification cls = classify(k, cfg);

    const double g2 = g2_eval(t, cfg).g2_L;
    const double g2_rate = g2_rates(t, cls.id, cfg).L;
    const ValueEval ve = value_L(t, st.x, st.y, st.s, g2, cfg);
    const double phi = k.phi_L, lam = cfg.rate_L();
    const Exponential e = exponential(ve.exponent, gL, k.g1, st.s, m.beta);
    const double V = ve.value;
    const double Vx = -gL * phi * V, Vxx = gL * gL * phi * phi * V, Vy = d.eta * Vx;
    const double Vs = V * e.Es, Vss = V * (e.Es * e.Es + e.Ess), Vxs = -gL * phi * e.Es * V;
    const double sp = std::pow(st.s, -2.0 * m.beta);
    const double Vt = V * (gL * lam * phi * (st.x + d.eta * st.y) + eval_g1_rate(t, m) * sp + g2_rate);

    const Retentions q = follower_response(k, p, cfg);
    const double c1 = 1 - q.q1, c2 = 1 - q.q2;
    const double var = c1 * c1 * cl.sigma1 * cl.sigma1 + c2 * c2 * cl.sigma2 * cl.sigma2
                       + 2.0 * c1 * c2 * cl.sigma1 * cl.sigma2 * cl.rho;
    const double s2b = std::pow(st.s, 2.0 * m.beta);
    const double terms[] = {
        Vt,
        Vx * ((p - cl.a1) * c1 + (p - cl.a2) * c2),
        Vx * ((m.r - m.r0) * b_L),
        Vx * (co.A * st.x + co.B * st.y + co.C * st.z),
        0.5 * var * Vxx,
        0.5 * b_L * b_L * m.sigma * m.sigma * s2b * Vxx,
        (st.x - d.alpha * st.y - std::exp(-d.alpha * d.h) * st.z) * Vy,
        m.r * st.s * Vs,
        0.5 * m.sigma * m.sigma * s2b * st.s * st.s * Vss,
        b_L * m.sigma * m.sigma * s2b * st.s * Vxs,
    };
    return finish(terms);
}

Residual hjb_residual_F(double t, const InsurerState& st, double q_i, double b_i, int i, const CheckedScenario& cfg) {
    const int j = 3 - i;
    const auto& m = cfg.market();
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double gi = pr.gamma(i), ki = pr.k(i);
    const auto& di = cfg.config().delay(i);
    const auto& dj = cfg.config().delay(j);
    const auto& ci = cfg.coeffs(i);
    const auto& cj = cfg.coeffs(j);
    const KernelEval k = eval_case_constants(t, cfg);
    const Classification cls = classify(k, cfg);
    const PremiumRetention eq = case_strategy(cls.id, k, cfg);
    const Investments inv = investment_strategies(t, st.s, cfg);
    const double qj = i == 1 ? eq.q2 : eq.q1;
    const double bj = i == 1 ? inv.b2 : inv.b1;
    const double p = eq.p;

    const Agent me = insurer_agent(i);
    const double g2 = g2_eval(t, cfg).get(me);
    const double g2_rate = g2_rates(t, cls.id, cfg).get(me);
    const double x_hat = st.x_i - ki * st.x_j;
    const ValueEval ve = value_F(t, x_hat, st.y_i, st.y_j, st.s, i, g2, cfg);
    const double phi = k.phi_Fi(i), lam = cfg.rate_F(i);
    const Exponential e = exponential(ve.exponent, gi, k.g1, st.s, m.beta);
    const double V = ve.value;
    const double Vx = -gi * phi * V, Vxx = gi * gi * phi * phi * V;
    const double Vyi = di.eta * Vx, Vyj = -ki * dj.eta * Vx;
    const double Vs = V * e.Es, Vss = V * (e.Es * e.Es + e.Ess), Vxs = -gi * phi * e.Es * V;
    const double sp = std::pow(st.s, -2.0 * m.beta);
    const double Vt = V * (gi * lam * phi * (x_hat + di.eta * st.y_i - ki * dj.eta * st.y_j)
                           + eval_g1_rate(t, m) * sp + g2_rate);

    const double si = cl.sig(i), sj = cl.sig(j);
    const double bd = b_i - ki * bj;
    const double s2b = std::pow(st.s, 2.0 * m.beta);
    const double var = q_i * q_i * si * si + ki * ki * qj * qj * sj * sj - 2.0 * q_i * si * ki * qj * sj * cl.rho;
    const double terms[] = {
        Vt,
        Vx * (cl.theta(i) * cl.a(i) - ki * cl.theta(j) * cl.a(j)),
        Vx * (-(p - cl.a(i)) * (1 - q_i) + ki * (p - cl.a(j)) * (1 - qj)),
        Vx * (ci.A * st.x_i - ki * cj.A * st.x_j + ci.B * st.y_i - ki * cj.B * st.y_j + ci.C * st.z_i - ki * cj.C * st.z_j),
        Vx * ((m.r - m.r0) * bd),
        0.5 * var * Vxx,
        0.5 * bd * bd * m.sigma * m.sigma * s2b * Vxx,
        (st.x_i - di.alpha * st.y_i - std::exp(-di.alpha * di.h) * st.z_i) * Vyi,
        (st.x_j - dj.alpha * st.y_j - std::exp(-dj.alpha * dj.h) * st.z_j) * Vyj,
        m.r * st.s * Vs,
        0.5 * m.sigma * m.sigma * s2b * st.s * st.s * Vss,
        bd * m.sigma * m.sigma * s2b * st.s * Vxs,
    };
    return finish(terms);
}

}  // namespace stackgame
