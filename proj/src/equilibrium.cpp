#include <stackgame/equilibrium.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stackgame {

namespace {

constexpr double kSlack = 1e-12;

enum class Op { GE, GT, LE, LT };

struct Condition {
    const char* what;
    double lhs;
    Op op;
    double rhs;

    bool holds() const {
        const double tol = kSlack * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        switch (op) {
            case Op::GE: return lhs >= rhs - tol;
            case Op::GT: return lhs > rhs - tol;
            case Op::LE: return lhs <= rhs + tol;
            case Op::LT: return lhs < rhs + tol;
        }
        return false;
    }
};

const char* op_name(Op op) {
    switch (op) {
        case Op::GE: return ">=";
        case Op::GT: return ">";
        case Op::LE: return "<=";
        case Op::LT: return "<";
    }
    return "?";
}

// K-weighted unconstrained retention of insurer i at premium p.
double coupled_retention(const KernelEval& k, const CheckedScenario& cfg, int i, double p) {
    const int j = 3 - i;
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    const double Ni = (p - cl.a(i)) / (pr.gamma(i) * cl.sig(i) * cl.sig(i) * k.phi_Fi(i));
    const double Nj = (p - cl.a(j)) / (pr.gamma(j) * cl.sig(j) * cl.sig(j) * k.phi_Fi(j));
    return k.K * (Ni + k.c(i) * Nj);
}

// Capped-insurer cases: i keeps everything, j is interior. Case offsets 0/1/2 = c_bar/c_F/interior.
std::vector<Condition> capped_conditions(const KernelEval& k, int i, int sub) {
    const int j = 3 - i;
    const double cj = k.c(j);
    const double Mj = k.M_F(j);
    const double qi_cbar = k.K * (k.N_cbar(i) + k.c(i) * k.N_cbar(j));
    const double qi_c = k.K * (k.N_c(i) + k.c(i) * k.N_c(j));
    switch (sub) {
        case 0:
            return {{"K[N^cbar_i + c_i N^cbar_j]", qi_cbar, Op::GE, 1.0},
                    {"N^cbar_j vs (1-c_j)M_j", k.N_cbar(j), Op::LE, (1 - cj) * Mj}};
        case 1:
            return {{"K[N^c_i + c_i N^c_j]", qi_c, Op::GE, 1.0},
                    {"(1-c_j)M_j vs N^c_j", (1 - cj) * Mj, Op::LE, k.N_c(j)},
                    {"N^c_j vs 1-c_j", k.N_c(j), Op::LT, 1 - cj}};
        default:
            return {{"K[N^a_i + Kbar_i M_j]", k.K * (k.N_a(i) + k.K_bar_F(i) * Mj), Op::GE, 1.0},
                    {"N^c_j vs (1-c_j)M_j", k.N_c(j), Op::LT, (1 - cj) * Mj},
                    {"(1-c_j)M_j vs min(N^cbar_j, 1-c_j)", (1 - cj) * Mj, Op::LT, std::min(k.N_cbar(j), 1 - cj)}};
    }
}

std::vector<Condition> conditions(CaseId c, const KernelEval& k, const CheckedScenario& cfg) {
    const double P = k.premium_fraction();
    switch (c) {
        case CaseId::C1:
            return {{"N^c_1 + c_1", k.N_c1 + k.c1, Op::GE, 1.0}, {"N^c_2 + c_2", k.N_c2 + k.c2, Op::GE, 1.0}};
        case CaseId::C2: return capped_conditions(k, 1, 0);
        case CaseId::C3: return capped_conditions(k, 1, 1);
        case CaseId::C4: return capped_conditions(k, 1, 2);
        case CaseId::C5: return capped_conditions(k, 2, 0);
        case CaseId::C6: return capped_conditions(k, 2, 1);
        case CaseId::C7: return capped_conditions(k, 2, 2);
        case CaseId::C8:
            return {{"q~1(c_bar)", coupled_retention(k, cfg, 1, cfg.c_bar()), Op::LT, 1.0},
                    {"q~2(c_bar)", coupled_retention(k, cfg, 2, cfg.c_bar()), Op::LT, 1.0},
                    {"P^N/P^D vs c_bar", P, Op::GE, cfg.c_bar()}};
        case CaseId::C9:
            return {{"q~1(c_F)", coupled_retention(k, cfg, 1, cfg.c_F()), Op::LT, 1.0},
                    {"q~2(c_F)", coupled_retention(k, cfg, 2, cfg.c_F()), Op::LT, 1.0},
                    {"P^N/P^D vs c_F", P, Op::LE, cfg.c_F()}};
        case CaseId::C10:
            return {{"q~1(P^N/P^D)", coupled_retention(k, cfg, 1, P), Op::LT, 1.0},
                    {"q~2(P^N/P^D)", coupled_retention(k, cfg, 2, P), Op::LT, 1.0},
                    {"c_F vs P^N/P^D", cfg.c_F(), Op::LT, P},
                    {"P^N/P^D vs c_bar", P, Op::LT, cfg.c_bar()}};
    }
    return {};
}

}  // namespace

CaseId case_from_number(int n) {
    if (n < 1 || n > 10) throw Error("case number out of range: " + std::to_string(n));
    return static_cast<CaseId>(n);
}

double investment_bracket(double t, const FinancialMarket& m) {
    return (m.r - m.r0) / (m.sigma * m.sigma) - 2.0 * m.beta * eval_g1(t, m);
}

Investments investment_strategies(double t, double s, const CheckedScenario& cfg) {
    const auto& m = cfg.market();
    const auto& pr = cfg.prefs();
    const double bracket = investment_bracket(t, m) * std::pow(s, -2.0 * m.beta);
    const double fL = eval_phi(t, cfg.rate_L(), m.T);
    const double f1 = eval_phi(t, cfg.rate_F(1), m.T);
    const double f2 = eval_phi(t, cfg.rate_F(2), m.T);
    const double kk = 1.0 - pr.k1 * pr.k2;
    return {bracket / (pr.gamma_L * fL), bracket / (kk * f1) * (1.0 / pr.gamma1 + pr.k1 / pr.gamma2),
            bracket / (kk * f2) * (1.0 / pr.gamma2 + pr.k2 / pr.gamma1)};
}

bool case_conditions_hold(CaseId c, const KernelEval& k, const CheckedScenario& cfg) {
    const auto conds = conditions(c, k, cfg);
    return std::all_of(conds.begin(), conds.end(), [](const Condition& x) { return x.holds(); });
}

double reinsurer_objective(const KernelEval& k, const PremiumRetention& st, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    const double gf = cfg.prefs().gamma_L * k.phi_L;
    const double c1 = 1 - st.q1, c2 = 1 - st.q2;
    const double income = (st.p - cl.a1) * c1 + (st.p - cl.a2) * c2;
    const double var = c1 * c1 * cl.sigma1 * cl.sigma1 + c2 * c2 * cl.sigma2 * cl.sigma2
                       + 2.0 * c1 * c2 * cl.rho * cl.sigma1 * cl.sigma2;
    return gf * income - 0.5 * gf * gf * var;
}

Classification classify(const KernelEval& k, const CheckedScenario& cfg) {
    Classification out;
    for (int n = 1; n <= 10; ++n) {
        if (case_conditions_hold(case_from_number(n), k, cfg)) out.matched.push_back(case_from_number(n));
    }
    if (out.matched.empty()) {
        std::ostringstream os;
        os.precision(15);
        os << "no equilibrium case matched at t=" << k.t << '\n';
        for (int n = 1; n <= 10; ++n) {
            os << "  case " << n << ':';
            for (const auto& c : conditions(case_from_number(n), k, cfg)) {
                os << " [" << c.what << ": " << c.lhs << ' ' << op_name(c.op) << ' ' << c.rhs
                   << (c.holds() ? " ok" : " FAILS") << ']';
            }
            os << '\n';
        }
        throw NoCaseMatched(os.str());
    }
    out.id = out.matched.front();
    out.boundary = out.matched.size() > 1;
    if (out.boundary) {
        // Condition sets can overlap away from any boundary, each giving a local
        // optimum of the reinsurer. Keep the best; exact ties go to the lowest case.
        double best = reinsurer_objective(k, case_strategy(out.id, k, cfg), cfg);
        for (std::size_t n = 1; n < out.matched.size(); ++n) {
            const double v = reinsurer_objective(k, case_strategy(out.matched[n], k, cfg), cfg);
            if (v > best + 1e-12 * std::abs(best)) {
                best = v;
                out.id = out.matched[n];
            }
        }
    }
    return out;
}

CaseId classify_case(double t, const CheckedScenario& cfg) {
    return classify(eval_case_constants(t, cfg), cfg).id;
}

PremiumRetention case_strategy(CaseId c, const KernelEval& k, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    const auto& pr = cfg.prefs();
    PremiumRetention out;
    out.id = c;
    out.p_lo = out.p_hi = 0;
    auto capped = [&](int i, double p, double qj) {
        out.p = p;
        (i == 1 ? out.q1 : out.q2) = 1.0;
        (i == 1 ? out.q2 : out.q1) = qj;
    };
    auto interior_at = [&](int j) {
        const int i = 3 - j;
        const double m = (1 - k.c(j)) * k.M_F(j);
        capped(i, cl.a(j) + pr.gamma(j) * cl.sig(j) * cl.sig(j) * k.phi_Fi(j) * m, m + k.c(j));
    };
    auto both = [&](double p) {
        out.p = p;
        out.q1 = coupled_retention(k, cfg, 1, p);
        out.q2 = coupled_retention(k, cfg, 2, p);
    };
    switch (c) {
        case CaseId::C1:
            out.p = cfg.c_bar();
            out.q1 = out.q2 = 1.0;
            out.non_unique = true;
            out.p_lo = cfg.c_F();
            out.p_hi = cfg.c_bar();
            break;
        case CaseId::C2: capped(1, cfg.c_bar(), k.N_cbar2 + k.c2); break;
        case CaseId::C3: capped(1, cfg.c_F(), k.N_c2 + k.c2); break;
        case CaseId::C4: interior_at(2); break;
        case CaseId::C5: capped(2, cfg.c_bar(), k.N_cbar1 + k.c1); break;
        case CaseId::C6: capped(2, cfg.c_F(), k.N_c1 + k.c1); break;
        case CaseId::C7: interior_at(1); break;
        case CaseId::C8: both(cfg.c_bar()); break;
        case CaseId::C9: both(cfg.c_F()); break;
        case CaseId::C10: both(k.premium_fraction()); break;
    }
    return out;
}

PremiumRetention premium_and_retention(double t, const CheckedScenario& cfg) {
    const KernelEval k = eval_case_constants(t, cfg);
    const Classification cls = classify(k, cfg);
    PremiumRetention out = case_strategy(cls.id, k, cfg);
    out.boundary = cls.boundary;
    return out;
}

double best_response_retention(const KernelEval& k, double p, double q_other, int i, const CheckedScenario& cfg) {
    const auto& cl = cfg.claims();
    const double base = (p - cl.a(i)) / (cfg.prefs().gamma(i) * cl.sig(i) * cl.sig(i) * k.phi_Fi(i));
    return std::min(base + k.c(i) * q_other, 1.0);
}

double best_response_retention(double t, double p, double q_other, int i, const CheckedScenario& cfg) {
    return best_response_retention(eval_case_constants(t, cfg), p, q_other, i, cfg);
}

Retentions follower_response(const KernelEval& k, double p, const CheckedScenario& cfg) {
    const double q1 = coupled_retention(k, cfg, 1, p);
    const double q2 = coupled_retention(k, cfg, 2, p);
    if (q1 < 1.0 && q2 < 1.0) return {q1, q2};
    // One cap binds: the other insurer answers the capped one.
    const double r2 = best_response_retention(k, p, 1.0, 2, cfg);
    if (best_response_retention(k, p, r2, 1, cfg) >= 1.0) return {1.0, r2};
    const double r1 = best_response_retention(k, p, 1.0, 1, cfg);
    if (best_response_retention(k, p, r1, 2, cfg) >= 1.0) return {r1, 1.0};
    // Unreachable for k1 k2 rho^2 < 1; fall back to the unconstrained point.
    return {std::min(q1, 1.0), std::min(q2, 1.0)};
}

EquilibriumPoint equilibrium_point(double t, double s, const CheckedScenario& cfg) {
    const PremiumRetention pr = premium_and_retention(t, cfg);
    const Investments inv = investment_strategies(t, s, cfg);
    EquilibriumPoint e;
    e.t = t;
    e.s = s;
    e.id = pr.id;
    e.p_star = pr.p;
    e.q1_star = pr.q1;
    e.q2_star = pr.q2;
    e.bL_star = inv.bL;
    e.b1_star = inv.b1;
    e.b2_star = inv.b2;
    e.non_unique = pr.non_unique;
    e.boundary = pr.boundary;
    return e;
}

EquilibriumPoint no_delay_strategy(double t, double s, const CheckedScenario& cfg) {
    return equilibrium_point(t, s, validate(cfg.config().without_delay()));
}

SingleInsurerScenario reduce_to_single_insurer(const CheckedScenario& cfg) {
    SingleInsurerScenario sc;
    sc.market = cfg.market();
    sc.a1 = cfg.claims().a1;
    sc.sigma1 = cfg.claims().sigma1;
    sc.theta1 = cfg.claims().theta1;
    sc.theta_bar = cfg.claims().theta_bar;
    sc.gamma_L = cfg.prefs().gamma_L;
    sc.gamma1 = cfg.prefs().gamma1;
    sc.delay_L = cfg.config().delay_L;
    sc.delay_1 = cfg.config().delay_1;
    return sc;
}

SingleInsurerPoint single_insurer_strategy(double t, double s, const SingleInsurerScenario& sc) {
    if (!(sc.theta_bar > sc.theta1)) throw DegenerateBand(sc.c_F(), sc.c_bar(), "single-insurer band is empty");
    const auto& m = sc.market;
    SingleInsurerPoint out;
    out.t = t;
    out.s = s;
    out.phi_L = eval_phi(t, kernel_rate(sc.delay_L, m.r0), m.T);
    out.phi_F = eval_phi(t, kernel_rate(sc.delay_1, m.r0), m.T);
    const double bracket = investment_bracket(t, m) * std::pow(s, -2.0 * m.beta);
    out.bL = bracket / (sc.gamma_L * out.phi_L);
    out.b1 = bracket / (sc.gamma1 * out.phi_F);

    const double v = sc.gamma1 * sc.sigma1 * sc.sigma1 * out.phi_F;
    const double Nc = (sc.c_F() - sc.a1) / v;
    const double Ncbar = (sc.c_bar() - sc.a1) / v;
    const double M = (sc.gamma1 * out.phi_F + sc.gamma_L * out.phi_L)
                     / (2.0 * sc.gamma1 * out.phi_F + sc.gamma_L * out.phi_L);
    out.M = M;
    const Condition c1{"N^c", Nc, Op::GE, 1.0};
    const Condition c2{"N^cbar vs M", Ncbar, Op::LE, M};
    const Condition c3a{"M vs N^c", M, Op::LE, Nc}, c3b{"N^c", Nc, Op::LT, 1.0};
    const Condition c4a{"N^c vs M", Nc, Op::LT, M}, c4b{"M vs N^cbar", M, Op::LT, Ncbar};
    if (c1.holds()) {
        out.case_no = 1;
        out.p = sc.c_bar();
        out.q1 = 1.0;
        out.non_unique = true;
    } else if (c2.holds()) {
        out.case_no = 2;
        out.p = sc.c_bar();
        out.q1 = Ncbar;
    } else if (c3a.holds() && c3b.holds()) {
        out.case_no = 3;
        out.p = sc.c_F();
        out.q1 = Nc;
    } else if (c4a.holds() && c4b.holds()) {
        out.case_no = 4;
        out.p = sc.a1 + M * v;
        out.q1 = M;
    } else {
        std::ostringstream os;
        os.precision(15);
        os << "no single-insurer case matched at t=" << t << ": N^c=" << Nc << " N^cbar=" << Ncbar << " M=" << M;
        throw NoCaseMatched(os.str());
    }
    return out;
}

}  // namespace stackgame
