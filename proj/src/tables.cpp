#include <stackgame/tables.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace stackgame {

namespace {

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw Error("bad " + what + " '" + s + "'");
    return v;
}

}  // namespace

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double GridSpec1D::at(int k) const {
    if (k == count - 1) return end;
    const double n = count - 1;
    return (start * n + (end - start) * k) / n;
}

std::vector<double> GridSpec1D::values() const {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(at(k));
    return out;
}

GridSpec1D parse_grid(const std::string& text) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos || text.find(':', b + 1) != std::string::npos)
        throw Error("grid must be start:end:count, got '" + text + "'");
    GridSpec1D g;
    g.start = parse_number(text.substr(0, a), "grid start");
    g.end = parse_number(text.substr(a + 1, b - a - 1), "grid end");
    const double n = parse_number(text.substr(b + 1), "grid count");
    if (n != std::floor(n) || n < 2 || n > 1e7) throw Error("grid count must be an integer >= 2, got '" + text + "'");
    g.count = static_cast<int>(n);
    if (g.start == g.end) throw Error("degenerate grid: start equals end in '" + text + "'");
    return g;
}

std::vector<double> time_grid(const GridSpec1D& g, double T) {
    constexpr double kDen = 1 << 20;
    std::vector<double> out;
    for (double t : g.values()) {
        if (t < 0 || t > T) throw Error("time " + fmt12(t) + " outside [0, " + fmt12(T) + "]");
        const double snapped = std::round(t / T * kDen) / kDen * T;
        out.push_back(std::abs(snapped - t) < 1e-12 ? snapped : t);
    }
    return out;
}

StrategyRow strategy_row(double t, double s, const CheckedScenario& cfg) {
    const EquilibriumPoint eq = equilibrium_point(t, s, cfg);
    const EquilibriumPoint nd = no_delay_strategy(t, s, cfg);
    StrategyRow r;
    r.t = t;
    r.case_no = case_number(eq.id);
    r.p_star = eq.p_star;
    r.q1_star = eq.q1_star;
    r.q2_star = eq.q2_star;
    r.bL_star = eq.bL_star;
    r.b1_star = eq.b1_star;
    r.b2_star = eq.b2_star;
    r.p_nodelay = nd.p_star;
    r.q1_nodelay = nd.q1_star;
    r.q2_nodelay = nd.q2_star;
    return r;
}

std::vector<StrategyRow> strategy_table(const std::vector<double>& times, double s, const CheckedScenario& cfg) {
    std::vector<StrategyRow> out;
    for (double t : times) out.push_back(strategy_row(t, s, cfg));
    return out;
}

namespace {

const char* kStrategyHeader = "t,case,p_star,q1_star,q2_star,bL_star,b1_star,b2_star,p_nodelay,q1_nodelay,q2_nodelay";

void write_fields(std::ostream& os, const StrategyRow& r) {
    os << fmt12(r.t) << ',' << r.case_no;
    for (double v : {r.p_star, r.q1_star, r.q2_star, r.bL_star, r.b1_star, r.b2_star, r.p_nodelay, r.q1_nodelay,
                     r.q2_nodelay})
        os << ',' << fmt12(v);
}

}  // namespace

void write_strategy_csv(std::ostream& os, const std::vector<StrategyRow>& rows) {
    os << kStrategyHeader << '\n';
    for (const auto& r : rows) {
        write_fields(os, r);
        os << '\n';
    }
}

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("sweep must be param=start:end:count, got '" + text + "'");
    SweepSpec sw;
    sw.param = text.substr(0, eq);
    ScenarioConfig probe;
    param_ref(probe, sw.param);  // throws on unknown paths
    sw.grid = parse_grid(text.substr(eq + 1));
    return sw;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepSpec& sw, double t, double s) {
    std::vector<SweepRow> out;
    for (double v : sw.grid.values()) {
        SweepRow row;
        row.value = v;
        ScenarioConfig cfg = base;
        param_ref(cfg, sw.param) = v;
        if (sw.param == "delay_2.eta") cfg.eta2_supplied = true;
        try {
            const CheckedScenario checked = validate(cfg);
            row.row = strategy_row(t, s, checked);
        } catch (const ValidationError& e) {
            row.error = e.report().to_string();
        } catch (const Error& e) {
            row.error = e.what();
        }
        out.push_back(std::move(row));
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows) {
    os << param << ',' << kStrategyHeader << ",error\n";
    for (const auto& r : rows) {
        os << fmt12(r.value) << ',';
        if (r.row) {
            write_fields(os, *r.row);
            os << ",\n";
        } else {
            std::string msg = r.error;
            for (char& c : msg) {
                if (c == ',' || c == '\n' || c == '"') c = ';';
            }
            os << ",,,,,,,,,,," << msg << '\n';
        }
    }
}

}  // namespace stackgame
