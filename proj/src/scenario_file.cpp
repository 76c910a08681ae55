#include <stackgame/scenario_file.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace stackgame {

namespace {

std::string trim(std::string s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::pair<double, int>>;  // key -> (value, line)

class Reader {
public:
    Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ScenarioParseError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    std::map<std::string, Section> read(std::istream& in) {
        static const std::set<std::string> known{"market", "claims", "reinsurer", "insurer1", "insurer2"};
        std::map<std::string, Section> out;
        std::string raw, current;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto cut = raw.find_first_of("#;");
            std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
                current = trim(s.substr(1, s.size() - 2));
                if (!known.count(current)) fail(line, "unknown section [" + current + "]");
                if (out.count(current)) fail(line, "duplicate section [" + current + "]");
                out[current];
                continue;
            }
            if (current.empty()) fail(line, "key outside any section");
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail(line, "expected key = value");
            const std::string key = trim(s.substr(0, eq));
            const std::string val = trim(s.substr(eq + 1));
            double v = 0;
            const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
            if (ec != std::errc{} || ptr != val.data() + val.size())
                fail(line, "value of '" + key + "' is not a number: '" + val + "'");
            auto& sec = out[current];
            if (sec.count(key)) fail(line, "duplicate key '" + key + "' in [" + current + "]");
            sec[key] = {v, line};
        }
        return out;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

class SectionView {
public:
    SectionView(const Reader& r, const std::string& name, const Section* sec) : r_(r), name_(name), sec_(sec) {}

    void allow(std::initializer_list<const char*> keys) const {
        if (!sec_) return;
        for (const auto& [k, v] : *sec_) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                r_.fail(v.second, "unknown key '" + k + "' in [" + name_ + "]");
        }
    }
    bool has(const std::string& key) const { return sec_ && sec_->count(key); }
    double get(const std::string& key) const {
        if (!has(key)) throw ScenarioParseError(r_.source() + ": missing key '" + key + "' in [" + name_ + "]");
        return sec_->at(key).first;
    }
    std::optional<double> opt(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return sec_->at(key).first;
    }

private:
    const Reader& r_;
    std::string name_;
    const Section* sec_;
};

}  // namespace

ScenarioConfig parse_scenario(std::istream& in, const std::string& source) {
    Reader reader(source);
    const auto sections = reader.read(in);
    auto view = [&](const char* name) {
        auto it = sections.find(name);
        if (it == sections.end()) throw ScenarioParseError(source + ": missing section [" + name + "]");
        return SectionView(reader, name, &it->second);
    };

    ScenarioConfig cfg;
    const auto market = view("market");
    market.allow({"r0", "r", "sigma", "beta", "s0", "T"});
    cfg.market = {market.get("r0"), market.get("r"), market.get("sigma"),
                  market.get("beta"), market.get("s0"), market.get("T")};

    const auto claims = view("claims");
    claims.allow({"a1", "a2", "sigma1", "sigma2", "theta1", "theta2", "rho", "theta_bar", "lambda_own1",
                  "lambda_own2", "lambda_common", "mu1", "mu2", "second_moment1", "second_moment2"});
    const double th1 = claims.get("theta1"), th2 = claims.get("theta2"), thb = claims.get("theta_bar");
    const bool raw = claims.has("lambda_common") || claims.has("mu1") || claims.has("mu2");
    if (raw) {
        for (const char* k : {"a1", "a2", "sigma1", "sigma2", "rho"}) {
            if (claims.has(k))
                throw ScenarioParseError(source + ": [claims] mixes raw inputs with direct key '" + k + "'");
        }
        RawClaims rc{claims.get("lambda_own1"), claims.get("lambda_own2"), claims.get("lambda_common"),
                     claims.get("mu1"),         claims.get("mu2"),         claims.get("second_moment1"),
                     claims.get("second_moment2")};
        cfg.claims = ClaimModel::from_raw(rc, th1, th2, thb);
    } else {
        cfg.claims = {claims.get("a1"), claims.get("a2"), claims.get("sigma1"), claims.get("sigma2"),
                      th1,              th2,              claims.get("rho"),    thb};
    }

    const auto rein = view("reinsurer");
    rein.allow({"gamma_L", "h", "alpha", "eta", "x_L0"});
    cfg.prefs.gamma_L = rein.get("gamma_L");
    cfg.delay_L = {rein.get("h"), rein.get("alpha"), rein.get("eta")};
    cfg.x_L0 = rein.get("x_L0");

    const auto ins1 = view("insurer1");
    ins1.allow({"gamma1", "k1", "h", "alpha", "eta", "x_10"});
    cfg.prefs.gamma1 = ins1.get("gamma1");
    cfg.prefs.k1 = ins1.get("k1");
    cfg.delay_1 = {ins1.get("h"), ins1.get("alpha"), ins1.get("eta")};
    cfg.x_10 = ins1.get("x_10");

    const auto ins2 = view("insurer2");
    ins2.allow({"gamma2", "k2", "h", "alpha", "eta", "x_20"});
    cfg.prefs.gamma2 = ins2.get("gamma2");
    cfg.prefs.k2 = ins2.get("k2");
    const auto eta2 = ins2.opt("eta");
    cfg.delay_2 = {ins2.get("h"), ins2.get("alpha"), eta2.value_or(0.0)};
    cfg.eta2_supplied = eta2.has_value();
    cfg.x_20 = ins2.get("x_20");
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open scenario file '" + path + "'");
    return parse_scenario(in, path);
}

std::string format_scenario(const ScenarioConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "[market]\nr0 = " << c.market.r0 << "\nr = " << c.market.r << "\nsigma = " << c.market.sigma
       << "\nbeta = " << c.market.beta << "\ns0 = " << c.market.s0 << "\nT = " << c.market.T << "\n\n";
    os << "[claims]\na1 = " << c.claims.a1 << "\na2 = " << c.claims.a2 << "\nsigma1 = " << c.claims.sigma1
       << "\nsigma2 = " << c.claims.sigma2 << "\ntheta1 = " << c.claims.theta1 << "\ntheta2 = " << c.claims.theta2
       << "\nrho = " << c.claims.rho << "\ntheta_bar = " << c.claims.theta_bar << "\n\n";
    os << "[reinsurer]\ngamma_L = " << c.prefs.gamma_L << "\nh = " << c.delay_L.h << "\nalpha = " << c.delay_L.alpha
       << "\neta = " << c.delay_L.eta << "\nx_L0 = " << c.x_L0 << "\n\n";
    os << "[insurer1]\ngamma1 = " << c.prefs.gamma1 << "\nk1 = " << c.prefs.k1 << "\nh = " << c.delay_1.h
       << "\nalpha = " << c.delay_1.alpha << "\neta = " << c.delay_1.eta << "\nx_10 = " << c.x_10 << "\n\n";
    os << "[insurer2]\ngamma2 = " << c.prefs.gamma2 << "\nk2 = " << c.prefs.k2 << "\nh = " << c.delay_2.h
       << "\nalpha = " << c.delay_2.alpha << "\n";
    if (c.eta2_supplied) os << "eta = " << c.delay_2.eta << "\n";
    os << "x_20 = " << c.x_20 << "\n";
    return os.str();
}

}  // namespace stackgame
