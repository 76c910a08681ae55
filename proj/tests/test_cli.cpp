#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
    int status = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Run run(const std::string& args) {
    const std::string err_file = "cli_test_stderr.txt";
    const std::string cmd = std::string(STACKGAME_CLI) + " " + args + " 2>" + err_file;
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.err = slurp(err_file);
    return r;
}

using Table = std::vector<std::vector<std::string>>;

Table parse_csv(const std::string& text) {
    Table rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.at(0).size(); ++i)
        if (t[0][i] == name) return i;
    FAIL("missing column " << name);
    return 0;
}

double num(const Table& t, std::size_t row, const std::string& name) { return std::stod(t.at(row).at(column(t, name))); }

std::string bad_scenario() {
    std::string text = slurp(STACKGAME_SCENARIO);
    text.replace(text.find("k1 = 0.4"), 8, "k1 = 0.9");
    text.replace(text.find("k2 = 0.3"), 8, "k2 = 1.2");
    const std::string path = "cli_test_bad.scenario";
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

}  // namespace

TEST_CASE("strategy table over the horizon") {
    const Run r = run("strategy --t 0:10:11");
    REQUIRE(r.status == 0);
    CHECK(r.out.find('\r') == std::string::npos);
    const Table t = parse_csv(r.out);
    REQUIRE(t.size() == 12);
    CHECK(t[0].size() == 11);
    // Rounded reference values at t = 0, 5 and 10.
    CHECK(num(t, 1, "case") == 8);
    CHECK(num(t, 1, "p_star") == doctest::Approx(12).epsilon(1e-12));
    CHECK(num(t, 1, "q1_star") == doctest::Approx(0.294).epsilon(2e-3));
    CHECK(num(t, 1, "q2_nodelay") == doctest::Approx(0.446).epsilon(2e-3));
    CHECK(num(t, 6, "q2_star") == doctest::Approx(0.561).epsilon(2e-3));
    CHECK(num(t, 9, "p_star") == doctest::Approx(11.419).epsilon(1e-4));
    CHECK(num(t, 11, "case") == 10);
    CHECK(num(t, 11, "p_star") == doctest::Approx(10.661).epsilon(1e-4));
    // At the horizon the delay and no-delay strategies coincide.
    for (const char* x : {"p", "q1", "q2"})
        CHECK(num(t, 11, std::string(x) + "_star") == doctest::Approx(num(t, 11, std::string(x) + "_nodelay")));
}

TEST_CASE("strategy usage errors") {
    CHECK(run("strategy --t 0:0:5").status == 2);
    CHECK(run("strategy --t 0:10:1").status == 2);
    CHECK(run("strategy --t 0:11:3").status == 2);
    CHECK(run("strategy").status == 2);
    CHECK(run("bogus").status == 2);
}

TEST_CASE("sweep over the insurer's relative concern") {
    const Run r = run("sweep --sweep prefs.k1=0:0.8:5 --t 9");
    REQUIRE(r.status == 0);
    const Table t = parse_csv(r.out);
    REQUIRE(t.size() == 6);
    CHECK(t[0][0] == "prefs.k1");
    CHECK(t[0].back() == "error");
    for (std::size_t i = 2; i < t.size(); ++i) {
        CHECK(num(t, i, "q1_star") > num(t, i - 1, "q1_star"));
        CHECK(num(t, i, "p_star") < num(t, i - 1, "p_star"));
    }
}

TEST_CASE("sweep over reinsurer risk aversion") {
    const Run r = run("sweep --sweep prefs.gamma_L=0.05:0.2:4 --t 9");
    REQUIRE(r.status == 0);
    const Table t = parse_csv(r.out);
    for (std::size_t i = 2; i < t.size(); ++i) CHECK(num(t, i, "p_star") > num(t, i - 1, "p_star"));
}

TEST_CASE("sweep usage errors") {
    CHECK(run("sweep --sweep prefs.k1=0.3:0.3:4 --t 9").status == 2);
    CHECK(run("sweep --sweep nothing.here=0:1:3 --t 9").status == 2);
    CHECK(run("sweep --sweep prefs.k1 --t 9").status == 2);
}

TEST_CASE("verify one suite") {
    const Run r = run("verify --suite table9");
    CHECK(r.status == 0);
    CHECK(r.out.find("table9 | PASS") != std::string::npos);
    CHECK(run("verify --suite nonsense").status == 2);
}

TEST_CASE("invalid scenarios are rejected before any suite runs") {
    const std::string path = bad_scenario();
    const Run v = run("verify --scenario " + path);
    CHECK(v.status != 0);
    CHECK(v.err.find("suites skipped") != std::string::npos);
    CHECK(v.err.find("prefs.k2") != std::string::npos);
    CHECK(v.out.empty());
    CHECK(run("strategy --scenario " + path + " --t 0:1:2").status != 0);
    CHECK(run("strategy --scenario no_such_file --t 0:1:2").status != 0);
}

TEST_CASE("scenario file matches the built-in defaults") {
    const Run a = run("strategy --t 0:10:6");
    const Run b = run(std::string("strategy --t 0:10:6 --scenario ") + STACKGAME_SCENARIO);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("simulation is reproducible") {
    const std::string args = "simulate --seed 11 --paths 200 --dt 0.01 --scheme log-euler";
    const Run a = run(args + " --out cli_test_paths_a.csv");
    const Run b = run(args + " --out cli_test_paths_b.csv");
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    const std::string pa = slurp("cli_test_paths_a.csv");
    CHECK(pa == slurp("cli_test_paths_b.csv"));
    CHECK(pa.find('\r') == std::string::npos);
    const Table t = parse_csv(pa);
    CHECK(t.size() == 201);
    CHECK(t[0][0] == "path_id");
    CHECK(parse_csv(a.out)[0][0] == "policy");
}

TEST_CASE("perturbed policy is reported next to the equilibrium") {
    const Run r = run("simulate --seed 3 --paths 200 --dt 0.01 --scheme log-euler --policy perturb:bL=1.5");
    REQUIRE(r.status == 0);
    const Table t = parse_csv(r.out);
    int perturbed = 0, eq = 0;
    for (const auto& row : t) {
        perturbed += row[0] == "perturb:bL=1.5";
        eq += row[0] == "equilibrium";
    }
    CHECK(perturbed == 3);
    CHECK(eq == 3);
    CHECK(run("simulate --paths 10 --dt 0.01 --policy nope").status == 2);
    CHECK(run("simulate --paths 10 --dt 0.003").status == 2);
}

TEST_CASE("too many non-positive prices fail the run") {
    // Plain Euler at a coarse step drives a few percent of prices below zero.
    const Run r = run("simulate --seed 5 --paths 2000 --dt 0.01");
    CHECK(r.status == 1);
    CHECK(r.err.find("flagged") != std::string::npos);
}
