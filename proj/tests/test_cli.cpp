#include <doctest.h>

#include "rwlt/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace rwlt;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) v.push_back(line);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> v;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            v.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    v.push_back(cur);
    return v;
}

// Rows of one CSV table as column -> value maps.
std::vector<std::map<std::string, std::string>> table(const std::string& csv, const std::string& name) {
    const auto lines = lines_of(csv);
    std::vector<std::map<std::string, std::string>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i] != "# table: " + name) continue;
        const auto header = split(lines.at(i + 1));
        for (std::size_t j = i + 2; j < lines.size() && !lines[j].empty() && lines[j][0] != '#'; ++j) {
            const auto cells = split(lines[j]);
            REQUIRE(cells.size() == header.size());
            std::map<std::string, std::string> row;
            for (std::size_t c = 0; c < header.size(); ++c) row[header[c]] = cells[c];
            rows.push_back(row);
        }
    }
    return rows;
}

std::string body(const std::string& csv) {
    std::string out;
    for (const auto& line : lines_of(csv))
        if (line.rfind("# workers:", 0) != 0) out += line + "\n";
    return out;
}

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("verify exit codes") {
    CHECK(run({"verify", "--q", "0.7", "--seed", "1"}).code == kExitConfig);
    CHECK(run({"verify", "--q", "0.6"}).code == kExitConfig);  // no seed
    CHECK(run({"verify", "--q", "0.6", "--excursions", "0", "--seed", "1"}).code == kExitConfig);

    const auto tiny = run({"verify", "--q", "0.6", "--excursions", "1", "--seed", "1"});
    CHECK(tiny.code == kExitOk);
    const auto id = table(tiny.out, "identity");
    REQUIRE(id.size() == 1);
    CHECK(id[0].at("failures") == "0");
    CHECK(id[0].at("excursions") == "1");
}

TEST_CASE("verify at 1e5 excursions") {
    const auto r = run({"verify", "--q", "0.6", "--excursions", "100000", "--seed", "42"});
    CHECK(r.code == kExitOk);
    const auto id = table(r.out, "identity");
    REQUIRE(id.size() == 1);
    CHECK(id[0].at("failures") == "0");
    CHECK(num(id[0].at("checks")) > 100000);
    const auto checks = table(r.out, "offspring_law");
    REQUIRE(checks.size() == 2);
    for (const auto& c : checks) {
        CHECK(c.at("pass") == "true");
        CHECK(c.at("tv_gated") == "false");
    }
    CHECK(table(r.out, "offspring_cells").size() == 91);
}

TEST_CASE("converge") {
    const auto r = run({"converge", "--q", "0.6", "--x", "1.0", "--lambda", "1.0", "--N", "10,100,1000,10000"});
    CHECK(r.code == kExitOk);
    const auto rows = table(r.out, "convergence");
    REQUIRE(rows.size() == 4);
    CHECK(num(rows.back().at("gap1")) < 1e-2);
    CHECK(num(rows.back().at("Phi")) == doctest::Approx(0.57375).epsilon(1e-5));
    CHECK(num(rows.back().at("N_B_minus_A")) == doctest::Approx(1.25).epsilon(1e-3));

    const auto zero = run({"converge", "--q", "0.6", "--lambda", "0"});
    CHECK(zero.code == kExitOk);
    for (const auto& row : table(zero.out, "convergence")) {
        CHECK(row.at("F1") == "1");
        CHECK(row.at("F2") == "1");
        CHECK(row.at("Phi") == "1");
        CHECK(row.at("gap1") == "0");
    }

    const auto low = run({"converge", "--q", "0.6", "--x", "0.00001", "--lambda", "1"});
    const auto low_rows = table(low.out, "convergence");
    REQUIRE(low_rows.size() == 4);
    for (const auto& row : low_rows) {
        CHECK(num(row.at("F1")) == doctest::Approx(std::exp(-1.25)));
        CHECK(row.at("A_N").empty());
    }

    CHECK(run({"converge", "--q", "0.6", "--N", "100,10"}).code == kExitConfig);
    CHECK(run({"converge", "--q", "0.6", "--threshold", "1e-9"}).code == kExitStatistical);
}

TEST_CASE("compare at small scale") {
    const auto r = run({"compare", "--q", "0.6", "--N", "100", "--runs", "2000", "--limit-samples", "3000", "--seed",
                        "3", "--workers", "2"});
    CHECK(r.code == kExitOk);
    const auto ks = table(r.out, "ks");
    REQUIRE(ks.size() == 3);
    for (const auto& row : ks) {
        CHECK(row.at("n_walk") == "2000");
        CHECK(row.at("n_limit") == "2000");
        CHECK(num(row.at("ks")) <= num(row.at("critical")));
    }
    const auto lt = table(r.out, "laplace");
    REQUIRE(lt.size() == 9);
    for (const auto& row : lt) CHECK(row.at("finite_dim_k1") == row.at("phi"));
    const auto fd = table(r.out, "finite_dim");
    REQUIRE(fd.size() == 2);
    CHECK(fd[0].at("k") == "2");
    CHECK(fd[1].at("k") == "3");

    CHECK(run({"compare", "--q", "0.6", "--runs", "10"}).code == kExitConfig);
    CHECK(run({"compare", "--q", "0.6", "--seed", "1", "--query", "1:1;0.5:1"}).code == kExitConfig);
}

TEST_CASE("compare works for a general step law") {
    const auto r = run({"compare", "--q", "0.5", "--L", "1", "--p", "0.5", "--N", "50", "--runs", "1000", "--seed",
                        "4", "--x", "0.5,1", "--query", "0.5:1;1:1"});
    CHECK(r.code == kExitOk);
    const auto lt = table(r.out, "laplace");
    REQUIRE(!lt.empty());
    CHECK(lt[0].at("analytic_FN").empty());
    CHECK(run({"verify", "--q", "0.5", "--L", "1", "--p", "0.5", "--seed", "1"}).code == kExitConfig);
}

TEST_CASE("moments exit codes") {
    CHECK(run({"moments", "--q", "0.6", "--seed", "1", "--replicates", "0"}).code == kExitConfig);
    CHECK(run({"moments", "--q", "0.6", "--seed", "1", "--n-schedule", "1"}).code == kExitConfig);
    CHECK(run({"moments", "--q", "0.6", "--seed", "1", "--replicates", "2000", "--population-cap", "3"}).code ==
          kExitResource);
    const auto r = run({"moments", "--q", "0.6", "--seed", "1", "--replicates", "20000", "--n-schedule",
                        "5,10,20,40", "--tolerance", "0.5"});
    CHECK(r.code == kExitOk);
    CHECK(table(r.out, "moments").size() == 4);
    const auto fit = table(r.out, "fit");
    REQUIRE(fit.size() == 1);
    CHECK(num(fit[0].at("target")) == doctest::Approx(3.125));
}

TEST_CASE("moments with defaults") {
    const auto r = run({"moments", "--q", "0.6", "--seed", "2026"});
    CHECK(r.code == kExitOk);
    const auto fit = table(r.out, "fit");
    REQUIRE(fit.size() == 1);
    CHECK(std::abs(num(fit[0].at("ratio")) - 1.0) <= 0.1);
}

TEST_CASE("simulate dumps") {
    const auto ex = run({"simulate", "--q", "0.6", "--seed", "9", "--excursions", "5", "--keep-paths"});
    CHECK(ex.code == kExitOk);
    const auto rows = table(ex.out, "excursions");
    REQUIRE(rows.size() == 5);
    const auto steps = table(ex.out, "paths");
    std::size_t expected = 0;
    for (const auto& row : rows) expected += std::stoul(row.at("length")) + 1;
    CHECK(steps.size() == expected);
    CHECK(steps.front().at("position") == "0");

    const auto lim = run({"simulate", "--what", "limit", "--q", "0.6", "--seed", "9", "--paths", "3"});
    const auto lrows = table(lim.out, "limit_paths");
    REQUIRE(lrows.size() == 33);
    CHECK(num(lrows[0].at("H")) == doctest::Approx(1.25));

    const auto pmf = run({"simulate", "--what", "pmf", "--q", "0.6", "--n", "1"});
    CHECK(pmf.code == kExitOk);
    const auto prow = table(pmf.out, "pmf");
    REQUIRE(!prow.empty());
    CHECK(prow[0].at("u1") == "0");
    CHECK(num(prow[0].at("prob")) == doctest::Approx(0.6));

    CHECK(run({"simulate", "--what", "nothing", "--q", "0.6", "--seed", "1"}).code == kExitConfig);
    CHECK(run({"simulate", "--q", "0.6"}).code == kExitConfig);
}

TEST_CASE("reports are reproducible and independent of workers") {
    const std::vector<std::string> base{"compare", "--q", "0.6", "--N", "64", "--runs", "1500", "--seed", "77"};
    auto a = base, b = base, c = base;
    a.insert(a.end(), {"--workers", "1"});
    b.insert(b.end(), {"--workers", "1"});
    c.insert(c.end(), {"--workers", "3"});
    const auto ra = run(a), rb = run(b), rc = run(c);
    CHECK(ra.out == rb.out);
    CHECK(body(ra.out) == body(rc.out));

    const auto va = run({"verify", "--q", "0.55", "--excursions", "3000", "--seed", "5", "--workers", "1"});
    const auto vb = run({"verify", "--q", "0.55", "--excursions", "3000", "--seed", "5", "--workers", "4"});
    CHECK(body(va.out) == body(vb.out));
}

TEST_CASE("metadata header echoes the configuration") {
    const auto r = run({"verify", "--q", "0.6", "--excursions", "7", "--seed", "123", "--cap", "5000"});
    const auto lines = lines_of(r.out);
    auto has = [&](const std::string& s) { return std::find(lines.begin(), lines.end(), s) != lines.end(); };
    CHECK(has("# tool: rwlt"));
    CHECK(has("# command: verify"));
    CHECK(has("# seed: 123"));
    CHECK(has("# q: 0.6"));
    CHECK(has("# excursions: 7"));
    CHECK(has("# cap: 5000"));
    CHECK(has("# workers: 1"));
}

TEST_CASE("json output mirrors the csv fields") {
    const auto csv = run({"converge", "--q", "0.6", "--N", "10,100"});
    const auto js = run({"converge", "--q", "0.6", "--N", "10,100", "--format", "json"});
    CHECK(js.code == kExitOk);
    const auto doc = nlohmann::json::parse(js.out);
    CHECK(doc["metadata"]["command"] == "converge");
    const auto rows = doc["tables"]["convergence"];
    REQUIRE(rows.size() == 2);
    const auto csv_rows = table(csv.out, "convergence");
    for (const auto& [key, value] : csv_rows[1]) {
        CAPTURE(key);
        REQUIRE(rows[1].contains(key));
        if (!value.empty()) CHECK(rows[1][key].get<double>() == doctest::Approx(num(value)));
    }
    CHECK(doc["summary"]["converged"] == true);
}

TEST_CASE("params file and output file") {
    const std::string cfg = "rwlt_test_params.conf";
    const std::string out = "rwlt_test_out.csv";
    {
        std::ofstream f(cfg);
        f << "# comment\nq = 0.6\nseed=11\nexcursions=20\n";
    }
    const auto r = run({"verify", "--params-file", cfg, "--out", out});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("# excursions: 20") != std::string::npos);
    CHECK(ss.str().find("# seed: 11") != std::string::npos);

    // command-line flags win over the file
    const auto r2 = run({"verify", "--params-file", cfg, "--excursions", "3", "--q", "0.55"});
    CHECK(r2.out.find("# excursions: 3") != std::string::npos);
    CHECK(r2.out.find("# q: 0.55") != std::string::npos);

    {
        std::ofstream f(cfg);
        f << "L=2\np1=0.2\np2=0.2\nq=0.6\nseed=1\nexcursions=2\n";
    }
    CHECK(run({"verify", "--params-file", cfg}).code == kExitOk);
    {
        std::ofstream f(cfg);
        f << "q=0.6\nbogus=1\n";
    }
    CHECK(run({"verify", "--params-file", cfg, "--seed", "1"}).code == kExitConfig);
    CHECK(run({"verify", "--params-file", "does-not-exist.conf", "--seed", "1"}).code == kExitConfig);
    std::remove(cfg.c_str());
    std::remove(out.c_str());
}

TEST_CASE("help and parse errors") {
    const auto h = run({"verify", "--help"});
    CHECK(h.code == kExitOk);
    CHECK(h.out.find("excursions,discarded,checks,failures") != std::string::npos);
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"verify", "--nope"}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitConfig);
    CHECK(run({"verify", "--q", "0.6", "--seed", "1", "--format", "xml"}).code == kExitConfig);
}
