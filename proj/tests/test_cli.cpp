#include <doctest.h>

#include "evoctl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path tmp_root() {
    const char* env = std::getenv("EVOCTL_TEST_TMP");
    fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "evoctl_cli_test";
    fs::create_directories(p);
    return p;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = tmp_root() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "evoctl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return evoctl::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("wellposed reports the certified constant") {
    const auto d = fresh_dir("wellposed");
    CHECK(run({"wellposed", "--output-dir", d.string()}) == 0);
    const std::string text = slurp(d / "wellposed.csv");
    CHECK(text.find("ok=1") != std::string::npos);
    const auto rows = csv_rows(d / "wellposed.csv");
    REQUIRE(rows.size() > 2);
    CHECK(rows[0][0] == "nu");
    for (size_t i = 1; i < rows.size(); ++i) {
        const double nu = std::stod(rows[i][0]), c = std::stod(rows[i][1]);
        CHECK(std::abs(c - std::min(nu, 1.0 - 1.0 / std::sqrt(2.0))) <= 1e-10);
    }
}

TEST_CASE("zero damping fails the certificate") {
    const auto d = fresh_dir("wellposed_zero");
    CHECK(run({"wellposed", "--zero-damping", "--output-dir", d.string()}) == 1);
    CHECK(slurp(d / "wellposed.csv").find("ok=0") != std::string::npos);
}

TEST_CASE("simulate writes a closed ledger for every control preset") {
    for (std::string preset : {"wave-wt", "wave-mixed", "port-hamiltonian"}) {
        const auto d = fresh_dir("sim_" + preset);
        CHECK(run({"simulate", "--set", "preset=" + preset, "--set", "time.n_steps=80", "--set", "grid.n_cells=16",
                   "--output-dir", d.string()}) == 0);
        const auto ledger = csv_rows(d / "ledger.csv");
        REQUIRE(ledger.size() >= 2);
        CHECK(ledger[0] == std::vector<std::string>{"a", "b", "stored_drop", "dissipation", "supply", "defect"});
        for (size_t i = 1; i < ledger.size(); ++i) CHECK(std::abs(std::stod(ledger[i][5])) <= 1e-9);
        const auto traj = csv_rows(d / "trajectory.csv");
        CHECK(traj.size() == 82);
        CHECK(csv_rows(d / "io.csv").size() == 81);
    }
}

TEST_CASE("simulate output is deterministic") {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const std::vector<std::string> common{"simulate", "--set", "time.n_steps=40", "--set", "grid.n_cells=12"};
    auto with_dir = [&](const fs::path& d) {
        auto v = common;
        v.push_back("--output-dir");
        v.push_back(d.string());
        return v;
    };
    REQUIRE(run(with_dir(a)) == 0);
    REQUIRE(run(with_dir(b)) == 0);
    for (const char* f : {"trajectory.csv", "ledger.csv", "io.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "ledger.csv").find('\r') == std::string::npos);
}

TEST_CASE("energy recomputes the ledger from a stored trajectory") {
    const auto d = fresh_dir("energy");
    const std::vector<std::string> cfg{"--set", "time.n_steps=60", "--set", "grid.n_cells=10", "--output-dir",
                                       d.string()};
    auto args = cfg;
    args.insert(args.begin(), "simulate");
    REQUIRE(run(args) == 0);
    const std::string first = slurp(d / "ledger.csv");
    fs::remove(d / "ledger.csv");
    args = cfg;
    args.insert(args.begin(), "energy");
    CHECK(run(args) == 0);
    CHECK(slurp(d / "ledger.csv") == first);
}

TEST_CASE("backward Euler ledger is accepted with its numerical dissipation") {
    const auto d = fresh_dir("sim_be");
    CHECK(run({"simulate", "--set", "scheme=backward_euler", "--set", "time.n_steps=40", "--output-dir",
               d.string()}) == 0);
    const auto ledger = csv_rows(d / "ledger.csv");
    CHECK(std::stod(ledger[1][5]) > 0.0);
}

TEST_CASE("maxwell preset writes the lifting gap") {
    const auto d = fresh_dir("maxwell");
    CHECK(run({"simulate", "--set", "preset=maxwell-lift-1d", "--set", "input.kind=zero", "--set",
               "time.n_steps=30", "--output-dir", d.string()}) == 0);
    const auto rows = csv_rows(d / "lift.csv");
    REQUIRE(rows.size() == 32);
    for (size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) <= 1e-12);
}

TEST_CASE("bdspace report") {
    const auto d = fresh_dir("bdspace");
    CHECK(run({"bdspace", "--set", "grid.n_cells=24", "--output-dir", d.string()}) == 0);
    const std::string text = slurp(d / "bd_defects.csv");
    CHECK(text.rfind("# seed=", 0) == 0);
    const auto rows = csv_rows(d / "bd_defects.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "24");
    CHECK(rows[1][1] == "2");
    CHECK(rows[1][2] == "2");
    for (size_t c = 3; c < rows[1].size(); ++c) CHECK(std::stod(rows[1][c]) <= 1e-10);
    CHECK(csv_rows(d / "bd_basis.csv").size() == 1 + 25 + 24);
}

TEST_CASE("invalid input exits with code 2") {
    const auto d = fresh_dir("invalid");
    CHECK(run({"bdspace", "--set", "grid.n_cells=1", "--output-dir", d.string()}) == 2);
    CHECK(run({"simulate", "--set", "preset=heat", "--output-dir", d.string()}) == 2);
    CHECK(run({"simulate", "--set", "time.n_steps=0", "--output-dir", d.string()}) == 2);
    CHECK(run({"simulate", "--config", (d / "missing.json").string()}) == 2);
    CHECK(run({"simulate", "--set", "novalue"}) == 2);
    std::ofstream(d / "bad.json") << "{ not json";
    CHECK(run({"wellposed", "--config", (d / "bad.json").string()}) == 2);
}

TEST_CASE("config file and overrides") {
    const auto d = fresh_dir("config");
    std::ofstream(d / "cfg.json") << R"({"preset": "port-hamiltonian", "grid": {"n_cells": 8},
                                         "time": {"n_steps": 20}, "output_dir": ")"
                                  << (d / "out").string() << R"("})";
    CHECK(run({"simulate", "--config", (d / "cfg.json").string()}) == 0);
    CHECK(fs::exists(d / "out" / "ledger.csv"));
    CHECK(csv_rows(d / "out" / "trajectory.csv").size() == 22);
}

TEST_CASE("tabulated input") {
    const auto d = fresh_dir("table");
    std::ofstream(d / "u.csv") << "t,u0,u1\n0,0,0\n1,1,0\n2,0,0.5\n";
    CHECK(run({"simulate", "--set", "input.kind=table", "--set", "input.path=" + (d / "u.csv").string(), "--set",
               "time.n_steps=40", "--output-dir", d.string()}) == 0);
    const auto io = csv_rows(d / "io.csv");
    // Second step is evaluated at t = 0.075; u₀ interpolates to 0.075.
    CHECK(std::stod(io[2][0]) == doctest::Approx(0.075));
    CHECK(std::stod(io[2][1]) == doctest::Approx(0.075));
}
