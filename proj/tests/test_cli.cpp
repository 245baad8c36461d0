#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "lipband/cli.hpp"

using namespace lipband;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        char buf[32];
        std::snprintf(buf, sizeof buf, "lipband-%08x", rd());
        path = fs::temp_directory_path() / buf;
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

// cmd_* print their reports to std::cout; tests read them from here instead.
struct CoutCapture {
    std::ostringstream ss;
    std::streambuf* old;
    CoutCapture() : old(std::cout.rdbuf(ss.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(old); }
    std::string text() const { return ss.str(); }
};

std::string write_config(const fs::path& dir, const std::string& extra = "") {
    const fs::path p = dir / "exp.cfg";
    std::ofstream out(p);
    out << "[env]\n"
           "players = 2\n"
           "dim = 1\n"
           "lipschitz = 1\n"
           "norm = l2\n"
           "mean_family = cone\n"
           "peaks = 0.62 0.38 : 0.9\n"
           "noise = bernoulli\n"
           "[experiment]\n"
           "algorithm = mcab_a\n"
           "horizon = 300\n"
           "trials = 2\n"
           "seed = 11\n"
           "grid_k = 2\n"
        << extra;
    return p.string();
}

std::string output_dir_of(const std::string& stdout_text) {
    const std::string key = "output_dir = ";
    const std::size_t at = stdout_text.rfind(key);
    REQUIRE(at != std::string::npos);
    const std::size_t end = stdout_text.find('\n', at);
    return stdout_text.substr(at + key.size(), end - at - key.size());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("run writes a complete experiment directory") {
    TempDir tmp;
    const std::string cfg = write_config(tmp.path);
    CliOverrides ov;
    ov.out_dir = (tmp.path / "out").string();

    CoutCapture cap;
    const int rc = cmd_run(cfg, ov);
    std::cout.flush();
    REQUIRE(rc == 0);

    const fs::path dir = output_dir_of(cap.text());
    CHECK(fs::is_regular_file(dir / "config.txt"));
    CHECK(fs::is_regular_file(dir / "trial_0000.csv"));
    CHECK(fs::is_regular_file(dir / "trial_0001.csv"));
    CHECK(fs::is_regular_file(dir / "summary.txt"));

    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("config_hash = ") != std::string::npos);
    CHECK(summary.find("algorithm = mcab_a") != std::string::npos);
    CHECK(summary.find("grid_k = 2") != std::string::npos);
    CHECK(summary.find("mean_regret = ") != std::string::npos);
    CHECK(summary.find("inconsistent_episodes = 0") != std::string::npos);
    CHECK(cap.text().find("mean_regret = ") != std::string::npos);

    const std::string trial = slurp(dir / "trial_0000.csv");
    CHECK(trial.rfind("t,arm,gap,cum_regret,good\n", 0) == 0);

    SUBCASE("plot-data aggregates the trials") {
        CoutCapture cap2;
        REQUIRE(cmd_plot_data(dir.string()) == 0);
        const std::string curve = slurp(dir / "plot" / "curve.csv");
        CHECK(curve.rfind("t,mean_cum_regret,std_cum_regret\n", 0) == 0);
        // 300 rounds fit under the point cap, so one row per round plus header
        CHECK(std::count(curve.begin(), curve.end(), '\n') == 301);
    }
}

TEST_CASE("identical configs rerun byte-identical trials") {
    TempDir tmp;
    const std::string cfg = write_config(tmp.path);
    std::string first, second;
    for (int round = 0; round < 2; ++round) {
        CliOverrides ov;
        ov.out_dir = (tmp.path / ("out" + std::to_string(round))).string();
        CoutCapture cap;
        REQUIRE(cmd_run(cfg, ov) == 0);
        const fs::path dir = output_dir_of(cap.text());
        (round == 0 ? first : second) = slurp(dir / "trial_0001.csv");
    }
    CHECK(first == second);
}

TEST_CASE("run distinguishes unreadable input from invalid settings") {
    TempDir tmp;
    CliOverrides ov;
    ov.out_dir = (tmp.path / "out").string();

    CHECK(cmd_run((tmp.path / "missing.cfg").string(), ov) == 2);

    const fs::path garbled = tmp.path / "garbled.cfg";
    std::ofstream(garbled) << "players = 2\n";  // key before any section
    CHECK(cmd_run(garbled.string(), ov) == 2);

    const std::string bad = write_config(tmp.path, "level_cap = 99\n");
    CHECK(cmd_run(bad, ov) == 1);
}

TEST_CASE("sweep runs each horizon and fits the growth rate") {
    TempDir tmp;
    const std::string cfg = write_config(tmp.path);
    CliOverrides ov;
    ov.out_dir = (tmp.path / "out").string();
    ov.trials = 2;

    CHECK(cmd_sweep(cfg, {64, 128}, ov) == 2);
    CHECK(cmd_sweep(cfg, {64, 64, 64}, ov) == 2);

    CoutCapture cap;
    REQUIRE(cmd_sweep(cfg, {64, 128, 256}, ov) == 0);
    const fs::path dir = output_dir_of(cap.text());

    for (const char* sub : {"T_00000064", "T_00000128", "T_00000256"}) {
        CHECK(fs::is_regular_file(dir / sub / "config.txt"));
        CHECK(fs::is_regular_file(dir / sub / "trial_0000.csv"));
        CHECK(fs::is_regular_file(dir / sub / "summary.txt"));
    }

    const std::string table = slurp(dir / "sweep_summary.csv");
    CHECK(table.rfind("horizon,grid_k,mean_regret,std_regret\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    CHECK(table.find("\n64,") != std::string::npos);

    const std::string fitfile = slurp(dir / "sweep.txt");
    CHECK(fitfile.find("slope = ") != std::string::npos);
    CHECK(fitfile.find("uniform_rate_exponent = 0.75") != std::string::npos);
}

TEST_CASE("plot-data rejects directories without trials") {
    TempDir tmp;
    CHECK(cmd_plot_data((tmp.path / "nowhere").string()) == 2);
    CHECK(cmd_plot_data(tmp.str()) == 2);

    // a malformed trial file is contagious
    std::ofstream(tmp.path / "trial_0000.csv") << "t,arm\n";
    CHECK(cmd_plot_data(tmp.str()) == 2);
}

TEST_CASE("verify reports unreadable configs") {
    TempDir tmp;
    CHECK(cmd_verify((tmp.path / "missing.cfg").string()) == 2);
}
