// Release gate: replays the full experiment battery and prints one
// [PASS]/[FAIL] line per criterion.  Exit code is the number of failures.
// Heavy cells fan out over hardware threads; every job writes its own slot,
// so no locks beyond the scheduler counter.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lipband/cli.hpp"
#include "lipband/config.hpp"
#include "lipband/env.hpp"
#include "lipband/geometry.hpp"
#include "lipband/harness.hpp"
#include "lipband/uniform.hpp"

using namespace lipband;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn, std::string& first_error) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, jobs));
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (first_error.empty()) first_error = e.what();
                }
            }
        });
    for (auto& th : pool) th.join();
}

EnvModel cone2(double px = 0.62, double py = 0.38) {
    return EnvModel(2, 1, 1.0, Norm::L2, MeanFamily::CONE, {Peak{{px, py}, 0.9}},
                    NoiseKind::BERNOULLI, 0.5);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. Every mcab_a player tracks the central UCB controller decision for
//    decision, so the joint trajectory is the single-agent one.
Outcome grid_matches_controller() {
    const EnvModel env = cone2();
    const std::uint64_t T = 2000;
    const int ks[] = {2, 4};
    std::atomic<std::uint64_t> matched{0};
    std::string err;
    parallel_for(40, [&](std::size_t i) {
        const int k = ks[i / 20];
        const std::uint64_t trial = i % 20;
        RunParams p;
        p.algorithm = AlgorithmKind::MCAB_A;
        p.horizon = T;
        p.grid_k = k;
        p.root_seed = 7;
        p.trial = trial;
        const EpisodeResult res = run_episode(env, p);
        const auto ref = run_ucb_grid_reference(env, GridSpec{k, 2, 1}, T, 7, trial);
        if (res.trace.arm_rank == ref) matched.fetch_add(1);
    }, err);
    Outcome out;
    out.ok = err.empty() && matched.load() == 40;
    out.detail = std::to_string(matched.load()) + "/40 episodes identical";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 2. Same for mzoom_a against the central zooming controller.
Outcome zoom_matches_controller() {
    const EnvModel env = cone2();
    const std::uint64_t T = 2000;
    std::atomic<std::uint64_t> matched{0};
    std::string err;
    parallel_for(20, [&](std::size_t trial) {
        RunParams p;
        p.algorithm = AlgorithmKind::MZOOM_A;
        p.horizon = T;
        p.level_cap = 12;
        p.root_seed = 7;
        p.trial = trial;
        const EpisodeResult res = run_episode(env, p);
        const auto ref = run_zoom_reference(env, T, 12, 7, trial);
        bool same = res.trace.arm_coords.size() == ref.size() * 2;
        for (std::size_t r = 0; same && r < ref.size(); ++r)
            for (int a = 0; a < 2; ++a)
                if (res.trace.arm_coords[r * 2 + a] != ref[r][a]) same = false;
        if (same) matched.fetch_add(1);
    }, err);
    Outcome out;
    out.ok = err.empty() && matched.load() == 20;
    out.detail = std::to_string(matched.load()) + "/20 episodes identical";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 3. The silent-coordination variants never split: cross-player digests agree
//    every round and no commit round sees divergent picks.
Outcome coordination_stays_consistent() {
    struct Cell { AlgorithmKind algo; int players; };
    const Cell cells[] = {{AlgorithmKind::MCAB_B, 2},
                          {AlgorithmKind::MCAB_B, 3},
                          {AlgorithmKind::MZOOM_B, 2},
                          {AlgorithmKind::MZOOM_B, 3}};
    const std::uint64_t T = 5000, trials = 50;
    std::atomic<std::uint64_t> clean{0};
    std::string err;
    parallel_for(4 * trials, [&](std::size_t i) {
        const Cell& c = cells[i / trials];
        std::vector<double> peak{0.62, 0.38, 0.71};
        peak.resize(static_cast<std::size_t>(c.players));
        const EnvModel env(c.players, 1, 1.0, Norm::L2, MeanFamily::CONE, {Peak{peak, 0.9}},
                           NoiseKind::BERNOULLI, 0.5);
        RunParams p;
        p.algorithm = c.algo;
        p.horizon = T;
        p.grid_k = choose_grid_k(T, 1.0, c.players, 1, KRule::UCB);
        p.level_cap = 12;
        p.root_seed = 101;
        p.trial = i % trials;
        const EpisodeResult res = run_episode(env, p);
        if (res.players_consistent && res.miscoordination_rounds == 0 &&
            res.inconsistency.empty())
            clean.fetch_add(1);
    }, err);
    Outcome out;
    out.ok = err.empty() && clean.load() == 4 * trials;
    out.detail = std::to_string(clean.load()) + "/200 episodes with zero miscoordination";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 4. The re-derived estimate books stay inside their confidence widths in
//    almost every episode.
Outcome good_event_holds() {
    const EnvModel env = cone2();
    const std::uint64_t trials = 2000;
    std::atomic<std::uint64_t> violated{0};
    std::string err;
    parallel_for(trials, [&](std::size_t trial) {
        RunParams p;
        p.algorithm = AlgorithmKind::MCAB_A;
        p.horizon = 1000;
        p.grid_k = 2;
        p.root_seed = 5;
        p.trial = trial;
        if (!run_episode(env, p).good.held) violated.fetch_add(1);
    }, err);
    const double freq = static_cast<double>(violated.load()) / static_cast<double>(trials);
    Outcome out;
    out.ok = err.empty() && freq <= 0.02;
    out.detail = "violation frequency " + fmt("%.5f", freq) + " (limit 0.02)";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 5. Empirical sample-mean tails sit under the sub-gaussian bound.
Outcome tails_under_bound() {
    const auto pts = concentration_check(1.0, 50, {0.2, 0.4, 0.6}, 100000, 17);
    Outcome out;
    std::string detail;
    for (const auto& pt : pts) {
        if (!pt.pass) out.ok = false;
        if (!detail.empty()) detail += ", ";
        detail += "eps " + fmt("%.1f", pt.epsilon) + ": " + fmt("%.5f", pt.violation_freq) +
                  " vs " + fmt("%.5f", pt.bound + pt.slack);
    }
    out.detail = detail;
    return out;
}

// 6. Continuum regret of the grid policies decomposes into grid regret plus
//    the resolution term on randomly drawn settings.  The nearest-marker
//    distance bound only covers T*L/K when the norm and axis count agree
//    (l2 up to 4 axes, l1 up to 2), so the draw respects that.
Outcome discretization_splits() {
    struct Draw {
        int players, dim, k;
        Norm norm;
        MeanFamily family;
        NoiseKind noise;
        double lipschitz, sigma;
        std::vector<Peak> peaks;
        AlgorithmKind algo;
    };
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::pair<int, int> l1_dims[] = {{1, 1}, {2, 1}, {1, 2}};
    const std::pair<int, int> l2_dims[] = {{1, 1}, {2, 1}, {1, 2}, {3, 1}, {2, 2}, {4, 1}};
    const std::pair<int, int> linf_dims[] = {{1, 1}, {2, 1}, {3, 1}, {2, 2}, {3, 2}, {2, 3}};
    const AlgorithmKind grid_algos[] = {AlgorithmKind::MCAB_A, AlgorithmKind::MCAB_B,
                                        AlgorithmKind::MCAB_C};

    std::vector<Draw> draws;
    for (int i = 0; i < 100; ++i) {
        Draw d;
        d.norm = static_cast<Norm>(rng() % 3);
        const auto pick = [&](const auto& table) {
            return table[rng() % (sizeof(table) / sizeof(table[0]))];
        };
        const auto [m, dd] = d.norm == Norm::L1   ? pick(l1_dims)
                             : d.norm == Norm::L2 ? pick(l2_dims)
                                                  : pick(linf_dims);
        d.players = m;
        d.dim = dd;
        const int axes = m * dd;
        int hi = 16;
        while (std::pow(static_cast<double>(hi + 1), axes) > 20000.0) --hi;
        d.k = 4 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, hi - 3)));
        d.family = static_cast<MeanFamily>(rng() % 3);
        d.noise = (rng() % 2) ? NoiseKind::GAUSSIAN : NoiseKind::BERNOULLI;
        d.lipschitz = 0.4 + 1.2 * unit(rng);
        d.sigma = 0.3 + 0.4 * unit(rng);
        const int npeaks = d.family == MeanFamily::MULTI_PEAK ? 2 : 1;
        for (int pk = 0; pk < npeaks; ++pk) {
            Peak peak;
            for (int a = 0; a < axes; ++a) peak.at.push_back(unit(rng));
            peak.height = 0.3 + 0.6 * unit(rng);
            d.peaks.push_back(peak);
        }
        d.algo = grid_algos[rng() % 3];
        draws.push_back(std::move(d));
    }

    std::atomic<std::uint64_t> passed{0};
    std::string err;
    parallel_for(draws.size(), [&](std::size_t i) {
        const Draw& d = draws[i];
        const EnvModel env(d.players, d.dim, d.lipschitz, d.norm, d.family, d.peaks,
                           d.noise, d.sigma);
        RunParams p;
        p.algorithm = d.algo;
        p.horizon = 1500;
        p.grid_k = d.k;
        p.root_seed = 900 + i;
        p.trial = 0;
        const EpisodeResult res = run_episode(env, p);
        const auto split = discretization_check(res.trace, env, GridSpec{d.k, d.players, d.dim});
        if (split.pass) passed.fetch_add(1);
    }, err);
    Outcome out;
    out.ok = err.empty() && passed.load() == draws.size();
    out.detail = std::to_string(passed.load()) + "/100 random settings decompose";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 7. Elimination never throws away a ball still containing the optimum.
//    The corner peak leaves every early ball with a fat gap, so runs really
//    do eliminate; a sample with no eliminations would prove nothing.
Outcome elimination_keeps_best() {
    const EnvModel env(2, 1, 0.8, Norm::L2, MeanFamily::CONE, {Peak{{1.0, 1.0}, 0.9}},
                       NoiseKind::BERNOULLI, 0.5);
    const std::uint64_t trials = 100;
    std::atomic<std::uint64_t> bad_arms{0};
    std::atomic<std::uint64_t> eliminated_total{0};
    std::string err;
    parallel_for(trials, [&](std::size_t trial) {
        RunParams p;
        p.algorithm = AlgorithmKind::MZOOM_B;
        p.horizon = 10000;
        p.level_cap = 12;
        p.root_seed = 31;
        p.trial = trial;
        const EpisodeResult res = run_episode(env, p);
        for (const auto& a : res.arms) {
            if (!a.eliminated) continue;
            eliminated_total.fetch_add(1);
            if (distance(a.center, env.optimal_arm(), Norm::L2) + 1e-12 <= a.frozen_radius)
                bad_arms.fetch_add(1);
        }
    }, err);
    Outcome out;
    out.ok = err.empty() && bad_arms.load() == 0 && eliminated_total.load() > 0;
    out.detail = std::to_string(eliminated_total.load()) + " eliminated balls across 100 runs, " +
                 std::to_string(bad_arms.load()) + " contained the optimum";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 8. Per-ball pull counts respect the gap bound c*ln(T)/gap^2 + 1.
Outcome pulls_respect_gaps() {
    const EnvModel env = cone2();
    const std::uint64_t T = 10000, trials = 50;
    const double c_a = 54.0;
    const double c_b = 233.8234;  // (6*sqrt(3) + 2*sqrt(6))^2, rounded up
    std::atomic<std::uint64_t> over{0};
    std::atomic<std::uint64_t> arms_seen{0};
    std::string err;
    parallel_for(2 * trials, [&](std::size_t i) {
        const bool variant_b = i >= trials;
        RunParams p;
        p.algorithm = variant_b ? AlgorithmKind::MZOOM_B : AlgorithmKind::MZOOM_A;
        p.horizon = T;
        p.level_cap = 12;
        p.root_seed = 47;
        p.trial = i % trials;
        const EpisodeResult res = run_episode(env, p);
        const double logT = std::log(static_cast<double>(T));
        const double c = variant_b ? c_b : c_a;
        for (const auto& a : res.arms) {
            if (a.gap <= 1e-12) continue;
            arms_seen.fetch_add(1);
            const double cap = c * logT / (a.gap * a.gap) + 1.0;
            if (static_cast<double>(a.pulls) > cap + 1e-9) over.fetch_add(1);
        }
    }, err);
    Outcome out;
    out.ok = err.empty() && over.load() == 0;
    out.detail = std::to_string(arms_seen.load()) + " balls checked, " +
                 std::to_string(over.load()) + " over budget";
    if (!err.empty()) out.detail += " [" + err + "]";
    return out;
}

// 9. Mean regret grows sublinearly in the horizon for all five algorithms,
//    and adaptive zooming beats the uniform grid at the longest horizon.
Outcome regret_sublinear() {
    const EnvModel env(2, 1, 1.0, Norm::L2, MeanFamily::CONE, {Peak{{0.1428, 0.8572}, 0.9}},
                       NoiseKind::BERNOULLI, 0.5);
    const AlgorithmKind algos[] = {AlgorithmKind::MCAB_A, AlgorithmKind::MCAB_B,
                                   AlgorithmKind::MCAB_C, AlgorithmKind::MZOOM_A,
                                   AlgorithmKind::MZOOM_B};
    const std::uint64_t horizons[] = {1u << 12, 1u << 13, 1u << 14, 1u << 15, 1u << 16, 1u << 17};
    const std::size_t na = 5, nh = 6, trials = 50;

    std::vector<double> regret(na * nh * trials, 0.0);
    std::string err;
    parallel_for(na * nh * trials, [&](std::size_t i) {
        const std::size_t ai = i / (nh * trials);
        const std::size_t hi = (i / trials) % nh;
        const AlgorithmKind algo = algos[ai];
        const std::uint64_t T = horizons[hi];
        RunParams p;
        p.algorithm = algo;
        p.horizon = T;
        p.level_cap = 12;
        p.root_seed = 400;
        p.trial = i % trials;
        if (algo == AlgorithmKind::MCAB_C)
            p.grid_k = choose_grid_k(T, 1.0, 2, 1, KRule::DSEE);
        else if (algo != AlgorithmKind::MZOOM_A && algo != AlgorithmKind::MZOOM_B)
            p.grid_k = choose_grid_k(T, 1.0, 2, 1, KRule::UCB);
        regret[i] = run_episode(env, p).total_regret;
    }, err);
    if (!err.empty()) return {false, err};

    Outcome out;
    std::string detail;
    std::vector<double> final_mean(na, 0.0);
    for (std::size_t ai = 0; ai < na; ++ai) {
        std::vector<double> xs, ys;
        for (std::size_t hi = 0; hi < nh; ++hi) {
            double sum = 0.0;
            for (std::size_t t = 0; t < trials; ++t)
                sum += regret[(ai * nh + hi) * trials + t];
            xs.push_back(static_cast<double>(horizons[hi]));
            ys.push_back(sum / static_cast<double>(trials));
        }
        final_mean[ai] = ys.back();
        const double slope = fit_loglog(xs, ys).slope;
        if (!(slope < 0.98)) out.ok = false;
        if (!detail.empty()) detail += ", ";
        detail += to_string(algos[ai]) + " " + fmt("%.3f", slope);
    }
    if (!(final_mean[3] <= final_mean[0])) {
        out.ok = false;
        detail += ", zoom tail above grid tail";
    }
    out.detail = "slopes " + detail;
    return out;
}

// 10. Identical parameters replay byte-identical episodes, through the
//     library and through the CLI.
Outcome runs_are_reproducible() {
    const EnvModel env = cone2();
    const AlgorithmKind algos[] = {AlgorithmKind::MCAB_A, AlgorithmKind::MCAB_B,
                                   AlgorithmKind::MCAB_C, AlgorithmKind::MZOOM_A,
                                   AlgorithmKind::MZOOM_B};
    Outcome out;
    for (const auto algo : algos) {
        RunParams p;
        p.algorithm = algo;
        p.horizon = 300;
        p.grid_k = 3;
        p.level_cap = 12;
        p.root_seed = 77;
        p.trial = 3;
        const EpisodeResult r1 = run_episode(env, p);
        const EpisodeResult r2 = run_episode(env, p);
        if (trace_csv(r1.trace, r1.good) != trace_csv(r2.trace, r2.good)) {
            out.ok = false;
            out.detail = to_string(algo) + " episodes diverged";
            return out;
        }
    }

    std::random_device rd;
    char buf[32];
    std::snprintf(buf, sizeof buf, "accept-%08x", rd());
    const fs::path tmp = fs::temp_directory_path() / buf;
    fs::create_directories(tmp);
    const fs::path cfg_path = tmp / "exp.cfg";
    std::ofstream(cfg_path) << "[env]\nplayers = 2\ndim = 1\nlipschitz = 1\nnorm = l2\n"
                               "mean_family = cone\npeaks = 0.62 0.38 : 0.9\nnoise = bernoulli\n"
                               "[experiment]\nalgorithm = mcab_a\nhorizon = 300\ntrials = 2\n"
                               "seed = 11\ngrid_k = 2\n";
    std::string files[2];
    for (int round = 0; round < 2; ++round) {
        CliOverrides ov;
        ov.out_dir = (tmp / ("out" + std::to_string(round))).string();
        std::ostringstream capture;
        std::streambuf* old = std::cout.rdbuf(capture.rdbuf());
        const int rc = cmd_run(cfg_path.string(), ov);
        std::cout.rdbuf(old);
        if (rc != 0) {
            out.ok = false;
            out.detail = "cmd_run exit " + std::to_string(rc);
            break;
        }
        const std::string text = capture.str();
        const std::string key = "output_dir = ";
        const auto at = text.rfind(key);
        const auto end = text.find('\n', at);
        const fs::path dir = text.substr(at + key.size(), end - at - key.size());
        std::ifstream in(dir / "trial_0001.csv", std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[round] = ss.str();
    }
    if (out.ok && (files[0].empty() || files[0] != files[1])) {
        out.ok = false;
        out.detail = "CLI reruns differ";
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    if (out.ok) out.detail = "5 algorithm replays and a CLI rerun byte-identical";
    return out;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    const Criterion criteria[] = {
        {"grid players match the central controller", grid_matches_controller},
        {"zoom players match the central controller", zoom_matches_controller},
        {"silent coordination never splits", coordination_stays_consistent},
        {"estimate books stay inside their widths", good_event_holds},
        {"sample-mean tails sit under the bound", tails_under_bound},
        {"continuum regret splits at the grid", discretization_splits},
        {"elimination keeps the best ball", elimination_keeps_best},
        {"per-ball pulls respect the gap bound", pulls_respect_gaps},
        {"mean regret grows sublinearly", regret_sublinear},
        {"identical seeds replay identical runs", runs_are_reproducible},
    };

    int failures = 0;
    int num = 0;
    for (const auto& c : criteria) {
        ++num;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d %-42s %s (%.1fs)\n", out.ok ? "PASS" : "FAIL", num, c.name,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.ok) ++failures;
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures;
}
