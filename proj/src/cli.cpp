#include "lipband/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "lipband/config.hpp"
#include "lipband/rng.hpp"

namespace fs = std::filesystem;

namespace lipband {
namespace {

int effective_jobs(int requested, std::uint64_t trials) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    int jobs = requested > 0 ? requested : hw;
    jobs = std::min<std::uint64_t>(static_cast<std::uint64_t>(jobs), trials);
    return std::max(1, std::min(jobs, 32));
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path fresh_dir(const fs::path& base, const std::string& label) {
    fs::create_directories(base);
    const fs::path stem = base / (label + "-" + timestamp_utc());
    fs::path cand = stem;
    for (int i = 2; fs::exists(cand); ++i)
        cand = fs::path(stem.string() + "-" + std::to_string(i));
    fs::create_directories(cand);
    return cand;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<EpisodeResult> run_trials(const EnvModel& env, const ExperimentConfig& cfg,
                                      int jobs) {
    std::vector<EpisodeResult> results(static_cast<std::size_t>(cfg.trials));
    std::atomic<std::uint64_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= cfg.trials) break;
                    results[i] = run_episode(env, make_run_params(cfg, i));
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
                next = cfg.trials;
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

struct BatchSummary {
    double mean = 0.0, stdev = 0.0, lo = 0.0, hi = 0.0;
    std::uint64_t good_violation_episodes = 0;
    std::uint64_t inconsistent_episodes = 0;
    std::uint64_t miscoordination_total = 0;
    std::uint64_t signal_total = 0;
    double arms_mean = 0.0;
    std::string first_inconsistency;
};

BatchSummary summarize(const std::vector<EpisodeResult>& results) {
    BatchSummary b;
    b.lo = kInfinity;
    b.hi = -kInfinity;
    for (const auto& r : results) {
        b.mean += r.total_regret;
        b.lo = std::min(b.lo, r.total_regret);
        b.hi = std::max(b.hi, r.total_regret);
        if (!r.good.held) ++b.good_violation_episodes;
        if (!r.players_consistent) {
            ++b.inconsistent_episodes;
            if (b.first_inconsistency.empty()) b.first_inconsistency = r.inconsistency;
        }
        b.miscoordination_total += r.miscoordination_rounds;
        b.signal_total += r.signal_rounds;
        b.arms_mean += static_cast<double>(r.arms.size());
    }
    const double n = static_cast<double>(results.size());
    b.mean /= n;
    b.arms_mean /= n;
    double var = 0.0;
    for (const auto& r : results) {
        const double d = r.total_regret - b.mean;
        var += d * d;
    }
    b.stdev = results.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return b;
}

bool is_zoom(AlgorithmKind a) {
    return a == AlgorithmKind::MZOOM_A || a == AlgorithmKind::MZOOM_B;
}

void write_summary(std::ostream& out, const ExperimentConfig& cfg, int grid_k,
                   const BatchSummary& b, const SlopeFit* tail) {
    out << "config_hash = " << config_hash(cfg) << "\n";
    out << "algorithm = " << to_string(cfg.algorithm) << "\n";
    out << "variant = " << to_string(variant_of(cfg.algorithm)) << "\n";
    out << "players = " << cfg.players << "\n";
    out << "dim = " << cfg.dim << "\n";
    out << "horizon = " << cfg.horizon << "\n";
    out << "trials = " << cfg.trials << "\n";
    if (is_zoom(cfg.algorithm)) {
        out << "level_cap = " << cfg.level_cap << "\n";
        out << "active_arms_mean = " << format_double(b.arms_mean) << "\n";
    } else {
        out << "grid_k = " << grid_k << "\n";
    }
    out << "mean_regret = " << format_double(b.mean) << "\n";
    out << "std_regret = " << format_double(b.stdev) << "\n";
    out << "min_regret = " << format_double(b.lo) << "\n";
    out << "max_regret = " << format_double(b.hi) << "\n";
    if (tail) {
        out << "tail_slope = " << format_double(tail->slope) << "\n";
        out << "tail_slope_stderr = " << format_double(tail->stderr_slope) << "\n";
    }
    out << "good_violation_episodes = " << b.good_violation_episodes << "\n";
    out << "inconsistent_episodes = " << b.inconsistent_episodes << "\n";
    out << "miscoordination_rounds_total = " << b.miscoordination_total << "\n";
    out << "signal_rounds_total = " << b.signal_total << "\n";
    if (!b.first_inconsistency.empty())
        out << "first_inconsistency = " << b.first_inconsistency << "\n";
}

void write_trial_files(const fs::path& dir, const std::vector<EpisodeResult>& results) {
    for (std::size_t i = 0; i < results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "trial_%04zu.csv", i);
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        write_trace_csv(out, results[i].trace, results[i].good);
        if (!out) throw std::runtime_error("write failed for " + (dir / name).string());
    }
}

ExperimentConfig load_config(const std::string& path, const CliOverrides& ov) {
    ExperimentConfig cfg = parse_config(read_file(path));
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.trials) cfg.trials = *ov.trials;
    return cfg;
}

} // namespace

int cmd_run(const std::string& config_path, const CliOverrides& overrides) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return 2;
    }
    const auto issues = validate_config(cfg);
    if (!issues.empty()) {
        for (const auto& s : issues) std::cerr << "invalid config: " << s << "\n";
        return 1;
    }
    try {
        const EnvModel env = make_env(cfg);
        const int grid_k = resolve_grid_k(cfg);
        const fs::path dir = fresh_dir(cfg.out_dir, "run-" + to_string(cfg.algorithm));
        {
            std::ofstream out(dir / "config.txt");
            out << serialize_config(cfg);
            if (!out) throw std::runtime_error("cannot write config.txt");
        }
        const auto results = run_trials(env, cfg, effective_jobs(overrides.jobs, cfg.trials));
        write_trial_files(dir, results);
        const BatchSummary batch = summarize(results);
        SlopeFit tail;
        bool have_tail = false;
        if (cfg.horizon >= 32) {
            try {
                std::vector<EpisodeTrace> traces;
                traces.reserve(results.size());
                for (const auto& r : results) traces.push_back(r.trace);
                tail = regret_slope(traces);
                have_tail = true;
            } catch (const std::exception&) {
            }
        }
        {
            std::ofstream out(dir / "summary.txt");
            write_summary(out, cfg, grid_k, batch, have_tail ? &tail : nullptr);
            if (!out) throw std::runtime_error("cannot write summary.txt");
        }
        write_summary(std::cout, cfg, grid_k, batch, have_tail ? &tail : nullptr);
        std::cout << "output_dir = " << dir.string() << "\n";
        if (batch.inconsistent_episodes > 0) {
            std::cerr << "error: player state diverged (" << batch.first_inconsistency << ")\n";
            return 1;
        }
        return 0;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& horizons_in,
              const CliOverrides& overrides) {
    if (horizons_in.size() < 3) {
        std::cerr << "error: sweep needs at least three horizons\n";
        return 2;
    }
    std::vector<std::uint64_t> horizons = horizons_in;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    if (horizons.size() < 3) {
        std::cerr << "error: sweep needs at least three distinct horizons\n";
        return 2;
    }
    ExperimentConfig base;
    try {
        base = load_config(config_path, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return 2;
    }
    try {
        bool any_inconsistent = false;
        std::string first_note;
        const fs::path dir = fresh_dir(base.out_dir, "sweep-" + to_string(base.algorithm));
        std::vector<std::uint64_t> ks;
        std::vector<double> means, stds;
        for (const std::uint64_t horizon : horizons) {
            ExperimentConfig cfg = base;
            cfg.horizon = horizon;
            const auto issues = validate_config(cfg);
            if (!issues.empty()) {
                for (const auto& s : issues)
                    std::cerr << "invalid config at horizon " << horizon << ": " << s << "\n";
                return 1;
            }
            const EnvModel env = make_env(cfg);
            const int grid_k = resolve_grid_k(cfg);
            char sub[32];
            std::snprintf(sub, sizeof sub, "T_%08llu", static_cast<unsigned long long>(horizon));
            const fs::path hdir = dir / sub;
            fs::create_directories(hdir);
            {
                std::ofstream out(hdir / "config.txt");
                out << serialize_config(cfg);
            }
            const auto results = run_trials(env, cfg, effective_jobs(overrides.jobs, cfg.trials));
            write_trial_files(hdir, results);
            const BatchSummary batch = summarize(results);
            {
                std::ofstream out(hdir / "summary.txt");
                write_summary(out, cfg, grid_k, batch, nullptr);
            }
            if (batch.inconsistent_episodes > 0 && !any_inconsistent) {
                any_inconsistent = true;
                first_note = batch.first_inconsistency;
            }
            ks.push_back(static_cast<std::uint64_t>(grid_k));
            means.push_back(batch.mean);
            stds.push_back(batch.stdev);
            std::cout << "horizon " << horizon << ": grid_k=" << grid_k
                      << " mean_regret=" << format_double(batch.mean) << "\n";
        }
        {
            std::ofstream out(dir / "sweep_summary.csv");
            out << "horizon,grid_k,mean_regret,std_regret\n";
            for (std::size_t i = 0; i < horizons.size(); ++i)
                out << horizons[i] << ',' << ks[i] << ',' << format_double(means[i]) << ','
                    << format_double(stds[i]) << "\n";
            if (!out) throw std::runtime_error("cannot write sweep_summary.csv");
        }
        std::vector<double> ts(horizons.begin(), horizons.end());
        const SlopeFit fit = fit_loglog(ts, means);
        const double md = static_cast<double>(base.players) * base.dim;
        const double theory = (md + 1.0) / (md + 2.0);
        {
            std::ofstream out(dir / "sweep.txt");
            out << "config_hash = " << config_hash(base) << "\n";
            out << "algorithm = " << to_string(base.algorithm) << "\n";
            out << "horizons =";
            for (const auto h : horizons) out << ' ' << h;
            out << "\n";
            out << "slope = " << format_double(fit.slope) << "\n";
            out << "slope_stderr = " << format_double(fit.stderr_slope) << "\n";
            out << "uniform_rate_exponent = " << format_double(theory) << "\n";
            if (!out) throw std::runtime_error("cannot write sweep.txt");
        }
        std::cout << "slope = " << format_double(fit.slope)
                  << " (uniform rate exponent " << format_double(theory) << ")\n";
        std::cout << "output_dir = " << dir.string() << "\n";
        if (any_inconsistent) {
            std::cerr << "error: player state diverged (" << first_note << ")\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_plot_data(const std::string& experiment_dir) {
    const fs::path dir(experiment_dir);
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        std::cerr << "error: not a directory: " << experiment_dir << "\n";
        return 2;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("trial_", 0) == 0 &&
            name.size() > 4 && name.substr(name.size() - 4) == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "error: no trial_*.csv files in " << experiment_dir << "\n";
        return 2;
    }
    std::vector<ParsedCurve> curves;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) {
            std::cerr << "error: cannot open " << f.string() << "\n";
            return 2;
        }
        try {
            curves.push_back(read_trace_csv(in));
        } catch (const std::exception& e) {
            std::cerr << "error: " << f.string() << ": " << e.what() << "\n";
            return 2;
        }
    }
    const std::size_t rounds = curves[0].t.size();
    for (const auto& c : curves) {
        if (c.t.size() != rounds) {
            std::cerr << "error: trial files disagree on horizon\n";
            return 1;
        }
    }
    const fs::path plot_dir = dir / "plot";
    fs::create_directories(plot_dir);
    const fs::path out_path = plot_dir / "curve.csv";
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write " << out_path.string() << "\n";
        return 2;
    }
    out << "t,mean_cum_regret,std_cum_regret\n";
    const std::size_t max_points = 1000;
    const std::size_t stride = std::max<std::size_t>(1, (rounds + max_points - 1) / max_points);
    const double n = static_cast<double>(curves.size());
    auto emit = [&](std::size_t i) {
        double mean = 0.0;
        for (const auto& c : curves) mean += c.cum_regret[i];
        mean /= n;
        double var = 0.0;
        for (const auto& c : curves) {
            const double d = c.cum_regret[i] - mean;
            var += d * d;
        }
        const double sd = curves.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        out << curves[0].t[i] << ',' << format_double(mean) << ',' << format_double(sd) << "\n";
    };
    for (std::size_t i = 0; i < rounds; i += stride) emit(i);
    if ((rounds - 1) % stride != 0) emit(rounds - 1);
    if (!out) {
        std::cerr << "error: write failed for " << out_path.string() << "\n";
        return 2;
    }
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- verify

namespace {

struct Check {
    std::string name;
    std::function<bool(std::string&)> fn;
};

EnvModel small_cone_env() {
    return EnvModel(2, 1, 1.0, Norm::L2, MeanFamily::CONE, {Peak{{0.62, 0.38}, 0.9}},
                    NoiseKind::BERNOULLI, 0.0);
}

bool check_rank_round_trip(std::string& detail) {
    const GridSpec g{3, 2, 2};
    for (std::uint64_t r = 0; r < g.joint_count(); ++r) {
        if (rank_of(g, unrank(g, r)) != r) {
            detail = "round trip failed at rank " + std::to_string(r);
            return false;
        }
    }
    GridIndex one_last(static_cast<std::size_t>(g.axes()), 0);
    one_last.back() = 1;
    if (rank_of(g, one_last) != 1) {
        detail = "last axis is not the least significant digit";
        return false;
    }
    const GridSpec g2{7, 3, 1};
    RngStream rng = derive_stream(11, 0, 0, StreamPurpose::Policy);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t r = rng.below(g2.joint_count());
        if (rank_of(g2, unrank(g2, r)) != r) {
            detail = "random round trip failed";
            return false;
        }
    }
    return true;
}

bool check_grid_formula(std::string& detail) {
    const std::uint64_t t20 = std::uint64_t{1} << 20;
    const int ka = choose_grid_k(t20, 1.0, 2, 1, KRule::UCB);
    const int kc = choose_grid_k(t20, 1.0, 2, 1, KRule::DSEE);
    if (ka != 7 || kc != 4) {
        detail = "expected 7/4 at 2^20, got " + std::to_string(ka) + "/" + std::to_string(kc);
        return false;
    }
    const double real = choose_grid_k_real(t20, 1.0, 2, 1, KRule::UCB);
    if (std::abs(real - 6.5032) > 0.001) {
        detail = "real-valued resolution drifted: " + format_double(real);
        return false;
    }
    for (const std::uint64_t t : {std::uint64_t{100}, std::uint64_t{10000}}) {
        const double lo = choose_grid_k_real(t, 1.0, 2, 1, KRule::UCB);
        const double hi = choose_grid_k_real(static_cast<std::uint64_t>(
                                                 std::ceil(static_cast<double>(t) * 2.7182818284590452)),
                                             1.0, 2, 1, KRule::UCB);
        if (hi <= lo) {
            detail = "resolution not increasing in the horizon";
            return false;
        }
    }
    return true;
}

bool check_lipschitz(std::string& detail) {
    RngStream rng = derive_stream(5, 0, 0, StreamPurpose::Policy);
    const EnvModel envs[] = {
        small_cone_env(),
        EnvModel(1, 2, 1.5, Norm::L1, MeanFamily::MULTI_PEAK,
                 {Peak{{0.2, 0.8}, 0.7}, Peak{{0.7, 0.3}, 0.9}}, NoiseKind::GAUSSIAN, 0.3),
        EnvModel(2, 1, 0.8, Norm::LINF, MeanFamily::AFFINE_CAP, {Peak{{0.4, 0.6}, 0.8}},
                 NoiseKind::BERNOULLI, 0.0),
    };
    for (const auto& env : envs) {
        const auto rep = env.verify_lipschitz(20000, rng);
        if (!rep.pass) {
            detail = "ratio " + format_double(rep.max_ratio) + " exceeds " +
                     format_double(env.lipschitz());
            return false;
        }
    }
    return true;
}

bool check_widths(std::string& detail) {
    const std::uint64_t horizon = 1 << 14;
    if (confidence_width(0, horizon) != kInfinity) {
        detail = "unpulled width must be infinite";
        return false;
    }
    double prev = confidence_width(1, horizon);
    for (std::uint64_t n = 2; n <= 64; ++n) {
        const double w = confidence_width(n, horizon);
        if (w >= prev) {
            detail = "width not strictly decreasing at n=" + std::to_string(n);
            return false;
        }
        prev = w;
    }
    ArmStats lo, hi;
    for (int i = 0; i < 50; ++i) lo.add(0.1);
    for (int i = 0; i < 50; ++i) hi.add(0.9);
    // At 50 pulls the widths (~1.08 here) still swallow a 0.8 gap.
    if (strictly_above(confidence_interval(hi, horizon), confidence_interval(lo, horizon))) {
        detail = "intervals separated before the widths allow it";
        return false;
    }
    for (int i = 0; i < 950; ++i) lo.add(0.1);
    for (int i = 0; i < 950; ++i) hi.add(0.9);
    if (!strictly_above(confidence_interval(hi, horizon), confidence_interval(lo, horizon))) {
        detail = "separated intervals not detected";
        return false;
    }
    ArmStats fresh;
    if (strictly_above(confidence_interval(hi, horizon), confidence_interval(fresh, horizon))) {
        detail = "unpulled arm must never be dominated";
        return false;
    }
    return true;
}

bool check_schedule(std::string& detail) {
    struct Span {
        std::uint64_t first, last;
        bool explore;
        int phase;
        std::uint64_t reps;
    };
    // arms = 4, f = ceil(sqrt(phase))
    const Span spans[] = {
        {1, 4, true, 1, 1},   {5, 7, false, 1, 0},   {8, 15, true, 3, 2},
        {16, 23, true, 4, 2}, {24, 31, false, 4, 0}, {32, 43, true, 5, 3},
        {44, 63, false, 5, 0}, {64, 75, true, 6, 3},
    };
    for (const auto& span : spans) {
        for (std::uint64_t t = span.first; t <= span.last; ++t) {
            const ScheduleSlot s = mdsee_schedule(t, 4, FChoice::SQRT);
            if (s.explore != span.explore || s.phase != span.phase) {
                detail = "slot mismatch at t=" + std::to_string(t);
                return false;
            }
            if (span.explore) {
                const std::uint64_t off = t - span.first;
                if (s.arm_rank != off / span.reps || s.repetition != off % span.reps + 1) {
                    detail = "explore layout mismatch at t=" + std::to_string(t);
                    return false;
                }
            }
        }
    }
    return true;
}

bool check_coverage_index(std::string& detail) {
    RngStream rng = derive_stream(21, 0, 0, StreamPurpose::Policy);
    for (int inst = 0; inst < 32; ++inst) {
        const int axes = 1 + static_cast<int>(rng.below(3));
        const Norm norm = static_cast<Norm>(rng.below(3));
        const int cap = 4;
        // Small cache bounds force the descent path, including the case
        // where even level 1 is too big to cache.
        const std::uint64_t bounds[] = {std::uint64_t{1} << 19, 64, 8, 4};
        CoverageIndex ci(axes, norm, cap, bounds[inst % 4]);
        std::vector<Ball> mirror;
        for (int op = 0; op < 40; ++op) {
            if (mirror.empty() || rng.uniform01() < 0.55) {
                std::vector<double> c(static_cast<std::size_t>(axes));
                for (auto& x : c) x = rng.uniform01();
                const double r = 0.05 + 0.55 * rng.uniform01();
                ci.add_ball(c, r);
                mirror.push_back(Ball{c, r});
            } else {
                const std::size_t pick = rng.below(mirror.size());
                const double r = mirror[pick].radius * 0.5;
                ci.set_radius(static_cast<int>(pick), r);
                mirror[pick].radius = r;
            }
            for (const int start : {1, 2}) {
                const auto got = ci.query(start);
                const auto want = find_uncovered_point(mirror, start, cap, norm, axes, 1);
                const bool same = got.has_value() == want.has_value() &&
                                  (!got || (got->level == want->level && got->rank == want->rank));
                if (!same) {
                    detail = "instance " + std::to_string(inst) + " op " + std::to_string(op) +
                             " diverged from the reference scan";
                    return false;
                }
                const auto again = ci.query(start);
                if (again.has_value() != got.has_value() ||
                    (got && (again->level != got->level || again->rank != got->rank))) {
                    detail = "query not idempotent";
                    return false;
                }
            }
        }
    }
    return true;
}

bool check_reference_match(std::string& detail) {
    const EnvModel env = small_cone_env();
    for (const std::uint64_t seed : {std::uint64_t{7}, std::uint64_t{8}}) {
        RunParams p;
        p.algorithm = AlgorithmKind::MCAB_A;
        p.horizon = 400;
        p.grid_k = 3;
        p.root_seed = seed;
        const EpisodeResult res = run_episode(env, p);
        const auto ref = run_ucb_grid_reference(env, GridSpec{3, 2, 1}, 400, seed, 0);
        if (res.trace.arm_rank != ref) {
            detail = "grid policy diverged from central reference (seed " +
                     std::to_string(seed) + ")";
            return false;
        }
        RunParams z;
        z.algorithm = AlgorithmKind::MZOOM_A;
        z.horizon = 300;
        z.level_cap = 12;
        z.root_seed = seed;
        const EpisodeResult zres = run_episode(env, z);
        const auto zref = run_zoom_reference(env, 300, 12, seed, 0);
        std::vector<double> flat;
        for (const auto& c : zref) flat.insert(flat.end(), c.begin(), c.end());
        if (zres.trace.arm_coords != flat) {
            detail = "zoom policy diverged from central reference (seed " +
                     std::to_string(seed) + ")";
            return false;
        }
    }
    return true;
}

bool check_desired_alignment(std::string& detail) {
    const EnvModel env = small_cone_env();
    for (const std::uint64_t seed : {std::uint64_t{3}, std::uint64_t{4}, std::uint64_t{5}}) {
        RunParams p;
        p.algorithm = AlgorithmKind::MCAB_B;
        p.horizon = 800;
        p.grid_k = 2;
        p.root_seed = seed;
        const EpisodeResult res = run_episode(env, p);
        if (!res.players_consistent) {
            detail = "grid elimination: " + res.inconsistency;
            return false;
        }
        RunParams z;
        z.algorithm = AlgorithmKind::MZOOM_B;
        z.horizon = 600;
        z.level_cap = 12;
        z.root_seed = seed;
        const EpisodeResult zres = run_episode(env, z);
        if (!zres.players_consistent) {
            detail = "zoom elimination: " + zres.inconsistency;
            return false;
        }
    }
    return true;
}

bool check_discretization(std::string& detail) {
    RngStream rng = derive_stream(31, 0, 0, StreamPurpose::Policy);
    const AlgorithmKind algos[] = {AlgorithmKind::MCAB_A, AlgorithmKind::MCAB_B,
                                   AlgorithmKind::MCAB_C};
    for (int i = 0; i < 8; ++i) {
        const int players = 1 + static_cast<int>(rng.below(2));
        const int dim = players == 2 ? 1 : 1 + static_cast<int>(rng.below(2));
        const int axes = players * dim;
        std::vector<double> at(static_cast<std::size_t>(axes));
        for (auto& x : at) x = rng.uniform01();
        const double h = 0.6 + 0.4 * rng.uniform01();
        const double lipschitz = 0.6 + rng.uniform01();
        const Norm norm = rng.below(2) ? Norm::L2 : Norm::LINF;
        const EnvModel env(players, dim, lipschitz, norm, MeanFamily::CONE, {Peak{at, h}},
                           NoiseKind::BERNOULLI, 0.0);
        RunParams p;
        p.algorithm = algos[i % 3];
        p.horizon = 600;
        p.grid_k = 4 + static_cast<int>(rng.below(6));
        p.root_seed = 1000 + static_cast<std::uint64_t>(i);
        const EpisodeResult res = run_episode(env, p);
        const auto split =
            discretization_check(res.trace, env, GridSpec{p.grid_k, players, dim});
        if (!split.pass) {
            detail = "config " + std::to_string(i) + ": continuum " +
                     format_double(split.continuum_regret) + " > " +
                     format_double(split.discretization_term + split.grid_regret);
            return false;
        }
    }
    return true;
}

bool check_concentration(std::string& detail) {
    const auto pts = concentration_check(1.0, 40, {0.3, 0.5}, 20000, 99);
    for (const auto& pt : pts) {
        if (!pt.pass) {
            detail = "eps " + format_double(pt.epsilon) + ": freq " +
                     format_double(pt.violation_freq) + " > bound " + format_double(pt.bound) +
                     " + slack";
            return false;
        }
    }
    return true;
}

bool check_reproducible(std::string& detail) {
    const EnvModel env = small_cone_env();
    for (const AlgorithmKind algo :
         {AlgorithmKind::MCAB_A, AlgorithmKind::MCAB_B, AlgorithmKind::MCAB_C,
          AlgorithmKind::MZOOM_A, AlgorithmKind::MZOOM_B}) {
        RunParams p;
        p.algorithm = algo;
        p.horizon = 300;
        p.grid_k = 2;
        p.level_cap = 10;
        p.root_seed = 12345;
        const EpisodeResult a = run_episode(env, p);
        const EpisodeResult b = run_episode(env, p);
        if (trace_csv(a.trace, a.good) != trace_csv(b.trace, b.good) ||
            a.total_regret != b.total_regret) {
            detail = to_string(algo) + " is not reproducible";
            return false;
        }
    }
    return true;
}

bool check_config_round_trip(std::string& detail) {
    ExperimentConfig cfg;
    cfg.players = 2;
    cfg.dim = 1;
    cfg.lipschitz = 1.25;
    cfg.norm = Norm::LINF;
    cfg.mean_family = MeanFamily::MULTI_PEAK;
    cfg.peaks = {Peak{{0.1, 0.9}, 0.8}, Peak{{0.5, 0.5}, 0.6}};
    cfg.noise = NoiseKind::GAUSSIAN;
    cfg.sigma = 0.25;
    cfg.algorithm = AlgorithmKind::MZOOM_B;
    cfg.horizon = 5000;
    cfg.trials = 3;
    cfg.seed = 7;
    const std::string canon = serialize_config(cfg);
    const ExperimentConfig back = parse_config(canon);
    if (serialize_config(back) != canon) {
        detail = "serialize/parse round trip changed the config";
        return false;
    }
    try {
        parse_config("[env]\nbogus = 1\n");
        detail = "unknown key accepted";
        return false;
    } catch (const ConfigError&) {
    }
    return true;
}

} // namespace

int cmd_verify(const std::optional<std::string>& config_path) {
    bool all_pass = true;
    if (config_path) {
        try {
            const ExperimentConfig cfg = parse_config(read_file(*config_path));
            const auto issues = validate_config(cfg);
            if (issues.empty()) {
                std::cout << "[PASS] config " << *config_path << "\n";
            } else {
                all_pass = false;
                for (const auto& s : issues)
                    std::cout << "[FAIL] config " << *config_path << ": " << s << "\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << *config_path << ": " << e.what() << "\n";
            return 2;
        }
    }
    const Check checks[] = {
        {"grid rank round trip", check_rank_round_trip},
        {"grid resolution formula", check_grid_formula},
        {"mean surfaces are lipschitz", check_lipschitz},
        {"confidence widths and intervals", check_widths},
        {"explore schedule layout", check_schedule},
        {"coverage index matches reference scan", check_coverage_index},
        {"players reproduce the central reference", check_reference_match},
        {"elimination state stays aligned", check_desired_alignment},
        {"continuum regret splits at the grid", check_discretization},
        {"sample means concentrate", check_concentration},
        {"runs are reproducible", check_reproducible},
        {"config round trip", check_config_round_trip},
    };
    for (const auto& c : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        if (ok) {
            std::cout << "[PASS] " << c.name << "\n";
        } else {
            all_pass = false;
            std::cout << "[FAIL] " << c.name << (detail.empty() ? "" : ": " + detail) << "\n";
        }
    }
    return all_pass ? 0 : 1;
}

} // namespace lipband
