#include "lipband/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lipband/index.hpp"
#include "lipband/observations.hpp"
#include "lipband/rng.hpp"

namespace lipband {

Variant variant_of(AlgorithmKind algo) {
    switch (algo) {
        case AlgorithmKind::MCAB_A:
        case AlgorithmKind::MZOOM_A: return Variant::A;
        case AlgorithmKind::MCAB_B:
        case AlgorithmKind::MZOOM_B: return Variant::B;
        case AlgorithmKind::MCAB_C: return Variant::C;
    }
    throw std::invalid_argument("variant_of: bad algorithm");
}

std::string to_string(AlgorithmKind algo) {
    switch (algo) {
        case AlgorithmKind::MCAB_A: return "mcab_a";
        case AlgorithmKind::MCAB_B: return "mcab_b";
        case AlgorithmKind::MCAB_C: return "mcab_c";
        case AlgorithmKind::MZOOM_A: return "mzoom_a";
        case AlgorithmKind::MZOOM_B: return "mzoom_b";
    }
    throw std::invalid_argument("to_string: bad algorithm");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::A: return "A";
        case Variant::B: return "B";
        case Variant::C: return "C";
    }
    throw std::invalid_argument("to_string: bad variant");
}

AlgorithmKind algorithm_from_string(const std::string& name) {
    std::string s = name;
    for (char& c : s) {
        if (c == '-') c = '_';
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (s == "mcab_a") return AlgorithmKind::MCAB_A;
    if (s == "mcab_b") return AlgorithmKind::MCAB_B;
    if (s == "mcab_c") return AlgorithmKind::MCAB_C;
    if (s == "mzoom_a") return AlgorithmKind::MZOOM_A;
    if (s == "mzoom_b") return AlgorithmKind::MZOOM_B;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

// Re-derives every player's running estimates from the observable record and
// checks each update against the confidence width.  Kept separate from the
// policy states so that a crediting bug in either book shows up as a final
// mismatch rather than silently agreeing.
class EstimateMonitor {
public:
    EstimateMonitor(std::uint64_t horizon, int logical_players)
        : horizon_(horizon), stats_(static_cast<std::size_t>(logical_players)) {}

    void ensure_keys(std::size_t count) {
        for (auto& row : stats_)
            if (row.size() < count) row.resize(count);
    }

    void observe(int player, std::size_t key, double reward, std::uint64_t round,
                 double true_mean, GoodEventReport& rep) {
        ArmStats& s = stats_[static_cast<std::size_t>(player)][key];
        s.add(reward);
        ++rep.checked_updates;
        const double err = std::abs(s.mean() - true_mean);
        const double w = confidence_width(s.pulls, horizon_);
        if (err > w) {
            if (rep.held) {
                rep.held = false;
                rep.first_violation_round = round;
            }
            rep.max_excess = std::max(rep.max_excess, err - w);
        }
    }

    const std::vector<ArmStats>& player_stats(int player) const {
        return stats_[static_cast<std::size_t>(player)];
    }

private:
    std::uint64_t horizon_;
    std::vector<std::vector<ArmStats>> stats_;
};

struct MuCache {
    const EnvModel* env = nullptr;
    const GridSpec* grid = nullptr;
    std::vector<double> mu;
    std::vector<char> known;

    double at(std::uint64_t rank) {
        if (!known[rank]) {
            mu[rank] = env->mean(grid_coords(*grid, unrank(*grid, rank)));
            known[rank] = 1;
        }
        return mu[rank];
    }
};

MuCache make_mu_cache(const EnvModel& env, const GridSpec& grid) {
    MuCache c;
    c.env = &env;
    c.grid = &grid;
    const std::uint64_t n = grid.joint_count();
    c.mu.assign(n, 0.0);
    c.known.assign(n, 0);
    return c;
}

void mark_inconsistent(EpisodeResult& res, std::uint64_t round, const std::string& what) {
    if (!res.players_consistent) return;
    res.players_consistent = false;
    res.inconsistency = "round " + std::to_string(round) + ": " + what;
}

void push_round(EpisodeTrace& trace, double gap, std::uint64_t rank, const std::vector<double>* coords) {
    trace.gap.push_back(gap);
    const double prev = trace.cum_regret.empty() ? 0.0 : trace.cum_regret.back();
    trace.cum_regret.push_back(prev + gap);
    trace.arm_rank.push_back(rank);
    if (coords) trace.arm_coords.insert(trace.arm_coords.end(), coords->begin(), coords->end());
}

EpisodeTrace make_trace(const EnvModel& env, const RunParams& p, bool zoom) {
    EpisodeTrace t;
    t.horizon = p.horizon;
    t.axes = env.axes();
    t.optimal_mean = env.optimal_mean();
    t.gap.reserve(p.horizon);
    t.cum_regret.reserve(p.horizon);
    t.arm_rank.reserve(p.horizon);
    if (zoom) t.arm_coords.reserve(p.horizon * static_cast<std::size_t>(env.axes()));
    return t;
}

bool stats_match(const std::vector<ArmStats>& a, const std::vector<ArmStats>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].pulls != b[i].pulls || a[i].reward_sum != b[i].reward_sum) return false;
    return true;
}

void require_uniform_params(const RunParams& p) {
    if (p.grid_k < 1) throw std::invalid_argument("run_episode: grid_k must be >= 1");
    if (p.horizon < 2) throw std::invalid_argument("run_episode: horizon must be >= 2");
}

std::vector<ArmDump> dump_arms(const std::vector<ZoomArm>& arms, const EnvModel& env) {
    std::vector<ArmDump> out;
    out.reserve(arms.size());
    for (const ZoomArm& a : arms) {
        ArmDump d;
        d.center = a.center;
        d.level = a.level;
        d.level_rank = a.level_rank;
        d.activated_at = a.activated_at;
        d.pulls = a.stats.pulls;
        d.mean_estimate = a.stats.pulls ? a.stats.mean() : 0.0;
        d.eliminated = a.eliminated;
        d.frozen_radius = a.frozen_radius;
        d.eliminated_at = a.eliminated_at;
        d.gap = env.gap(a.center);
        out.push_back(std::move(d));
    }
    return out;
}

// ---------------------------------------------------------------- drivers

EpisodeResult run_mcab_a(const EnvModel& env, const RunParams& p) {
    require_uniform_params(p);
    const GridSpec grid{p.grid_k, env.players(), env.dim()};
    const int m = env.players();
    const std::uint64_t horizon = p.horizon;

    std::vector<McabAState> states;
    states.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) states.emplace_back(grid, horizon, i);
    RngStream rewards = derive_stream(p.root_seed, p.trial, 0, StreamPurpose::Reward);

    EpisodeResult res;
    res.grid_k = p.grid_k;
    res.trace = make_trace(env, p, false);
    EstimateMonitor mon(horizon, 1);
    mon.ensure_keys(grid.joint_count());
    MuCache mus = make_mu_cache(env, grid);

    std::optional<SharedRewardObs> obs;
    std::uint64_t prev_rank = 0;
    double prev_reward = 0.0;
    std::vector<double> joint;
    joint.reserve(static_cast<std::size_t>(env.axes()));
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        if (t > 1) mon.observe(0, prev_rank, prev_reward, t, mus.at(prev_rank), res.good);
        joint.clear();
        for (int i = 0; i < m; ++i) {
            const auto block = states[i].step(t, obs);
            joint.insert(joint.end(), block.begin(), block.end());
        }
        const std::uint64_t rank = states[0].last_rank();
        for (int i = 1; i < m; ++i)
            if (states[i].last_rank() != rank) mark_inconsistent(res, t, "joint choice split");
        const double gap = env.gap(joint);
        const double r = env.sample_reward(joint, rewards);
        push_round(res.trace, gap, rank, nullptr);
        obs = SharedRewardObs{r};
        prev_rank = rank;
        prev_reward = r;
    }
    if (!stats_match(states[0].stats(), mon.player_stats(0)))
        mark_inconsistent(res, horizon, "estimate books diverge");
    for (int i = 1; i < m; ++i)
        if (!stats_match(states[i].stats(), states[0].stats()))
            mark_inconsistent(res, horizon, "player stats diverge");
    res.grid_pulls.reserve(states[0].stats().size());
    for (const ArmStats& s : states[0].stats()) res.grid_pulls.push_back(s.pulls);
    res.total_regret = res.trace.cum_regret.back();
    return res;
}

EpisodeResult run_mcab_b(const EnvModel& env, const RunParams& p) {
    require_uniform_params(p);
    const GridSpec grid{p.grid_k, env.players(), env.dim()};
    const int m = env.players();
    const std::uint64_t horizon = p.horizon;

    std::vector<McabBState> states;
    states.reserve(static_cast<std::size_t>(m));
    std::vector<RngStream> rewards;
    for (int i = 0; i < m; ++i) {
        states.emplace_back(grid, horizon, i);
        rewards.push_back(derive_stream(p.root_seed, p.trial, i, StreamPurpose::Reward));
    }

    EpisodeResult res;
    res.grid_k = p.grid_k;
    res.trace = make_trace(env, p, false);
    EstimateMonitor mon(horizon, m);
    mon.ensure_keys(grid.joint_count());
    MuCache mus = make_mu_cache(env, grid);

    std::vector<double> prev_joint;
    std::vector<double> prev_rewards(static_cast<std::size_t>(m), 0.0);
    std::uint64_t prev_rank = 0;
    std::vector<double> joint;
    const std::uint64_t sweep = grid.joint_count();
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        if (t > 1)
            for (int i = 0; i < m; ++i)
                mon.observe(i, prev_rank, prev_rewards[static_cast<std::size_t>(i)], t,
                            mus.at(prev_rank), res.good);
        joint.clear();
        bool any_signal = false;
        for (int i = 0; i < m; ++i) {
            std::optional<JointActionObs> obs;
            if (t > 1) obs = JointActionObs{prev_joint, prev_rewards[static_cast<std::size_t>(i)]};
            const auto block = states[i].step(t, obs);
            joint.insert(joint.end(), block.begin(), block.end());
            any_signal = any_signal || states[i].signaled_last();
        }
        if (any_signal) ++res.signal_rounds;
        for (int i = 1; i < m; ++i) {
            if (states[i].desired_count() != states[0].desired_count() ||
                states[i].removal_digest() != states[0].removal_digest())
                mark_inconsistent(res, t, "desired sets diverge");
            if (t > sweep && states[i].last_designated() != states[0].last_designated())
                mark_inconsistent(res, t, "designation split");
        }
        const std::uint64_t rank = rank_of(grid, nearest_grid_index(grid, joint));
        const double gap = env.gap(joint);
        for (int i = 0; i < m; ++i)
            prev_rewards[static_cast<std::size_t>(i)] =
                env.sample_reward(joint, rewards[static_cast<std::size_t>(i)]);
        push_round(res.trace, gap, rank, nullptr);
        prev_joint = joint;
        prev_rank = rank;
    }
    for (int i = 0; i < m; ++i)
        if (!stats_match(states[i].stats(), mon.player_stats(i)))
            mark_inconsistent(res, horizon, "estimate books diverge");
    {
        const auto d0 = states[0].desired_ranks();
        for (int i = 1; i < m; ++i)
            if (states[i].desired_ranks() != d0)
                mark_inconsistent(res, horizon, "final desired sets differ");
    }
    res.grid_pulls.reserve(states[0].stats().size());
    for (const ArmStats& s : states[0].stats()) res.grid_pulls.push_back(s.pulls);
    res.total_regret = res.trace.cum_regret.back();
    return res;
}

EpisodeResult run_mcab_c(const EnvModel& env, const RunParams& p) {
    require_uniform_params(p);
    const GridSpec grid{p.grid_k, env.players(), env.dim()};
    const int m = env.players();
    const std::uint64_t horizon = p.horizon;
    const std::uint64_t arms = grid.joint_count();

    std::vector<McabCState> states;
    states.reserve(static_cast<std::size_t>(m));
    std::vector<RngStream> rewards;
    for (int i = 0; i < m; ++i) {
        states.emplace_back(grid, horizon, i, p.f,
                            derive_stream(p.root_seed, p.trial, i, StreamPurpose::Policy));
        rewards.push_back(derive_stream(p.root_seed, p.trial, i, StreamPurpose::Reward));
    }

    EpisodeResult res;
    res.grid_k = p.grid_k;
    res.trace = make_trace(env, p, false);
    EstimateMonitor mon(horizon, m);
    mon.ensure_keys(arms);
    MuCache mus = make_mu_cache(env, grid);

    std::vector<double> prev_rewards(static_cast<std::size_t>(m), 0.0);
    std::vector<double> joint;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        if (t > 1) {
            const ScheduleSlot prev = mdsee_schedule(t - 1, arms, p.f);
            if (prev.explore)
                for (int i = 0; i < m; ++i)
                    mon.observe(i, prev.arm_rank, prev_rewards[static_cast<std::size_t>(i)], t,
                                mus.at(prev.arm_rank), res.good);
        }
        joint.clear();
        for (int i = 0; i < m; ++i) {
            std::optional<PrivateRewardObs> obs;
            if (t > 1) obs = PrivateRewardObs{prev_rewards[static_cast<std::size_t>(i)]};
            const auto block = states[i].step(t, obs);
            joint.insert(joint.end(), block.begin(), block.end());
        }
        const ScheduleSlot slot = mdsee_schedule(t, arms, p.f);
        const std::uint64_t rank = rank_of(grid, nearest_grid_index(grid, joint));
        if (slot.explore) {
            if (rank != slot.arm_rank) mark_inconsistent(res, t, "schedule deviation");
        } else {
            bool split = false;
            const auto c0 = states[0].committed_rank();
            for (int i = 0; i < m; ++i) {
                const auto ci = states[i].committed_rank();
                if (!ci) mark_inconsistent(res, t, "missing commitment");
                else if (c0 && *ci != *c0) split = true;
            }
            if (split) ++res.miscoordination_rounds;
        }
        const double gap = env.gap(joint);
        for (int i = 0; i < m; ++i)
            prev_rewards[static_cast<std::size_t>(i)] =
                env.sample_reward(joint, rewards[static_cast<std::size_t>(i)]);
        push_round(res.trace, gap, rank, nullptr);
    }
    for (int i = 0; i < m; ++i)
        if (!stats_match(states[i].stats(), mon.player_stats(i)))
            mark_inconsistent(res, horizon, "estimate books diverge");
    res.grid_pulls.reserve(states[0].stats().size());
    for (const ArmStats& s : states[0].stats()) res.grid_pulls.push_back(s.pulls);
    res.total_regret = res.trace.cum_regret.back();
    return res;
}

EpisodeResult run_mzoom_a(const EnvModel& env, const RunParams& p) {
    if (p.horizon < 2) throw std::invalid_argument("run_episode: horizon must be >= 2");
    const int m = env.players();
    const std::uint64_t horizon = p.horizon;

    std::vector<ZoomAState> states;
    states.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        states.emplace_back(m, env.dim(), env.norm(), env.lipschitz(), horizon, p.level_cap, i);
    RngStream rewards = derive_stream(p.root_seed, p.trial, 0, StreamPurpose::Reward);

    EpisodeResult res;
    res.trace = make_trace(env, p, true);
    EstimateMonitor mon(horizon, 1);
    std::vector<double> arm_mu;

    std::optional<SharedRewardObs> obs;
    std::size_t prev_arm = 0;
    double prev_reward = 0.0;
    std::vector<double> joint;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        if (t > 1) mon.observe(0, prev_arm, prev_reward, t, arm_mu[prev_arm], res.good);
        joint.clear();
        for (int i = 0; i < m; ++i) {
            const auto block = states[i].step(t, obs);
            joint.insert(joint.end(), block.begin(), block.end());
        }
        const auto& arms0 = states[0].arms();
        while (arm_mu.size() < arms0.size()) arm_mu.push_back(env.mean(arms0[arm_mu.size()].center));
        mon.ensure_keys(arm_mu.size());
        const std::size_t chosen = states[0].last_arm();
        for (int i = 1; i < m; ++i)
            if (states[i].last_arm() != chosen || states[i].arms().size() != arms0.size())
                mark_inconsistent(res, t, "active sets diverge");
        const double gap = env.gap(joint);
        const double r = env.sample_reward(joint, rewards);
        push_round(res.trace, gap, kNoRank, &joint);
        obs = SharedRewardObs{r};
        prev_arm = chosen;
        prev_reward = r;
    }
    {
        std::vector<ArmStats> own;
        for (const ZoomArm& a : states[0].arms()) own.push_back(a.stats);
        if (!stats_match(own, mon.player_stats(0)))
            mark_inconsistent(res, horizon, "estimate books diverge");
    }
    for (int i = 1; i < m; ++i) {
        const auto& a = states[i].arms();
        const auto& a0 = states[0].arms();
        bool same = a.size() == a0.size();
        for (std::size_t k = 0; same && k < a.size(); ++k)
            same = a[k].center == a0[k].center && a[k].stats.pulls == a0[k].stats.pulls;
        if (!same) mark_inconsistent(res, horizon, "final active sets differ");
    }
    res.arms = dump_arms(states[0].arms(), env);
    res.total_regret = res.trace.cum_regret.back();
    return res;
}

EpisodeResult run_mzoom_b(const EnvModel& env, const RunParams& p) {
    if (p.horizon < 2) throw std::invalid_argument("run_episode: horizon must be >= 2");
    const int m = env.players();
    const std::uint64_t horizon = p.horizon;

    std::vector<ZoomBState> states;
    states.reserve(static_cast<std::size_t>(m));
    std::vector<RngStream> rewards;
    for (int i = 0; i < m; ++i) {
        states.emplace_back(m, env.dim(), env.norm(), env.lipschitz(), horizon, p.level_cap, i);
        rewards.push_back(derive_stream(p.root_seed, p.trial, i, StreamPurpose::Reward));
    }

    EpisodeResult res;
    res.trace = make_trace(env, p, true);
    EstimateMonitor mon(horizon, m);
    std::vector<double> arm_mu;
    std::map<std::vector<double>, std::size_t> arm_ids;

    std::vector<double> prev_joint;
    std::vector<double> prev_rewards(static_cast<std::size_t>(m), 0.0);
    std::vector<double> joint;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        if (t > 1) {
            const auto hit = arm_ids.find(prev_joint);
            if (hit != arm_ids.end())
                for (int i = 0; i < m; ++i)
                    mon.observe(i, hit->second, prev_rewards[static_cast<std::size_t>(i)], t,
                                arm_mu[hit->second], res.good);
        }
        joint.clear();
        bool any_signal = false;
        for (int i = 0; i < m; ++i) {
            std::optional<JointActionObs> obs;
            if (t > 1) obs = JointActionObs{prev_joint, prev_rewards[static_cast<std::size_t>(i)]};
            const auto block = states[i].step(t, obs);
            joint.insert(joint.end(), block.begin(), block.end());
            any_signal = any_signal || states[i].signaled_last();
        }
        if (any_signal) ++res.signal_rounds;
        const auto& arms0 = states[0].arms();
        while (arm_mu.size() < arms0.size()) {
            arm_ids[arms0[arm_mu.size()].center] = arm_mu.size();
            arm_mu.push_back(env.mean(arms0[arm_mu.size()].center));
        }
        mon.ensure_keys(arm_mu.size());
        for (int i = 1; i < m; ++i)
            if (states[i].desired().size() != states[0].desired().size() ||
                states[i].last_designated() != states[0].last_designated() ||
                states[i].consistency_digest() != states[0].consistency_digest())
                mark_inconsistent(res, t, "protocol state diverges");
        const double gap = env.gap(joint);
        for (int i = 0; i < m; ++i)
            prev_rewards[static_cast<std::size_t>(i)] =
                env.sample_reward(joint, rewards[static_cast<std::size_t>(i)]);
        push_round(res.trace, gap, kNoRank, &joint);
        prev_joint = joint;
    }
    for (int i = 0; i < m; ++i) {
        std::vector<ArmStats> own;
        for (const ZoomArm& a : states[i].arms()) own.push_back(a.stats);
        if (!stats_match(own, mon.player_stats(i)))
            mark_inconsistent(res, horizon, "estimate books diverge");
    }
    for (int i = 1; i < m; ++i) {
        const auto& a = states[i].arms();
        const auto& a0 = states[0].arms();
        bool same = a.size() == a0.size() && states[i].desired() == states[0].desired();
        for (std::size_t k = 0; same && k < a.size(); ++k)
            same = a[k].center == a0[k].center && a[k].stats.pulls == a0[k].stats.pulls &&
                   a[k].eliminated == a0[k].eliminated &&
                   a[k].frozen_radius == a0[k].frozen_radius;
        if (!same) mark_inconsistent(res, horizon, "final active sets differ");
    }
    res.arms = dump_arms(states[0].arms(), env);
    res.total_regret = res.trace.cum_regret.back();
    return res;
}

} // namespace

EpisodeResult run_episode(const EnvModel& env, const RunParams& p) {
    switch (p.algorithm) {
        case AlgorithmKind::MCAB_A: return run_mcab_a(env, p);
        case AlgorithmKind::MCAB_B: return run_mcab_b(env, p);
        case AlgorithmKind::MCAB_C: return run_mcab_c(env, p);
        case AlgorithmKind::MZOOM_A: return run_mzoom_a(env, p);
        case AlgorithmKind::MZOOM_B: return run_mzoom_b(env, p);
    }
    throw std::invalid_argument("run_episode: bad algorithm");
}

std::vector<std::uint64_t> run_ucb_grid_reference(const EnvModel& env, const GridSpec& grid,
                                                  std::uint64_t horizon, std::uint64_t root_seed,
                                                  std::uint64_t trial) {
    McabAState controller(grid, horizon, McabAState::kController);
    RngStream rewards = derive_stream(root_seed, trial, 0, StreamPurpose::Reward);
    std::vector<std::uint64_t> out;
    out.reserve(horizon);
    double r = 0.0;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const std::uint64_t rank = controller.next_rank(t, t == 1 ? nullptr : &r);
        out.push_back(rank);
        r = env.sample_reward(grid_coords(grid, unrank(grid, rank)), rewards);
    }
    return out;
}

std::vector<std::vector<double>> run_zoom_reference(const EnvModel& env, std::uint64_t horizon,
                                                    int level_cap, std::uint64_t root_seed,
                                                    std::uint64_t trial) {
    ZoomAState controller(env.players(), env.dim(), env.norm(), env.lipschitz(), horizon,
                          level_cap, ZoomAState::kController);
    RngStream rewards = derive_stream(root_seed, trial, 0, StreamPurpose::Reward);
    std::vector<std::vector<double>> out;
    out.reserve(horizon);
    std::optional<SharedRewardObs> obs;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        out.push_back(controller.step(t, obs));
        obs = SharedRewardObs{env.sample_reward(out.back(), rewards)};
    }
    return out;
}

DiscretizationSplit discretization_check(const EpisodeTrace& trace, const EnvModel& env,
                                         const GridSpec& grid) {
    if (trace.gap.empty()) throw std::invalid_argument("discretization_check: empty trace");
    const std::uint64_t n = grid.joint_count();
    if (n > (std::uint64_t{1} << 22))
        throw std::invalid_argument("discretization_check: grid too large to enumerate");
    std::vector<double> mu(n);
    double grid_opt = -kInfinity;
    for (std::uint64_t r = 0; r < n; ++r) {
        mu[r] = env.mean(grid_coords(grid, unrank(grid, r)));
        grid_opt = std::max(grid_opt, mu[r]);
    }
    DiscretizationSplit s;
    s.grid_optimal_mean = grid_opt;
    for (std::size_t i = 0; i < trace.arm_rank.size(); ++i) {
        const std::uint64_t r = trace.arm_rank[i];
        if (r == kNoRank)
            throw std::invalid_argument("discretization_check: trace has no grid ranks");
        s.grid_regret += grid_opt - mu[r];
    }
    s.continuum_regret = trace.cum_regret.back();
    s.discretization_term = static_cast<double>(trace.horizon) * env.lipschitz() /
                            static_cast<double>(grid.k);
    const double bound = s.discretization_term + s.grid_regret;
    s.pass = s.continuum_regret <= bound + 1e-6 * std::max(1.0, std::abs(bound));
    return s;
}

std::vector<ConcentrationPoint> concentration_check(double sigma, std::uint64_t samples_per_mean,
                                                    const std::vector<double>& epsilons,
                                                    std::uint64_t trials, std::uint64_t seed) {
    if (sigma <= 0.0) throw std::invalid_argument("concentration_check: sigma must be > 0");
    if (samples_per_mean < 1 || trials < 1)
        throw std::invalid_argument("concentration_check: need samples and trials");
    RngStream g = derive_stream(seed, 0, 0, StreamPurpose::Reward);
    std::vector<std::uint64_t> hits(epsilons.size(), 0);
    for (std::uint64_t k = 0; k < trials; ++k) {
        double sum = 0.0;
        for (std::uint64_t j = 0; j < samples_per_mean; ++j) sum += sigma * g.gaussian();
        const double mean = sum / static_cast<double>(samples_per_mean);
        for (std::size_t e = 0; e < epsilons.size(); ++e)
            if (mean >= epsilons[e]) ++hits[e];
    }
    std::vector<ConcentrationPoint> out;
    out.reserve(epsilons.size());
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        ConcentrationPoint pt;
        pt.epsilon = epsilons[e];
        pt.violation_freq = static_cast<double>(hits[e]) / static_cast<double>(trials);
        const double n = static_cast<double>(samples_per_mean);
        pt.bound = std::exp(-n * pt.epsilon * pt.epsilon / (2.0 * sigma * sigma));
        pt.slack = 3.0 * std::sqrt(pt.bound * (1.0 - pt.bound) / static_cast<double>(trials)) + 1e-3;
        pt.pass = pt.violation_freq <= pt.bound + pt.slack;
        out.push_back(pt);
    }
    return out;
}

SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog: length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    const std::size_t n = lx.size();
    if (n < 2) throw std::invalid_argument("fit_loglog: need at least two positive points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_loglog: degenerate x values");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = n;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
            sse += resid * resid;
        }
        fit.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

SlopeFit regret_slope(const std::vector<EpisodeTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("regret_slope: no traces");
    const std::uint64_t horizon = traces[0].horizon;
    for (const auto& tr : traces)
        if (tr.horizon != horizon || tr.cum_regret.size() != horizon)
            throw std::invalid_argument("regret_slope: traces disagree on horizon");
    const std::uint64_t lo = std::max<std::uint64_t>(2, horizon / 16);
    std::set<std::uint64_t> ts;
    const double ll = std::log(static_cast<double>(lo));
    const double lh = std::log(static_cast<double>(horizon));
    for (int i = 0; i < 33; ++i) {
        const double f = ll + (lh - ll) * static_cast<double>(i) / 32.0;
        std::uint64_t t = static_cast<std::uint64_t>(std::llround(std::exp(f)));
        t = std::min(std::max(t, lo), horizon);
        ts.insert(t);
    }
    std::vector<double> xs, ys;
    for (const std::uint64_t t : ts) {
        double mean = 0.0;
        for (const auto& tr : traces) mean += tr.cum_regret[t - 1];
        mean /= static_cast<double>(traces.size());
        xs.push_back(static_cast<double>(t));
        ys.push_back(mean);
    }
    return fit_loglog(xs, ys);
}

std::vector<CurvePoint> mean_curve(const std::vector<EpisodeTrace>& traces,
                                   std::size_t max_points) {
    if (traces.empty()) throw std::invalid_argument("mean_curve: no traces");
    if (max_points < 2) throw std::invalid_argument("mean_curve: need at least two points");
    const std::uint64_t horizon = traces[0].horizon;
    for (const auto& tr : traces)
        if (tr.horizon != horizon || tr.cum_regret.size() != horizon)
            throw std::invalid_argument("mean_curve: traces disagree on horizon");
    const std::uint64_t stride =
        std::max<std::uint64_t>(1, (horizon + max_points - 1) / max_points);
    std::vector<CurvePoint> out;
    for (std::uint64_t t = 1; t <= horizon; t += stride) {
        const std::uint64_t at = std::min(horizon, t);
        CurvePoint cp;
        cp.t = at;
        for (const auto& tr : traces) cp.mean_cum += tr.cum_regret[at - 1];
        cp.mean_cum /= static_cast<double>(traces.size());
        double var = 0.0;
        for (const auto& tr : traces) {
            const double d = tr.cum_regret[at - 1] - cp.mean_cum;
            var += d * d;
        }
        cp.std_cum = traces.size() > 1
                         ? std::sqrt(var / static_cast<double>(traces.size() - 1))
                         : 0.0;
        out.push_back(cp);
    }
    if (out.back().t != horizon) {
        CurvePoint cp;
        cp.t = horizon;
        for (const auto& tr : traces) cp.mean_cum += tr.cum_regret[horizon - 1];
        cp.mean_cum /= static_cast<double>(traces.size());
        double var = 0.0;
        for (const auto& tr : traces) {
            const double d = tr.cum_regret[horizon - 1] - cp.mean_cum;
            var += d * d;
        }
        cp.std_cum = traces.size() > 1
                         ? std::sqrt(var / static_cast<double>(traces.size() - 1))
                         : 0.0;
        out.push_back(cp);
    }
    return out;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace, const GoodEventReport& good) {
    out << "t,arm,gap,cum_regret,good\n";
    const bool zoom = !trace.arm_coords.empty();
    const std::size_t axes = static_cast<std::size_t>(trace.axes);
    for (std::size_t i = 0; i < trace.gap.size(); ++i) {
        const std::uint64_t t = i + 1;
        out << t << ',';
        if (zoom) {
            for (std::size_t a = 0; a < axes; ++a) {
                if (a) out << ';';
                out << format_double(trace.arm_coords[i * axes + a]);
            }
        } else {
            out << trace.arm_rank[i];
        }
        const int flag = (good.held || t < good.first_violation_round) ? 1 : 0;
        out << ',' << format_double(trace.gap[i]) << ',' << format_double(trace.cum_regret[i])
            << ',' << flag << '\n';
    }
}

std::string trace_csv(const EpisodeTrace& trace, const GoodEventReport& good) {
    std::ostringstream os;
    write_trace_csv(os, trace, good);
    return os.str();
}

ParsedCurve read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,arm,gap,cum_regret", 0) != 0)
        throw std::runtime_error("trace csv: bad header");
    ParsedCurve out;
    std::uint64_t expect = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        std::vector<std::string> fields;
        while (fields.size() < 5) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() < 4) throw std::runtime_error("trace csv: short row");
        char* end = nullptr;
        const std::uint64_t t = std::strtoull(fields[0].c_str(), &end, 10);
        if (end == fields[0].c_str() || *end != '\0' || t != expect)
            throw std::runtime_error("trace csv: bad round column");
        const double cum = std::strtod(fields[3].c_str(), &end);
        if (end == fields[3].c_str())
            throw std::runtime_error("trace csv: bad regret column");
        out.t.push_back(t);
        out.cum_regret.push_back(cum);
        ++expect;
    }
    if (out.t.empty()) throw std::runtime_error("trace csv: no rows");
    return out;
}

} // namespace lipband
