#include "lipband/uniform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lipband {

double choose_grid_k_real(std::uint64_t horizon, double lipschitz, int players, int dim,
                          KRule rule) {
    if (horizon < 2) throw std::invalid_argument("choose_grid_k: horizon must be >= 2");
    if (lipschitz <= 0.0) throw std::invalid_argument("choose_grid_k: lipschitz must be > 0");
    if (players < 1 || dim < 1) throw std::invalid_argument("choose_grid_k: bad dimensions");
    const double md = static_cast<double>(players) * dim;
    const double ln_t = std::log(static_cast<double>(horizon));
    const double t_exp = 1.0 / (2.0 * (md + 1.0));
    const double log_exp = rule == KRule::UCB ? 1.0 / (2.0 * (md + 1.0)) : 1.0 / (md + 1.0);
    return std::pow(static_cast<double>(horizon), t_exp) *
           std::pow(lipschitz, 1.0 / (players + 1.0)) / std::pow(ln_t, log_exp);
}

int choose_grid_k(std::uint64_t horizon, double lipschitz, int players, int dim, KRule rule) {
    const double real = choose_grid_k_real(horizon, lipschitz, players, dim, rule);
    const double rounded = std::floor(real + 0.5);
    return std::max(1, static_cast<int>(rounded));
}

std::vector<double> player_block(const std::vector<double>& joint, int player, int dim) {
    if (player < 0 || dim < 1 || static_cast<std::size_t>((player + 1) * dim) > joint.size())
        throw std::invalid_argument("player_block: block out of range");
    return std::vector<double>(joint.begin() + static_cast<std::size_t>(player) * dim,
                               joint.begin() + static_cast<std::size_t>(player + 1) * dim);
}

namespace {

std::vector<double> emit(const GridSpec& grid, const GridIndex& idx, int player) {
    std::vector<double> joint = grid_coords(grid, idx);
    if (player < 0) return joint;
    return player_block(joint, player, grid.dim);
}

} // namespace

// ---------------------------------------------------------------- McabAState

McabAState::McabAState(GridSpec grid, std::uint64_t horizon, int player)
    : grid_(grid), horizon_(horizon), player_(player) {
    if (horizon_ < 2) throw std::invalid_argument("McabAState: horizon must be >= 2");
    if (player_ != kController && (player_ < 0 || player_ >= grid_.players))
        throw std::invalid_argument("McabAState: player out of range");
    sweep_len_ = grid_.joint_count();
    stats_.assign(sweep_len_, ArmStats{});
}

std::uint64_t McabAState::next_rank(std::uint64_t t, const double* prev_reward) {
    if (t < 1 || t > horizon_) throw std::invalid_argument("McabAState: round out of range");
    if (t == 1) {
        if (prev_reward) throw std::invalid_argument("McabAState: unexpected reward at t=1");
    } else {
        if (!prev_reward) throw std::invalid_argument("McabAState: missing reward");
        stats_[last_rank_].add(*prev_reward);
    }
    if (t <= sweep_len_) {
        last_rank_ = t - 1;
        return last_rank_;
    }
    std::uint64_t best = 0;
    double best_index = -kInfinity;
    for (std::uint64_t r = 0; r < sweep_len_; ++r) {
        const double idx = ucb_index(stats_[r], horizon_);
        if (idx > best_index) {
            best_index = idx;
            best = r;
        }
    }
    last_rank_ = best;
    return best;
}

std::vector<double> McabAState::step(std::uint64_t t, const std::optional<SharedRewardObs>& obs) {
    const double* prev = obs ? &obs->reward : nullptr;
    const std::uint64_t rank = next_rank(t, prev);
    return emit(grid_, unrank(grid_, rank), player_);
}

// ---------------------------------------------------------------- McabBState

McabBState::McabBState(GridSpec grid, std::uint64_t horizon, int player)
    : grid_(grid), horizon_(horizon), player_(player) {
    if (horizon_ < 2) throw std::invalid_argument("McabBState: horizon must be >= 2");
    if (player_ < 0 || player_ >= grid_.players)
        throw std::invalid_argument("McabBState: player out of range");
    sweep_len_ = grid_.joint_count();
    arm_count_ = sweep_len_;
    stats_.assign(arm_count_, ArmStats{});
    alive_.assign(arm_count_, 1);
    alive_count_ = arm_count_;
    // The sweep ends on the highest rank, so the first rotation pick wraps
    // around to rank 0.
    cursor_ = arm_count_ - 1;
}

std::uint64_t McabBState::next_desired_after(std::uint64_t rank) const {
    for (std::uint64_t off = 1; off <= arm_count_; ++off) {
        const std::uint64_t cand = (rank + off) % arm_count_;
        if (alive_[cand]) return cand;
    }
    throw std::logic_error("McabBState: desired set is empty");
}

bool McabBState::elimination_due(std::uint64_t candidate) const {
    const Interval cand_iv = confidence_interval(stats_[candidate], horizon_);
    for (std::uint64_t r = 0; r < arm_count_; ++r) {
        if (!alive_[r] || r == candidate) continue;
        if (strictly_above(confidence_interval(stats_[r], horizon_), cand_iv)) return true;
    }
    return false;
}

std::vector<double> McabBState::signal_block(std::uint64_t designated) const {
    // Deviate by advancing this player's own block to the next point of its
    // sub-grid (with carry, wrapping), which is always a different block.
    GridIndex idx = unrank(grid_, designated);
    for (int axis = (player_ + 1) * grid_.dim - 1; axis >= player_ * grid_.dim; --axis) {
        if (++idx[static_cast<std::size_t>(axis)] <= grid_.k) break;
        idx[static_cast<std::size_t>(axis)] = 0;
    }
    return emit(grid_, idx, player_);
}

std::vector<double> McabBState::step(std::uint64_t t, const std::optional<JointActionObs>& obs) {
    if (t < 1 || t > horizon_) throw std::invalid_argument("McabBState: round out of range");
    signaled_ = false;
    if (t == 1) {
        if (obs) throw std::invalid_argument("McabBState: unexpected observation at t=1");
    } else {
        if (!obs) throw std::invalid_argument("McabBState: missing observation");
        const std::uint64_t seen = rank_of(grid_, nearest_grid_index(grid_, obs->joint));
        stats_[seen].add(obs->own_reward);
        if (have_designated_ && seen != designated_ && alive_[designated_]) {
            alive_[designated_] = 0;
            --alive_count_;
            removal_digest_ = mix64(removal_digest_ ^ designated_);
            if (alive_count_ == 0) throw std::logic_error("McabBState: eliminated every arm");
        }
    }
    if (t <= sweep_len_) {
        have_designated_ = false;
        return emit(grid_, unrank(grid_, t - 1), player_);
    }
    cursor_ = next_desired_after(cursor_);
    designated_ = cursor_;
    have_designated_ = true;
    if (elimination_due(designated_)) {
        signaled_ = true;
        return signal_block(designated_);
    }
    return emit(grid_, unrank(grid_, designated_), player_);
}

std::vector<std::uint64_t> McabBState::desired_ranks() const {
    std::vector<std::uint64_t> out;
    out.reserve(alive_count_);
    for (std::uint64_t r = 0; r < arm_count_; ++r)
        if (alive_[r]) out.push_back(r);
    return out;
}

// ---------------------------------------------------------------- schedule

std::uint64_t explore_repetitions(FChoice f, int phase) {
    if (phase < 1) throw std::invalid_argument("explore_repetitions: phase must be >= 1");
    const double n = static_cast<double>(phase);
    switch (f) {
        case FChoice::SQRT: return static_cast<std::uint64_t>(std::ceil(std::sqrt(n)));
        case FChoice::LOG2: return static_cast<std::uint64_t>(std::ceil(std::log2(n + 1.0)));
        case FChoice::LINEAR: return static_cast<std::uint64_t>(phase);
    }
    throw std::invalid_argument("explore_repetitions: bad choice");
}

ScheduleSlot mdsee_schedule(std::uint64_t t, std::uint64_t joint_arms, FChoice f) {
    if (t < 1) throw std::invalid_argument("mdsee_schedule: round must be >= 1");
    if (joint_arms < 1) throw std::invalid_argument("mdsee_schedule: need at least one arm");

    // Smallest admissible phase exponent: 2^n must exceed the length of the
    // first exploration block.
    int n0 = 1;
    {
        const std::uint64_t first_len = explore_repetitions(f, 1) * joint_arms;
        while ((std::uint64_t{1} << n0) <= first_len && n0 < 62) ++n0;
    }

    std::uint64_t start = 1;
    int phase = 1;
    for (;;) {
        const std::uint64_t reps = explore_repetitions(f, phase);
        const std::uint64_t len = reps * joint_arms;
        if (t < start + len) {
            ScheduleSlot slot;
            slot.explore = true;
            slot.phase = phase;
            const std::uint64_t off = t - start;
            slot.arm_rank = off / reps;
            slot.repetition = off % reps + 1;
            return slot;
        }
        int n = n0;
        while ((std::uint64_t{1} << n) < start + len && n < 62) ++n;
        const std::uint64_t next_start = std::uint64_t{1} << n;
        if (next_start < start + len) throw std::overflow_error("mdsee_schedule: horizon too large");
        if (t < next_start) {
            ScheduleSlot slot;
            slot.explore = false;
            slot.phase = phase;
            return slot;
        }
        start = next_start;
        phase = n;
    }
}

// ---------------------------------------------------------------- McabCState

McabCState::McabCState(GridSpec grid, std::uint64_t horizon, int player, FChoice f,
                       RngStream tie_break)
    : grid_(grid), horizon_(horizon), player_(player), f_(f), tie_break_(tie_break) {
    if (horizon_ < 2) throw std::invalid_argument("McabCState: horizon must be >= 2");
    if (player_ < 0 || player_ >= grid_.players)
        throw std::invalid_argument("McabCState: player out of range");
    stats_.assign(grid_.joint_count(), ArmStats{});
}

std::vector<double> McabCState::step(std::uint64_t t, const std::optional<PrivateRewardObs>& obs) {
    if (t < 1 || t > horizon_) throw std::invalid_argument("McabCState: round out of range");
    const std::uint64_t arms = grid_.joint_count();
    if (t == 1) {
        if (obs) throw std::invalid_argument("McabCState: unexpected observation at t=1");
    } else {
        if (!obs) throw std::invalid_argument("McabCState: missing observation");
        const ScheduleSlot prev = mdsee_schedule(t - 1, arms, f_);
        if (prev.explore) stats_[prev.arm_rank].add(obs->own_reward);
    }
    const ScheduleSlot slot = mdsee_schedule(t, arms, f_);
    if (slot.explore) {
        in_commit_ = false;
        return emit(grid_, unrank(grid_, slot.arm_rank), player_);
    }
    in_commit_ = true;
    if (committed_phase_ != slot.phase) {
        committed_phase_ = slot.phase;
        double best = -kInfinity;
        std::vector<std::uint64_t> ties;
        for (std::uint64_t r = 0; r < arms; ++r) {
            const double m = stats_[r].pulls ? stats_[r].mean() : -kInfinity;
            if (m > best) {
                best = m;
                ties.assign(1, r);
            } else if (m == best) {
                ties.push_back(r);
            }
        }
        committed_ = ties.size() == 1 ? ties[0] : ties[tie_break_.below(ties.size())];
    }
    return emit(grid_, unrank(grid_, committed_), player_);
}

std::optional<std::uint64_t> McabCState::committed_rank() const {
    if (!in_commit_) return std::nullopt;
    return committed_;
}

} // namespace lipband
