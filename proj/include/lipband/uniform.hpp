#pragma once
// Fixed-grid policies.  All three run on the uniform K-grid over the joint
// action space and rely on the shared arm order to coordinate without
// communication: every player simulates the same global computation and
// plays only its own coordinate block of the result.
//
//   McabAState  shared reward: sweep once, then UCB argmax each round
//   McabBState  private rewards + observed actions: round-robin over a
//               commonly-held desired set, eliminations signaled by a
//               deliberate one-round deviation
//   McabCState  private rewards only: deterministic explore/commit schedule
//               with phases anchored at powers of two

#include <cstdint>
#include <optional>
#include <vector>

#include "lipband/geometry.hpp"
#include "lipband/index.hpp"
#include "lipband/observations.hpp"
#include "lipband/rng.hpp"

namespace lipband {

enum class KRule { UCB, DSEE };

// Horizon-tuned grid resolution, before rounding.  The DSEE variant pays a
// larger log penalty because its exploration phases revisit every arm.
double choose_grid_k_real(std::uint64_t horizon, double lipschitz, int players, int dim,
                          KRule rule);
// max(1, round-half-up) of the above
int choose_grid_k(std::uint64_t horizon, double lipschitz, int players, int dim, KRule rule);

// Extracts player p's coordinate block from a joint arm.
std::vector<double> player_block(const std::vector<double>& joint, int player, int dim);

// -----------------------------------------------------------------------------

class McabAState {
public:
    // player >= 0 selects which block step() returns; kController runs the
    // same computation as a single omniscient agent (used by the oracle).
    static constexpr int kController = -1;

    McabAState(GridSpec grid, std::uint64_t horizon, int player);

    // Joint decision for round t given the shared reward observed for round
    // t-1 (null only at t=1).  Exposed for the centralized oracle.
    std::uint64_t next_rank(std::uint64_t t, const double* prev_reward);

    std::vector<double> step(std::uint64_t t, const std::optional<SharedRewardObs>& obs);

    std::uint64_t last_rank() const { return last_rank_; }
    std::uint64_t sweep_rounds() const { return sweep_len_; }
    const std::vector<ArmStats>& stats() const { return stats_; }
    const GridSpec& grid() const { return grid_; }

private:
    GridSpec grid_;
    std::uint64_t horizon_;
    int player_;
    std::uint64_t sweep_len_;
    std::vector<ArmStats> stats_;
    std::uint64_t last_rank_ = 0;
};

// -----------------------------------------------------------------------------

class McabBState {
public:
    McabBState(GridSpec grid, std::uint64_t horizon, int player);

    std::vector<double> step(std::uint64_t t, const std::optional<JointActionObs>& obs);

    // Diagnostics / coordination checks.
    std::uint64_t desired_count() const { return alive_count_; }
    std::uint64_t last_designated() const { return designated_; }
    std::uint64_t removal_digest() const { return removal_digest_; }
    bool is_desired(std::uint64_t rank) const { return alive_[rank] != 0; }
    std::vector<std::uint64_t> desired_ranks() const;
    const std::vector<ArmStats>& stats() const { return stats_; }
    std::uint64_t sweep_rounds() const { return sweep_len_; }
    bool signaled_last() const { return signaled_; }

private:
    std::uint64_t next_desired_after(std::uint64_t rank) const;
    bool elimination_due(std::uint64_t candidate) const;
    std::vector<double> signal_block(std::uint64_t designated) const;

    GridSpec grid_;
    std::uint64_t horizon_;
    int player_;
    std::uint64_t sweep_len_;
    std::uint64_t arm_count_;
    std::vector<ArmStats> stats_;
    std::vector<std::uint8_t> alive_;
    std::uint64_t alive_count_;
    std::uint64_t cursor_;          // rank of the last designated arm
    std::uint64_t designated_ = 0;  // this round's designated arm
    bool have_designated_ = false;
    bool signaled_ = false;
    std::uint64_t removal_digest_ = 0x811c9dc5;
};

// -----------------------------------------------------------------------------

enum class FChoice { SQRT, LOG2, LINEAR };

std::uint64_t explore_repetitions(FChoice f, int phase);

struct ScheduleSlot {
    bool explore = false;
    std::uint64_t arm_rank = 0;     // explore only
    std::uint64_t repetition = 0;   // 1-based position within the arm's block
    int phase = 0;
};

// Pure function of (t, number of joint arms, f).  Phase 1 explores from
// t = 1; later phases start at rounds 2^n (n being the phase number) once
// 2^n clears both floor(log2(f(1) * arms)) + 1 and the end of the previous
// exploration block.  Between blocks the slot is COMMIT.
ScheduleSlot mdsee_schedule(std::uint64_t t, std::uint64_t joint_arms, FChoice f);

class McabCState {
public:
    McabCState(GridSpec grid, std::uint64_t horizon, int player, FChoice f, RngStream tie_break);

    std::vector<double> step(std::uint64_t t, const std::optional<PrivateRewardObs>& obs);

    // Rank this player is committed to, when the current slot is a commit.
    std::optional<std::uint64_t> committed_rank() const;
    const std::vector<ArmStats>& stats() const { return stats_; }

private:
    GridSpec grid_;
    std::uint64_t horizon_;
    int player_;
    FChoice f_;
    RngStream tie_break_;
    std::vector<ArmStats> stats_;
    std::uint64_t committed_ = 0;
    int committed_phase_ = -1;
    bool in_commit_ = false;
};

} // namespace lipband
