#pragma once
// Empirical means with horizon-tuned confidence widths.  The width
// sqrt(6 ln T / n) is what every policy in this library builds its UCB
// indices, elimination intervals and ball radii from.

#include <cstdint>

#include "lipband/common.hpp"

namespace lipband {

struct ArmStats {
    std::uint64_t pulls = 0;
    double reward_sum = 0.0;

    double mean() const { return pulls == 0 ? 0.0 : reward_sum / static_cast<double>(pulls); }
    void add(double reward) {
        ++pulls;
        reward_sum += reward;
    }
};

// sqrt(6 ln T / n); +infinity when the arm is unpulled.
double confidence_width(std::uint64_t pulls, std::uint64_t horizon);

// mean + width (the optimistic index used on the uniform grid)
double ucb_index(const ArmStats& s, std::uint64_t horizon);

struct Interval {
    double lo = -kInfinity;
    double hi = kInfinity;
};

// (mean - width, mean + width); infinite for unpulled arms
Interval confidence_interval(const ArmStats& s, std::uint64_t horizon);

// True when `upper` lies strictly above `lower` with no overlap.  Strict,
// so unpulled arms (infinite intervals) never trigger an elimination.
inline bool strictly_above(const Interval& upper, const Interval& lower) {
    return upper.lo > lower.hi;
}

} // namespace lipband
