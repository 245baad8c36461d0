#include "lipband/index.hpp"

#include <cmath>
#include <stdexcept>

namespace lipband {

double confidence_width(std::uint64_t pulls, std::uint64_t horizon) {
    if (horizon < 2) throw std::invalid_argument("confidence_width: horizon must be >= 2");
    if (pulls == 0) return kInfinity;
    return std::sqrt(6.0 * std::log(static_cast<double>(horizon)) / static_cast<double>(pulls));
}

double ucb_index(const ArmStats& s, std::uint64_t horizon) {
    if (s.pulls == 0) return kInfinity;
    return s.mean() + confidence_width(s.pulls, horizon);
}

Interval confidence_interval(const ArmStats& s, std::uint64_t horizon) {
    if (s.pulls == 0) return Interval{};
    const double w = confidence_width(s.pulls, horizon);
    const double m = s.mean();
    return Interval{m - w, m + w};
}

} // namespace lipband
