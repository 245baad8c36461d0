#pragma once
// Scalar helpers shared across the library: the norm used by the action
// space and a couple of numeric constants.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipband {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Norm { L1, L2, LINF };

inline double distance(const double* a, const double* b, std::size_t n, Norm norm) {
    double acc = 0.0;
    switch (norm) {
    case Norm::L1:
        for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
        return acc;
    case Norm::L2:
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    case Norm::LINF:
        for (std::size_t i = 0; i < n; ++i) acc = std::max(acc, std::fabs(a[i] - b[i]));
        return acc;
    }
    return acc;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b, Norm norm) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    return distance(a.data(), b.data(), a.size(), norm);
}

inline std::string to_string(Norm n) {
    switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::LINF: return "linf";
    }
    return "?";
}

inline Norm norm_from_string(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::L1;
    if (s == "l2" || s == "L2") return Norm::L2;
    if (s == "linf" || s == "LINF" || s == "Linf") return Norm::LINF;
    throw std::invalid_argument("unknown norm: '" + s + "' (expected l1, l2 or linf)");
}

} // namespace lipband
