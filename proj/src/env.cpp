#include "lipband/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lipband {

std::string to_string(MeanFamily f) {
    switch (f) {
    case MeanFamily::CONE: return "cone";
    case MeanFamily::MULTI_PEAK: return "multi_peak";
    case MeanFamily::AFFINE_CAP: return "affine_cap";
    }
    return "?";
}

std::string to_string(NoiseKind n) {
    return n == NoiseKind::BERNOULLI ? "bernoulli" : "gaussian";
}

MeanFamily mean_family_from_string(const std::string& s) {
    if (s == "cone") return MeanFamily::CONE;
    if (s == "multi_peak") return MeanFamily::MULTI_PEAK;
    if (s == "affine_cap") return MeanFamily::AFFINE_CAP;
    throw std::invalid_argument("unknown mean_family: '" + s + "'");
}

NoiseKind noise_from_string(const std::string& s) {
    if (s == "bernoulli") return NoiseKind::BERNOULLI;
    if (s == "gaussian") return NoiseKind::GAUSSIAN;
    throw std::invalid_argument("unknown noise: '" + s + "'");
}

EnvModel::EnvModel(int players, int dim, double lipschitz, Norm norm, MeanFamily family,
                   std::vector<Peak> peaks, NoiseKind noise, double sigma)
    : players_(players), dim_(dim), lipschitz_(lipschitz), norm_(norm),
      family_(family), peaks_(std::move(peaks)), noise_(noise), sigma_(sigma) {
    if (players_ < 1) throw std::invalid_argument("env: players must be >= 1");
    if (dim_ < 1) throw std::invalid_argument("env: dim must be >= 1");
    if (!(lipschitz_ > 0.0)) throw std::invalid_argument("env: lipschitz must be > 0");
    if (sigma_ < 0.0) throw std::invalid_argument("env: sigma must be >= 0");
    if (peaks_.empty()) throw std::invalid_argument("env: at least one peak required");
    if (family_ != MeanFamily::MULTI_PEAK && peaks_.size() != 1)
        throw std::invalid_argument("env: " + to_string(family_) + " takes exactly one peak");

    const std::size_t n = static_cast<std::size_t>(axes());
    for (const Peak& p : peaks_) {
        if (p.at.size() != n)
            throw std::invalid_argument("env: peak has " + std::to_string(p.at.size()) +
                                        " coordinates, expected " + std::to_string(n));
        for (double c : p.at)
            if (!(c >= 0.0 && c <= 1.0))
                throw std::invalid_argument("env: peak coordinate outside [0,1]");
        if (!(p.height >= 0.0 && p.height <= 1.0))
            throw std::invalid_argument("env: peak height outside [0,1]");
    }

    switch (norm_) {
    case Norm::L1: affine_scale_ = 1.0; break;
    case Norm::L2: affine_scale_ = std::sqrt(static_cast<double>(n)); break;
    case Norm::LINF: affine_scale_ = static_cast<double>(n); break;
    }

    // Maximizer.  For cones the highest peak wins (everything else sits below
    // max height); for the capped affine plane the value decreases in every
    // coordinate, so the origin wins and is also lexicographically smallest.
    if (family_ == MeanFamily::AFFINE_CAP) {
        optimal_arm_.assign(n, 0.0);
        double s = 0.0;
        for (double c : peaks_[0].at) s += c;
        optimal_mean_ = std::clamp(peaks_[0].height + lipschitz_ * s / affine_scale_, 0.0, 1.0);
    } else {
        const Peak* best = &peaks_[0];
        for (const Peak& p : peaks_)
            if (p.height > best->height || (p.height == best->height && p.at < best->at))
                best = &p;
        optimal_arm_ = best->at;
        optimal_mean_ = best->height;
    }
}

void EnvModel::check_arm(const std::vector<double>& arm) const {
    if (arm.size() != static_cast<std::size_t>(axes()))
        throw std::invalid_argument("env: arm has " + std::to_string(arm.size()) +
                                    " coordinates, expected " + std::to_string(axes()));
    for (std::size_t i = 0; i < arm.size(); ++i)
        if (!(arm[i] >= 0.0 && arm[i] <= 1.0))
            throw std::invalid_argument("env: arm coordinate " + std::to_string(i) +
                                        " = " + std::to_string(arm[i]) + " outside [0,1]");
}

double EnvModel::cone_value(const Peak& p, const std::vector<double>& arm) const {
    const double d = distance(p.at.data(), arm.data(), arm.size(), norm_);
    return std::max(0.0, p.height - lipschitz_ * d);
}

double EnvModel::mean(const std::vector<double>& arm) const {
    check_arm(arm);
    switch (family_) {
    case MeanFamily::CONE:
        return cone_value(peaks_[0], arm);
    case MeanFamily::MULTI_PEAK: {
        double best = 0.0;
        for (const Peak& p : peaks_) best = std::max(best, cone_value(p, arm));
        return best;
    }
    case MeanFamily::AFFINE_CAP: {
        double s = 0.0;
        for (std::size_t i = 0; i < arm.size(); ++i) s += arm[i] - peaks_[0].at[i];
        return std::clamp(peaks_[0].height - lipschitz_ * s / affine_scale_, 0.0, 1.0);
    }
    }
    return 0.0;
}

double EnvModel::gap(const std::vector<double>& arm) const {
    return optimal_mean_ - mean(arm);
}

double EnvModel::sample_reward(const std::vector<double>& arm, RngStream& rng) const {
    const double mu = mean(arm);
    if (noise_ == NoiseKind::BERNOULLI)
        return rng.bernoulli(mu) ? 1.0 : 0.0;
    return mu + sigma_ * rng.gaussian();
}

LipschitzReport EnvModel::verify_lipschitz(std::size_t num_pairs, RngStream& rng) const {
    const std::size_t n = static_cast<std::size_t>(axes());
    std::vector<double> a(n), b(n);
    LipschitzReport rep;
    rep.pairs = num_pairs;
    for (std::size_t k = 0; k < num_pairs; ++k) {
        for (std::size_t i = 0; i < n; ++i) a[i] = rng.uniform01();
        for (std::size_t i = 0; i < n; ++i) b[i] = rng.uniform01();
        const double d = distance(a.data(), b.data(), n, norm_);
        if (d < 1e-12) continue;
        const double ratio = std::fabs(mean(a) - mean(b)) / d;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.pass = rep.max_ratio <= lipschitz_ + 1e-9;
    return rep;
}

} // namespace lipband
