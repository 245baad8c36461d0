#pragma once
// Synthetic reward landscapes over [0,1]^(M*d).  Three closed-form families
// whose Lipschitz constant and maximizer are known exactly, plus the two
// noise channels the simulations use.

#include <cstdint>
#include <string>
#include <vector>

#include "lipband/common.hpp"
#include "lipband/rng.hpp"

namespace lipband {

enum class MeanFamily { CONE, MULTI_PEAK, AFFINE_CAP };
enum class NoiseKind { BERNOULLI, GAUSSIAN };

std::string to_string(MeanFamily f);
std::string to_string(NoiseKind n);
MeanFamily mean_family_from_string(const std::string& s);
NoiseKind noise_from_string(const std::string& s);

struct Peak {
    std::vector<double> at;  // M*d coordinates in [0,1]
    double height = 0.0;     // in [0,1]
};

struct LipschitzReport {
    double max_ratio = 0.0;
    std::size_t pairs = 0;
    bool pass = false;
};

// Mean structure:
//   CONE        max(0, h - L * dist(a, p)) for the single peak (p, h)
//   MULTI_PEAK  max over peaks of the cone value
//   AFFINE_CAP  clamp(h - L * sum_j(a_j - p_j) / q, 0, 1), q scaled so the
//               slope is exactly L under the configured norm
// All three keep means inside [0,1] and are L-Lipschitz by construction.
class EnvModel {
public:
    EnvModel(int players, int dim, double lipschitz, Norm norm, MeanFamily family,
             std::vector<Peak> peaks, NoiseKind noise, double sigma);

    int players() const { return players_; }
    int dim() const { return dim_; }
    int axes() const { return players_ * dim_; }
    double lipschitz() const { return lipschitz_; }
    Norm norm() const { return norm_; }
    MeanFamily family() const { return family_; }
    NoiseKind noise() const { return noise_; }
    double sigma() const { return sigma_; }
    const std::vector<Peak>& peaks() const { return peaks_; }

    // True mean of a joint arm.  Throws std::invalid_argument when the arm
    // has the wrong arity or leaves the unit cube.
    double mean(const std::vector<double>& arm) const;

    // Exact maximizer and value (closed form; ties resolved toward the
    // lexicographically smallest maximizer).
    const std::vector<double>& optimal_arm() const { return optimal_arm_; }
    double optimal_mean() const { return optimal_mean_; }

    double gap(const std::vector<double>& arm) const;

    // One noisy reward draw.  Bernoulli consumes one uniform, Gaussian two,
    // independent of the arm, so reward sequences depend only on the stream.
    double sample_reward(const std::vector<double>& arm, RngStream& rng) const;

    // Monte Carlo check that |mean(a)-mean(b)| <= L * dist(a,b).
    LipschitzReport verify_lipschitz(std::size_t num_pairs, RngStream& rng) const;

private:
    void check_arm(const std::vector<double>& arm) const;
    double cone_value(const Peak& p, const std::vector<double>& arm) const;

    int players_;
    int dim_;
    double lipschitz_;
    Norm norm_;
    MeanFamily family_;
    std::vector<Peak> peaks_;
    NoiseKind noise_;
    double sigma_;
    double affine_scale_ = 1.0;  // q above; depends on norm and arity
    std::vector<double> optimal_arm_;
    double optimal_mean_ = 0.0;
};

} // namespace lipband
