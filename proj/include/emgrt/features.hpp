#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "emgrt/signal.hpp"

namespace emgrt {

inline constexpr double kDefaultVarianceFloor = 1e-12;

struct FeatureConfig {
    /// Lower bound applied to the sample variance before taking its log.
    double variance_floor = kDefaultVarianceFloor;
    /// Standardize features with training statistics before projection. Off by default.
    bool zscore = false;

    bool operator==(const FeatureConfig&) const = default;
};

/// Composite time-domain feature vector, block-major:
/// [IEMG ch1..chc | lnVAR ch1..chc | RSS ch1..chc].
class FeatureVector {
public:
    FeatureVector() = default;
    FeatureVector(Eigen::VectorXd values, std::size_t channels);

    static constexpr std::size_t kBlocks = 3;

    const Eigen::VectorXd& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    std::size_t channels() const noexcept { return channels_; }

    auto iemg() const { return values_.segment(0, static_cast<Eigen::Index>(channels_)); }
    auto ln_var() const { return values_.segment(static_cast<Eigen::Index>(channels_), static_cast<Eigen::Index>(channels_)); }
    auto rss() const { return values_.segment(2 * static_cast<Eigen::Index>(channels_), static_cast<Eigen::Index>(channels_)); }

private:
    Eigen::VectorXd values_;
    std::size_t channels_ = 0;
};

/// Integrated EMG: sum of absolute values.
double iemg(std::span<const double> channel);

/// Natural log of the unbiased sample variance, floored at `variance_floor`. Needs N >= 2.
double ln_var(std::span<const double> channel, double variance_floor = kDefaultVarianceFloor);

/// Root sum square: Euclidean norm of the samples.
double rss(std::span<const double> channel);

/// Writes the 3c features of an N x c block into `out` (size 3c) without allocating.
void extract_into(const Eigen::Ref<const Eigen::MatrixXd>& window, double variance_floor,
                  Eigen::Ref<Eigen::VectorXd> out);

FeatureVector extract(const SignalWindow& window, const FeatureConfig& cfg = {});

}  // namespace emgrt
