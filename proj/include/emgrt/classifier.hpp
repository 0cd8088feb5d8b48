#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emgrt/projection.hpp"

namespace emgrt {

/// Gaussian RBF network: scores = weights * psi(s) + bias,
/// psi_j(s) = exp(-|s - center_j|^2 / (2 width_j^2)).
struct RbfModel {
    Eigen::MatrixXd centers;  // M x p
    Eigen::VectorXd widths;   // M
    Eigen::MatrixXd weights;  // v x M
    Eigen::VectorXd bias;     // v
    std::vector<std::string> class_names;

    std::size_t nodes() const noexcept { return static_cast<std::size_t>(centers.rows()); }
    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(centers.cols()); }
    std::size_t classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }

    /// Throws unless shapes agree, widths are positive and everything is finite.
    void check() const;
};

struct Prediction {
    Eigen::VectorXd scores;
    int decided_class = 0;
};

/// Index of the largest score, lowest index on ties.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores);

Eigen::VectorXd activations(const Eigen::Ref<const Eigen::VectorXd>& s, const RbfModel& model);
void activations_into(const Eigen::Ref<const Eigen::VectorXd>& s, const RbfModel& model,
                      Eigen::Ref<Eigen::VectorXd> out);

Prediction predict(const RbfModel& model, const Eigen::Ref<const Eigen::VectorXd>& s);

/// Writes class scores into `scores` (size v) using `hidden` (size M) as scratch; returns the decision.
int predict_into(const RbfModel& model, const Eigen::Ref<const Eigen::VectorXd>& s,
                 Eigen::Ref<Eigen::VectorXd> hidden, Eigen::Ref<Eigen::VectorXd> scores);

inline constexpr int kDefaultCenters = 14;
inline constexpr double kDefaultOutputRidge = 1e-6;
inline constexpr double kMinWidth = 1e-6;
inline constexpr int kMaxKMeansIterations = 200;
inline constexpr double kKMeansTolerance = 1e-6;

/// k-means++ seeded k-means on the rows of `points`. Deterministic for a given seed.
Eigen::MatrixXd fit_centers(const Eigen::MatrixXd& points, int count, std::uint64_t seed);

/// Width of each center: mean distance to its two nearest other centers, floored at kMinWidth.
/// A single center takes the diameter of `points` (or kMinWidth if none are given).
Eigen::VectorXd fit_widths(const Eigen::MatrixXd& centers, const Eigen::MatrixXd* points = nullptr);

struct OutputLayer {
    Eigen::MatrixXd weights;  // v x M
    Eigen::VectorXd bias;     // v
};

/// Ridge least squares from [psi | 1] to one-hot targets. The ridge applies to the weights only,
/// so the bias tends to the class priors as the ridge grows.
OutputLayer fit_output_weights(const ScatterMatrix& data, const Eigen::MatrixXd& centers,
                               const Eigen::VectorXd& widths, double ridge, bool use_bias = true);

struct RbfConfig {
    int centers = kDefaultCenters;
    double ridge = kDefaultOutputRidge;
    bool use_bias = true;

    bool operator==(const RbfConfig&) const = default;
};

RbfModel train_rbf(const ScatterMatrix& data, const RbfConfig& cfg, std::uint64_t seed,
                   std::vector<std::string> class_names = {});

}  // namespace emgrt
