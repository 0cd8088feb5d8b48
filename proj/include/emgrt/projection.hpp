#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace emgrt {

/// Feature matrix G (one row per training window) with class labels in [0, classes).
struct TrainingMatrix {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    int classes = 0;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
    std::vector<std::size_t> class_counts() const;

    /// Throws unless shapes agree, labels are in range and every class has at least two rows.
    void check() const;
};

/// Projected training set D with labels carried through.
struct ScatterMatrix {
    Eigen::MatrixXd projected;
    std::vector<int> labels;
    int classes = 0;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(projected.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(projected.cols()); }
};

/// Linear Fisher discriminant: f -> (f - mean) * basis^T.
struct LinearProjectionModel {
    Eigen::VectorXd mean;         // H
    Eigen::MatrixXd basis;        // p x H, unit-norm rows by descending eigenvalue
    Eigen::VectorXd eigenvalues;  // p

    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(basis.rows()); }

    Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& f) const;
    void project_into(const Eigen::Ref<const Eigen::VectorXd>& f, Eigen::Ref<Eigen::VectorXd> out) const;
};

inline constexpr double kDefaultFisherRidge = 1e-3;

/// Solves S_b e = lambda (S_w + ridge * tr(S_w)/H * I) e and keeps the top `dims` directions.
LinearProjectionModel train_linear_fisher(const TrainingMatrix& train, int dims,
                                          double ridge = kDefaultFisherRidge);

struct KernelFisherOptions {
    int dims = 8;
    /// Gaussian bandwidth; median pairwise training distance when unset.
    std::optional<double> bandwidth;
    /// Absolute within-class regularizer; reg_scale * tr(N) / J when unset.
    std::optional<double> reg;
    double reg_scale = 1e-3;
};

/// Kernel Fisher discriminant in dual form with a Gaussian kernel.
/// project(f) = A (k(f) - kernel_mean), k(f)_i = exp(-|f - x_i|^2 / (2 bandwidth^2)).
class KernelProjectionModel {
public:
    KernelProjectionModel() = default;
    KernelProjectionModel(Eigen::MatrixXd support, double bandwidth, Eigen::MatrixXd coefficients,
                          Eigen::VectorXd kernel_mean, Eigen::VectorXd eigenvalues);

    const Eigen::MatrixXd& support() const noexcept { return support_; }
    double bandwidth() const noexcept { return bandwidth_; }
    const Eigen::MatrixXd& coefficients() const noexcept { return coefficients_; }
    const Eigen::VectorXd& kernel_mean() const noexcept { return kernel_mean_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(support_.cols()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(coefficients_.rows()); }

    Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& f) const;
    void project_into(const Eigen::Ref<const Eigen::VectorXd>& f, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    Eigen::MatrixXd support_;       // J x H training vectors
    double bandwidth_ = 1.0;
    Eigen::MatrixXd coefficients_;  // p x J
    Eigen::VectorXd kernel_mean_;   // J, column means of the training kernel matrix
    Eigen::VectorXd eigenvalues_;   // p
    Eigen::VectorXd offset_;        // coefficients * kernel_mean
};

KernelProjectionModel train_kernel_fisher(const TrainingMatrix& train, const KernelFisherOptions& opts);

/// Median Euclidean distance over all distinct row pairs.
double median_pairwise_distance(const Eigen::MatrixXd& points);

template <class Model>
ScatterMatrix make_scatter(const Model& model, const TrainingMatrix& train)
{
    ScatterMatrix d;
    d.projected.resize(train.features.rows(), static_cast<Eigen::Index>(model.output_dim()));
    Eigen::VectorXd row(d.projected.cols());
    for (Eigen::Index i = 0; i < train.features.rows(); ++i) {
        model.project_into(train.features.row(i).transpose(), row);
        d.projected.row(i) = row.transpose();
    }
    d.labels = train.labels;
    d.classes = train.classes;
    return d;
}

/// tr(S_b) / tr(S_w) of a labeled point set; 0 when there is no between-class spread.
double trace_ratio(const Eigen::MatrixXd& points, const std::vector<int>& labels, int classes);

}  // namespace emgrt
