#include "emgrt/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "emgrt/error.hpp"

namespace emgrt {

namespace {

// Beyond this the regularized within-class matrix is treated as singular.
constexpr double kMaxCondition = 1e14;
// Relative residual above which the generalized eigen-solution is rejected.
constexpr double kMaxRelativeResidual = 1e-6;

struct ClassStats {
    Eigen::MatrixXd means;  // classes x dim
    Eigen::VectorXd global_mean;
    std::vector<std::size_t> counts;
};

ClassStats class_stats(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes)
{
    ClassStats s;
    s.means = Eigen::MatrixXd::Zero(classes, x.cols());
    s.counts.assign(static_cast<std::size_t>(classes), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        s.means.row(c) += x.row(i);
        ++s.counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < classes; ++c) {
        if (s.counts[static_cast<std::size_t>(c)] > 0) {
            s.means.row(c) /= static_cast<double>(s.counts[static_cast<std::size_t>(c)]);
        }
    }
    s.global_mean = x.colwise().mean().transpose();
    return s;
}

// Rows minus their class mean.
Eigen::MatrixXd within_class_residuals(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                       const Eigen::MatrixXd& class_means)
{
    Eigen::MatrixXd r = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        r.row(i) -= class_means.row(labels[static_cast<std::size_t>(i)]);
    }
    return r;
}

Eigen::MatrixXd between_class_scatter(const ClassStats& s)
{
    const auto dim = s.means.cols();
    Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index c = 0; c < s.means.rows(); ++c) {
        const auto n = static_cast<double>(s.counts[static_cast<std::size_t>(c)]);
        if (n == 0.0) {
            continue;
        }
        const Eigen::VectorXd d = s.means.row(c).transpose() - s.global_mean;
        sb.noalias() += n * d * d.transpose();
    }
    return sb;
}

void check_dims(const TrainingMatrix& train, int dims, std::size_t max_rank)
{
    if (dims < 1) {
        throw parameter_error("projection dimension must be >= 1, got " + std::to_string(dims));
    }
    if (dims > train.classes - 1) {
        throw parameter_error("projection dimension " + std::to_string(dims) + " exceeds classes - 1 = " +
                              std::to_string(train.classes - 1));
    }
    if (static_cast<std::size_t>(dims) > max_rank) {
        throw parameter_error("projection dimension " + std::to_string(dims) + " exceeds available rank " +
                              std::to_string(max_rank));
    }
}

// Flip so the largest-magnitude entry is positive (first such entry on ties).
void fix_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) {
        v = -v;
    }
}

struct GeneralizedPairs {
    Eigen::MatrixXd vectors;  // columns, descending eigenvalue
    Eigen::VectorXd values;
};

// Top `dims` solutions of a e = lambda b e with b symmetric positive definite.
GeneralizedPairs top_generalized_pairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int dims)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
    if (solver.info() != Eigen::Success) {
        throw numeric_error("generalized eigen-solver failed to converge");
    }
    const auto n = a.rows();
    GeneralizedPairs out;
    out.vectors.resize(n, dims);
    out.values.resize(dims);
    for (int k = 0; k < dims; ++k) {
        out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
        out.values[k] = solver.eigenvalues()[n - 1 - k];
    }
    const double scale = a.norm() + b.norm();
    for (int k = 0; k < dims; ++k) {
        const auto e = out.vectors.col(k);
        const double residual = (a * e - out.values[k] * (b * e)).norm() / e.norm();
        if (!std::isfinite(residual) || residual > kMaxRelativeResidual * scale) {
            std::ostringstream os;
            os << "generalized eigenpair " << k << " has residual " << residual;
            throw numeric_error(os.str());
        }
    }
    return out;
}

}  // namespace

std::vector<std::size_t> TrainingMatrix::class_counts() const
{
    std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(classes, 0)), 0);
    for (int l : labels) {
        if (l >= 0 && l < classes) {
            ++counts[static_cast<std::size_t>(l)];
        }
    }
    return counts;
}

void TrainingMatrix::check() const
{
    if (classes < 1) {
        throw parameter_error("class count must be positive");
    }
    if (labels.size() != rows()) {
        throw parameter_error("label count " + std::to_string(labels.size()) + " does not match " +
                              std::to_string(rows()) + " feature rows");
    }
    if (!features.allFinite()) {
        throw data_error("training features contain non-finite values");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw data_error("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                             " outside [0, " + std::to_string(classes) + ")");
        }
    }
    const auto counts = class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2) {
            throw data_error("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                             " training rows, need at least 2");
        }
    }
}

Eigen::VectorXd LinearProjectionModel::project(const Eigen::Ref<const Eigen::VectorXd>& f) const
{
    Eigen::VectorXd out(basis.rows());
    project_into(f, out);
    return out;
}

void LinearProjectionModel::project_into(const Eigen::Ref<const Eigen::VectorXd>& f,
                                         Eigen::Ref<Eigen::VectorXd> out) const
{
    if (f.size() != mean.size()) {
        throw parameter_error("projection input has length " + std::to_string(f.size()) + ", expected " +
                              std::to_string(mean.size()));
    }
    if (out.size() != basis.rows()) {
        throw parameter_error("projection output has wrong length");
    }
    for (Eigen::Index k = 0; k < basis.rows(); ++k) {
        double acc = 0.0;
        for (Eigen::Index h = 0; h < basis.cols(); ++h) {
            acc += (f[h] - mean[h]) * basis(k, h);
        }
        out[k] = acc;
    }
}

LinearProjectionModel train_linear_fisher(const TrainingMatrix& train, int dims, double ridge)
{
    train.check();
    check_dims(train, dims, train.dim());
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw parameter_error("fisher ridge must be finite and non-negative");
    }
    const auto stats = class_stats(train.features, train.labels, train.classes);
    const Eigen::MatrixXd resid = within_class_residuals(train.features, train.labels, stats.means);
    Eigen::MatrixXd sw = resid.transpose() * resid;
    const Eigen::MatrixXd sb = between_class_scatter(stats);

    const auto h = static_cast<double>(train.dim());
    sw.diagonal().array() += ridge * sw.trace() / h;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sw_eig(sw, Eigen::EigenvaluesOnly);
    const double lo = sw_eig.eigenvalues().minCoeff();
    const double hi = sw_eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) {
        std::ostringstream os;
        os << "regularized within-class scatter is singular (condition estimate "
           << (lo > 0.0 ? hi / lo : INFINITY) << ")";
        throw numeric_error(os.str());
    }

    auto pairs = top_generalized_pairs(sb, sw, dims);
    LinearProjectionModel model;
    model.mean = stats.global_mean;
    model.basis.resize(dims, train.features.cols());
    model.eigenvalues = pairs.values;
    for (int k = 0; k < dims; ++k) {
        Eigen::VectorXd e = pairs.vectors.col(k);
        e.normalize();
        fix_sign(e);
        model.basis.row(k) = e.transpose();
    }
    return model;
}

double median_pairwise_distance(const Eigen::MatrixXd& points)
{
    const auto n = points.rows();
    if (n < 2) {
        throw parameter_error("median distance needs at least 2 points");
    }
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            d.push_back((points.row(i) - points.row(j)).norm());
        }
    }
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(d.begin(), mid);
    return 0.5 * (lower + upper);
}

KernelProjectionModel::KernelProjectionModel(Eigen::MatrixXd support, double bandwidth,
                                             Eigen::MatrixXd coefficients, Eigen::VectorXd kernel_mean,
                                             Eigen::VectorXd eigenvalues)
    : support_(std::move(support)),
      bandwidth_(bandwidth),
      coefficients_(std::move(coefficients)),
      kernel_mean_(std::move(kernel_mean)),
      eigenvalues_(std::move(eigenvalues))
{
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
        throw parameter_error("kernel bandwidth must be positive");
    }
    if (coefficients_.cols() != support_.rows() || kernel_mean_.size() != support_.rows()) {
        throw parameter_error("kernel model dimensions are inconsistent");
    }
    if (eigenvalues_.size() != coefficients_.rows()) {
        throw parameter_error("kernel model eigenvalue count does not match output dimension");
    }
    offset_ = coefficients_ * kernel_mean_;
}

Eigen::VectorXd KernelProjectionModel::project(const Eigen::Ref<const Eigen::VectorXd>& f) const
{
    Eigen::VectorXd out(coefficients_.rows());
    project_into(f, out);
    return out;
}

void KernelProjectionModel::project_into(const Eigen::Ref<const Eigen::VectorXd>& f,
                                         Eigen::Ref<Eigen::VectorXd> out) const
{
    if (f.size() != support_.cols()) {
        throw parameter_error("projection input has length " + std::to_string(f.size()) + ", expected " +
                              std::to_string(support_.cols()));
    }
    if (out.size() != coefficients_.rows()) {
        throw parameter_error("projection output has wrong length");
    }
    const double inv_two_bw2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    out = -offset_;
    for (Eigen::Index i = 0; i < support_.rows(); ++i) {
        double d2 = 0.0;
        for (Eigen::Index h = 0; h < support_.cols(); ++h) {
            const double d = f[h] - support_(i, h);
            d2 += d * d;
        }
        out += std::exp(-d2 * inv_two_bw2) * coefficients_.col(i);
    }
}

KernelProjectionModel train_kernel_fisher(const TrainingMatrix& train, const KernelFisherOptions& opts)
{
    train.check();
    check_dims(train, opts.dims, train.rows());
    const auto& x = train.features;
    const auto j = x.rows();

    double bandwidth = 0.0;
    if (opts.bandwidth) {
        bandwidth = *opts.bandwidth;
        if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
            throw parameter_error("kernel bandwidth must be positive");
        }
    } else {
        bandwidth = median_pairwise_distance(x);
        if (!(bandwidth > 0.0)) {
            throw data_error("median pairwise distance is zero; set the kernel bandwidth explicitly");
        }
    }

    const double inv_two_bw2 = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd k(j, j);
    for (Eigen::Index a = 0; a < j; ++a) {
        k(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < j; ++b) {
            const double v = std::exp(-(x.row(a) - x.row(b)).squaredNorm() * inv_two_bw2);
            k(a, b) = v;
            k(b, a) = v;
        }
    }

    // K is symmetric, so treating its rows as samples gives the dual class means.
    const auto stats = class_stats(k, train.labels, train.classes);
    const Eigen::MatrixXd between = between_class_scatter(stats);
    const Eigen::MatrixXd resid = within_class_residuals(k, train.labels, stats.means);
    Eigen::MatrixXd within = resid.transpose() * resid;

    double reg = 0.0;
    if (opts.reg) {
        reg = *opts.reg;
    } else {
        if (!(opts.reg_scale > 0.0)) {
            throw parameter_error("kernel regularization scale must be positive");
        }
        reg = opts.reg_scale * within.trace() / static_cast<double>(j);
    }
    if (!(reg > 0.0) || !std::isfinite(reg)) {
        throw parameter_error("kernel regularization must be positive");
    }
    within.diagonal().array() += reg;

    auto pairs = top_generalized_pairs(between, within, opts.dims);
    Eigen::MatrixXd coeffs(opts.dims, j);
    // The solver normalizes a^T B a = 1; rescale so the per-sample within-class spread is O(1).
    const double scale = std::sqrt(static_cast<double>(j));
    for (int d = 0; d < opts.dims; ++d) {
        Eigen::VectorXd a = pairs.vectors.col(d) * scale;
        fix_sign(a);
        coeffs.row(d) = a.transpose();
    }
    return KernelProjectionModel(x, bandwidth, std::move(coeffs), stats.global_mean, pairs.values);
}

double trace_ratio(const Eigen::MatrixXd& points, const std::vector<int>& labels, int classes)
{
    const auto stats = class_stats(points, labels, classes);
    const double sb = between_class_scatter(stats).trace();
    const Eigen::MatrixXd resid = within_class_residuals(points, labels, stats.means);
    const double sw = resid.squaredNorm();
    if (sw <= 0.0) {
        return sb > 0.0 ? INFINITY : 0.0;
    }
    return sb / sw;
}

}  // namespace emgrt
