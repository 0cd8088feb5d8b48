#include "emgrt/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/QR>

#include "emgrt/error.hpp"
#include "emgrt/random.hpp"

namespace emgrt {

namespace {

constexpr double kMaxNormalResidual = 1e-8;

void check_input(const Eigen::Ref<const Eigen::VectorXd>& s, const RbfModel& model)
{
    if (s.size() != model.centers.cols()) {
        throw parameter_error("classifier input has length " + std::to_string(s.size()) + ", expected " +
                              std::to_string(model.centers.cols()));
    }
}

double squared_distance(const Eigen::MatrixXd& m, Eigen::Index row, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        const double d = x[k] - m(row, k);
        d2 += d * d;
    }
    return d2;
}

Eigen::Index nearest_center(const Eigen::MatrixXd& centers, const Eigen::Ref<const Eigen::VectorXd>& x,
                            double& best_d2)
{
    Eigen::Index best = 0;
    best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d2 = squared_distance(centers, c, x);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    return best;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int count, Rng& rng)
{
    const auto n = points.rows();
    Eigen::MatrixXd centers(count, points.cols());
    auto pick = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n));
    centers.row(0) = points.row(std::min(pick, n - 1));

    Eigen::VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2[i] = (points.row(i) - centers.row(0)).squaredNorm();
    }
    for (int c = 1; c < count; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = n - 1;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // every point already coincides with a center
            chosen = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n));
            chosen = std::min(chosen, n - 1);
        }
        centers.row(c) = points.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (points.row(i) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

}  // namespace

void RbfModel::check() const
{
    if (centers.rows() < 1) {
        throw parameter_error("RBF model needs at least one center");
    }
    if (widths.size() != centers.rows() || weights.cols() != centers.rows()) {
        throw parameter_error("RBF model node counts are inconsistent");
    }
    if (bias.size() != weights.rows()) {
        throw parameter_error("RBF bias length does not match class count");
    }
    if (!class_names.empty() && class_names.size() != static_cast<std::size_t>(weights.rows())) {
        throw parameter_error("RBF class name count does not match class count");
    }
    if ((widths.array() <= 0.0).any()) {
        throw parameter_error("RBF widths must be positive");
    }
    if (!centers.allFinite() || !widths.allFinite() || !weights.allFinite() || !bias.allFinite()) {
        throw numeric_error("RBF model has non-finite parameters");
    }
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return static_cast<int>(best);
}

void activations_into(const Eigen::Ref<const Eigen::VectorXd>& s, const RbfModel& model,
                      Eigen::Ref<Eigen::VectorXd> out)
{
    check_input(s, model);
    for (Eigen::Index j = 0; j < model.centers.rows(); ++j) {
        const double w = model.widths[j];
        out[j] = std::exp(-squared_distance(model.centers, j, s) / (2.0 * w * w));
    }
}

Eigen::VectorXd activations(const Eigen::Ref<const Eigen::VectorXd>& s, const RbfModel& model)
{
    Eigen::VectorXd out(model.centers.rows());
    activations_into(s, model, out);
    return out;
}

int predict_into(const RbfModel& model, const Eigen::Ref<const Eigen::VectorXd>& s,
                 Eigen::Ref<Eigen::VectorXd> hidden, Eigen::Ref<Eigen::VectorXd> scores)
{
    activations_into(s, model, hidden);
    scores.noalias() = model.weights * hidden;
    scores += model.bias;
    return argmax(scores);
}

Prediction predict(const RbfModel& model, const Eigen::Ref<const Eigen::VectorXd>& s)
{
    Eigen::VectorXd hidden(model.centers.rows());
    Prediction p;
    p.scores.resize(model.weights.rows());
    p.decided_class = predict_into(model, s, hidden, p.scores);
    return p;
}

Eigen::MatrixXd fit_centers(const Eigen::MatrixXd& points, int count, std::uint64_t seed)
{
    const auto n = points.rows();
    if (count < 1) {
        throw parameter_error("center count must be >= 1");
    }
    if (count > n) {
        throw parameter_error("center count " + std::to_string(count) + " exceeds " + std::to_string(n) +
                              " training points");
    }
    Rng rng(seed);
    Eigen::MatrixXd centers = kmeanspp_seed(points, count, rng);

    std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
    Eigen::VectorXd dist2(n);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double d2 = 0.0;
            const auto c = nearest_center(centers, points.row(i).transpose(), d2);
            changed = changed || assign[static_cast<std::size_t>(i)] != c;
            assign[static_cast<std::size_t>(i)] = c;
            dist2[i] = d2;
            inertia += d2;
        }
        if (!changed) {
            break;
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(count, points.cols());
        std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = assign[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++sizes[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < count; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
            } else {
                // empty cluster: move it onto the worst-served point
                Eigen::Index far = 0;
                dist2.maxCoeff(&far);
                centers.row(c) = points.row(far);
                dist2[far] = 0.0;
            }
        }

        const double rel = std::abs(prev_inertia - inertia) / std::max(inertia, std::numeric_limits<double>::min());
        if (rel < kKMeansTolerance) {
            break;
        }
        prev_inertia = inertia;
    }
    return centers;
}

Eigen::VectorXd fit_widths(const Eigen::MatrixXd& centers, const Eigen::MatrixXd* points)
{
    const auto m = centers.rows();
    Eigen::VectorXd widths(m);
    if (m == 1) {
        double diameter = 0.0;
        if (points != nullptr) {
            for (Eigen::Index i = 0; i < points->rows(); ++i) {
                for (Eigen::Index j = i + 1; j < points->rows(); ++j) {
                    diameter = std::max(diameter, (points->row(i) - points->row(j)).norm());
                }
            }
        }
        widths[0] = std::max(diameter, kMinWidth);
        return widths;
    }
    std::vector<double> d;
    for (Eigen::Index j = 0; j < m; ++j) {
        d.clear();
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k != j) {
                d.push_back((centers.row(j) - centers.row(k)).norm());
            }
        }
        const auto take = std::min<std::size_t>(2, d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < take; ++k) {
            sum += d[k];
        }
        widths[j] = std::max(sum / static_cast<double>(take), kMinWidth);
    }
    return widths;
}

OutputLayer fit_output_weights(const ScatterMatrix& data, const Eigen::MatrixXd& centers,
                               const Eigen::VectorXd& widths, double ridge, bool use_bias)
{
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw parameter_error("output ridge must be finite and non-negative");
    }
    if (data.classes < 1) {
        throw parameter_error("class count must be positive");
    }
    if (data.labels.size() != data.rows()) {
        throw parameter_error("label count does not match scatter rows");
    }
    const auto j = data.projected.rows();
    const auto m = centers.rows();
    const auto cols = m + (use_bias ? 1 : 0);

    RbfModel probe;
    probe.centers = centers;
    probe.widths = widths;
    Eigen::MatrixXd phi(j, cols);
    Eigen::VectorXd hidden(m);
    for (Eigen::Index i = 0; i < j; ++i) {
        activations_into(data.projected.row(i).transpose(), probe, hidden);
        phi.row(i).head(m) = hidden.transpose();
        if (use_bias) {
            phi(i, m) = 1.0;
        }
    }
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(j, data.classes);
    for (Eigen::Index i = 0; i < j; ++i) {
        const int label = data.labels[static_cast<std::size_t>(i)];
        if (label < 0 || label >= data.classes) {
            throw data_error("label " + std::to_string(label) + " out of range");
        }
        targets(i, label) = 1.0;
    }

    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
        if (qr.rank() < cols) {
            throw numeric_error("activation matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                " of " + std::to_string(cols) + "); use a positive ridge");
        }
    }

    Eigen::MatrixXd normal = phi.transpose() * phi;
    normal.diagonal().head(m).array() += ridge;
    const Eigen::MatrixXd rhs = phi.transpose() * targets;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
        throw numeric_error("normal equations could not be factorized");
    }
    Eigen::MatrixXd beta = ldlt.solve(rhs);
    beta += ldlt.solve(rhs - normal * beta);  // one step of iterative refinement

    const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
    const double residual = (normal * beta - rhs).norm() / scale;
    if (!std::isfinite(residual) || residual > kMaxNormalResidual) {
        std::ostringstream os;
        os << "normal-equation residual " << residual << " exceeds " << kMaxNormalResidual;
        throw numeric_error(os.str());
    }

    OutputLayer out;
    out.weights = beta.topRows(m).transpose();
    out.bias = use_bias ? Eigen::VectorXd(beta.row(m).transpose()) : Eigen::VectorXd::Zero(data.classes);
    return out;
}

RbfModel train_rbf(const ScatterMatrix& data, const RbfConfig& cfg, std::uint64_t seed,
                   std::vector<std::string> class_names)
{
    RbfModel model;
    model.centers = fit_centers(data.projected, cfg.centers, seed);
    model.widths = fit_widths(model.centers, &data.projected);
    auto layer = fit_output_weights(data, model.centers, model.widths, cfg.ridge, cfg.use_bias);
    model.weights = std::move(layer.weights);
    model.bias = std::move(layer.bias);
    model.class_names = std::move(class_names);
    model.check();
    return model;
}

}  // namespace emgrt
