#include "emgrt/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace emgrt::oracle {

Mat to_rows(const Eigen::MatrixXd& m)
{
    Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

Vec to_vec(const Eigen::VectorXd& v)
{
    Vec out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[static_cast<std::size_t>(i)] = v[i];
    }
    return out;
}

double iemg(const Vec& x)
{
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        s += x[t] < 0.0 ? -x[t] : x[t];
    }
    return s;
}

double ln_var(const Vec& x, double variance_floor)
{
    const std::size_t n = x.size();
    double pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs += (x[i] - x[j]) * (x[i] - x[j]);
        }
    }
    double var = pairs / (static_cast<double>(n) * static_cast<double>(n - 1));
    if (var < variance_floor) {
        var = variance_floor;
    }
    return std::log(var);
}

double rss(const Vec& x)
{
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        s += x[t] * x[t];
    }
    return std::sqrt(s);
}

Vec feature_vector(const Mat& window, double variance_floor)
{
    const std::size_t n = window.size();
    const std::size_t c = n == 0 ? 0 : window[0].size();
    Vec f(3 * c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        Vec col(n);
        for (std::size_t t = 0; t < n; ++t) {
            col[t] = window[t][ch];
        }
        f[ch] = iemg(col);
        f[c + ch] = ln_var(col, variance_floor);
        f[2 * c + ch] = rss(col);
    }
    return f;
}

Vec project(const Vec& mean, const Mat& basis, const Vec& f)
{
    Vec out(basis.size(), 0.0);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        for (std::size_t h = 0; h < f.size(); ++h) {
            out[k] += (f[h] - mean[h]) * basis[k][h];
        }
    }
    return out;
}

Vec kernel_project(const Mat& support, double bandwidth, const Mat& coeffs, const Vec& kernel_mean, const Vec& f)
{
    Vec out(coeffs.size(), 0.0);
    for (std::size_t i = 0; i < support.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t h = 0; h < f.size(); ++h) {
            d2 += (f[h] - support[i][h]) * (f[h] - support[i][h]);
        }
        const double k = std::exp(-d2 / (2.0 * bandwidth * bandwidth));
        for (std::size_t d = 0; d < coeffs.size(); ++d) {
            out[d] += coeffs[d][i] * (k - kernel_mean[i]);
        }
    }
    return out;
}

Vec activations(const Mat& centers, const Vec& widths, const Vec& s)
{
    Vec psi(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            d2 += (s[k] - centers[j][k]) * (s[k] - centers[j][k]);
        }
        psi[j] = std::exp(-d2 / (2.0 * widths[j] * widths[j]));
    }
    return psi;
}

Decision predict(const Mat& centers, const Vec& widths, const Mat& weights, const Vec& bias, const Vec& s)
{
    const Vec psi = activations(centers, widths, s);
    Decision d;
    d.scores.assign(weights.size(), 0.0);
    for (std::size_t c = 0; c < weights.size(); ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < psi.size(); ++j) {
            acc += weights[c][j] * psi[j];
        }
        d.scores[c] = acc + bias[c];
    }
    for (std::size_t c = 1; c < d.scores.size(); ++c) {
        if (d.scores[c] > d.scores[static_cast<std::size_t>(d.decided)]) {
            d.decided = static_cast<int>(c);
        }
    }
    return d;
}

Mat solve(Mat a, Mat b)
{
    const std::size_t n = a.size();
    const std::size_t m = b.empty() ? 0 : b[0].size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        if (a[piv][col] == 0.0) {
            throw std::runtime_error("oracle solve: singular matrix");
        }
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        const double p = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= p;
        }
        for (std::size_t k = 0; k < m; ++k) {
            b[col][k] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0.0) {
                continue;
            }
            const double f = a[r][col];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[col][k];
            }
            for (std::size_t k = 0; k < m; ++k) {
                b[r][k] -= f * b[col][k];
            }
        }
    }
    return b;
}

Vec fisher_direction(const Mat& x, const std::vector<int>& labels)
{
    const std::size_t dim = x.empty() ? 0 : x[0].size();
    Vec mu[2] = {Vec(dim, 0.0), Vec(dim, 0.0)};
    double n[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int l = labels[i];
        for (std::size_t d = 0; d < dim; ++d) {
            mu[l][d] += x[i][d];
        }
        n[l] += 1.0;
    }
    for (int l = 0; l < 2; ++l) {
        for (std::size_t d = 0; d < dim; ++d) {
            mu[l][d] /= n[l];
        }
    }
    Mat sw(dim, Vec(dim, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec& m = mu[labels[i]];
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) {
                sw[a][b] += (x[i][a] - m[a]) * (x[i][b] - m[b]);
            }
        }
    }
    Mat rhs(dim, Vec(1));
    for (std::size_t d = 0; d < dim; ++d) {
        rhs[d][0] = mu[1][d] - mu[0][d];
    }
    const Mat sol = solve(sw, rhs);
    Vec w(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        w[d] = sol[d][0];
    }
    return w;
}

}  // namespace emgrt::oracle
