#pragma once

// Naive reference implementations used to cross-check the main modules. Everything here is
// written as plain loops over std::vector and shares no code with the library proper.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace emgrt::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

Mat to_rows(const Eigen::MatrixXd& m);
Vec to_vec(const Eigen::VectorXd& v);

double iemg(const Vec& x);
/// Variance through the all-pairs identity sum_{i<j} (x_i - x_j)^2 / (N (N - 1)).
double ln_var(const Vec& x, double variance_floor);
double rss(const Vec& x);

/// Block-major [IEMG | lnVAR | RSS] of an N x c window.
Vec feature_vector(const Mat& window, double variance_floor);

/// (f - mean) * basis^T with basis given as p rows.
Vec project(const Vec& mean, const Mat& basis, const Vec& f);

/// sum_i coeffs[.][i] * (exp(-|f - support_i|^2 / (2 bw^2)) - kernel_mean[i]).
Vec kernel_project(const Mat& support, double bandwidth, const Mat& coeffs, const Vec& kernel_mean, const Vec& f);

Vec activations(const Mat& centers, const Vec& widths, const Vec& s);

struct Decision {
    Vec scores;
    int decided = 0;
};

Decision predict(const Mat& centers, const Vec& widths, const Mat& weights, const Vec& bias, const Vec& s);

/// Gauss-Jordan elimination with partial pivoting; solves A X = B column by column.
Mat solve(Mat a, Mat b);

/// Closed-form two-class Fisher direction S_w^{-1} (mu_1 - mu_0), labels in {0, 1}.
Vec fisher_direction(const Mat& x, const std::vector<int>& labels);

}  // namespace emgrt::oracle
