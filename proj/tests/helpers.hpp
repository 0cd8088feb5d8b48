#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "emgrt/random.hpp"

namespace emgrt::test {

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = scale * standard_normal(rng);
        }
    }
    return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale = 1.0)
{
    return random_matrix(rng, n, 1, scale).col(0);
}

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi)
{
    return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

inline double rel_err(double got, double want)
{
    const double denom = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / denom;
}

/// Error of a log-domain value, measured as the relative error of the quantity it is the log of.
/// Plain relative error is ill-conditioned when the log is close to zero.
inline double log_domain_err(double got, double want)
{
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Feature-vector comparison: relative error on IEMG and RSS, log-domain error on lnVAR.
inline double feature_err(std::size_t index, std::size_t channels, double got, double want)
{
    const bool log_block = index >= channels && index < 2 * channels;
    return log_block ? log_domain_err(got, want) : rel_err(got, want);
}

inline std::filesystem::path tmp_path(const std::string& name)
{
    return std::filesystem::path(EMGRT_TEST_TMPDIR) / name;
}

}  // namespace emgrt::test
