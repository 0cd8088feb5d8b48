#include "emgrt/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emgrt/error.hpp"

namespace emgrt {

FeatureVector::FeatureVector(Eigen::VectorXd values, std::size_t channels)
    : values_(std::move(values)), channels_(channels)
{
    if (static_cast<std::size_t>(values_.size()) != kBlocks * channels_) {
        throw parameter_error("feature vector length " + std::to_string(values_.size()) +
                              " does not match 3 x " + std::to_string(channels_) + " channels");
    }
}

double iemg(std::span<const double> channel)
{
    if (channel.empty()) {
        throw data_error("iemg: empty channel");
    }
    double sum = 0.0;
    for (double x : channel) {
        sum += std::abs(x);
    }
    return sum;
}

double ln_var(std::span<const double> channel, double variance_floor)
{
    if (channel.size() < 2) {
        throw data_error("ln_var: need at least 2 samples, got " + std::to_string(channel.size()));
    }
    double mean = 0.0;
    for (double x : channel) {
        mean += x;
    }
    mean /= static_cast<double>(channel.size());
    double ss = 0.0;
    for (double x : channel) {
        const double d = x - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(channel.size() - 1);
    return std::log(std::max(variance_floor, var));
}

double rss(std::span<const double> channel)
{
    if (channel.empty()) {
        throw data_error("rss: empty channel");
    }
    double ss = 0.0;
    for (double x : channel) {
        ss += x * x;
    }
    return std::sqrt(ss);
}

void extract_into(const Eigen::Ref<const Eigen::MatrixXd>& window, double variance_floor,
                  Eigen::Ref<Eigen::VectorXd> out)
{
    const auto c = window.cols();
    const auto n = static_cast<std::size_t>(window.rows());
    if (out.size() != 3 * c) {
        throw parameter_error("feature output has length " + std::to_string(out.size()) + ", expected " +
                              std::to_string(3 * c));
    }
    for (Eigen::Index ch = 0; ch < c; ++ch) {
        // Eigen matrices are column-major with inner stride 1, so each channel is contiguous.
        const std::span<const double> samples(window.col(ch).data(), n);
        try {
            out[ch] = iemg(samples);
            out[c + ch] = ln_var(samples, variance_floor);
            out[2 * c + ch] = rss(samples);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (channel " + std::to_string(ch) + ")");
        }
    }
}

FeatureVector extract(const SignalWindow& window, const FeatureConfig& cfg)
{
    Eigen::VectorXd values(3 * window.data.cols());
    extract_into(window.data, cfg.variance_floor, values);
    return {std::move(values), window.channels()};
}

}  // namespace emgrt
