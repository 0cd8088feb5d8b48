#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace emgrt {

inline constexpr double kDefaultSampleRateHz = 200.0;
inline constexpr std::size_t kDefaultChannels = 8;

/// One problem found while checking a recording.
struct ValidationIssue {
    enum class Kind { NonFinite, Shape, SampleRate, Empty };

    Kind kind;
    std::size_t row = 0;
    std::size_t channel = 0;
    std::string message;
};

/// Outcome of validate(). Empty issue list means the recording is usable.
struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    std::string summary() const;
};

/// Checks raw row-major samples as they come off a parser or device buffer.
ValidationReport validate(std::span<const std::vector<double>> rows, std::size_t channels,
                          double sample_rate_hz);
ValidationReport validate(const Eigen::MatrixXd& samples, double sample_rate_hz);

/// Raw multichannel EMG. Rows are time steps, columns are channels.
/// Construction validates, so every instance is rectangular, finite and has a positive rate.
class EmgRecording {
public:
    explicit EmgRecording(Eigen::MatrixXd samples, double sample_rate_hz = kDefaultSampleRateHz);

    static EmgRecording from_rows(std::span<const std::vector<double>> rows, std::size_t channels,
                                  double sample_rate_hz = kDefaultSampleRateHz);

    const Eigen::MatrixXd& samples() const noexcept { return samples_; }
    std::size_t length() const noexcept { return static_cast<std::size_t>(samples_.rows()); }
    std::size_t channels() const noexcept { return static_cast<std::size_t>(samples_.cols()); }
    double sample_rate_hz() const noexcept { return rate_hz_; }

private:
    Eigen::MatrixXd samples_;
    double rate_hz_;
};

/// An N x c analysis window copied out of a recording.
struct SignalWindow {
    Eigen::MatrixXd data;
    std::size_t start_index = 0;

    std::size_t length() const noexcept { return static_cast<std::size_t>(data.rows()); }
    std::size_t channels() const noexcept { return static_cast<std::size_t>(data.cols()); }
};

struct WindowingConfig {
    std::size_t window_len_samples = 50;
    std::size_t stride_samples = 25;

    /// Converts millisecond durations at the given rate, rounding to the nearest sample.
    static WindowingConfig from_ms(double window_ms, double stride_ms, double sample_rate_hz);

    /// Throws a parameter error unless 0 < stride <= window and window >= 2.
    void check() const;

    bool operator==(const WindowingConfig&) const = default;
};

/// Number of windows segment() yields for a recording of `length` samples.
std::size_t window_count(std::size_t length, const WindowingConfig& cfg);

/// Half-open windows [k*stride, k*stride + N); the trailing partial window is dropped.
std::vector<SignalWindow> segment(const EmgRecording& rec, const WindowingConfig& cfg);

}  // namespace emgrt
