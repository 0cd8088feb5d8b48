#include "emgrt/signal.hpp"

#include <cmath>
#include <sstream>

#include "emgrt/error.hpp"

namespace emgrt {

namespace {

constexpr std::size_t kMaxListedIssues = 10;

void check_rate(double rate, ValidationReport& report)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        std::ostringstream os;
        os << "sample rate must be positive and finite, got " << rate;
        report.issues.push_back({ValidationIssue::Kind::SampleRate, 0, 0, os.str()});
    }
}

void note_non_finite(std::size_t row, std::size_t ch, double value, ValidationReport& report)
{
    std::ostringstream os;
    os << "non-finite sample " << value << " at row " << row << ", channel " << ch;
    report.issues.push_back({ValidationIssue::Kind::NonFinite, row, ch, os.str()});
}

}  // namespace

std::string ValidationReport::summary() const
{
    if (ok()) {
        return "ok";
    }
    std::ostringstream os;
    os << issues.size() << " issue(s)";
    for (std::size_t i = 0; i < issues.size() && i < kMaxListedIssues; ++i) {
        os << "; " << issues[i].message;
    }
    if (issues.size() > kMaxListedIssues) {
        os << "; ...";
    }
    return os.str();
}

ValidationReport validate(std::span<const std::vector<double>> rows, std::size_t channels,
                          double sample_rate_hz)
{
    ValidationReport report;
    check_rate(sample_rate_hz, report);
    if (channels == 0) {
        report.issues.push_back({ValidationIssue::Kind::Shape, 0, 0, "channel count must be positive"});
    }
    if (rows.empty()) {
        report.issues.push_back({ValidationIssue::Kind::Empty, 0, 0, "recording has no samples"});
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != channels) {
            std::ostringstream os;
            os << "row " << r << " has " << row.size() << " channels, expected " << channels;
            report.issues.push_back({ValidationIssue::Kind::Shape, r, row.size(), os.str()});
            continue;
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) {
                note_non_finite(r, c, row[c], report);
            }
        }
    }
    return report;
}

ValidationReport validate(const Eigen::MatrixXd& samples, double sample_rate_hz)
{
    ValidationReport report;
    check_rate(sample_rate_hz, report);
    if (samples.cols() == 0) {
        report.issues.push_back({ValidationIssue::Kind::Shape, 0, 0, "channel count must be positive"});
    }
    if (samples.rows() == 0) {
        report.issues.push_back({ValidationIssue::Kind::Empty, 0, 0, "recording has no samples"});
    }
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < samples.cols(); ++c) {
            if (!std::isfinite(samples(r, c))) {
                note_non_finite(static_cast<std::size_t>(r), static_cast<std::size_t>(c), samples(r, c),
                                report);
            }
        }
    }
    return report;
}

EmgRecording::EmgRecording(Eigen::MatrixXd samples, double sample_rate_hz)
    : samples_(std::move(samples)), rate_hz_(sample_rate_hz)
{
    const auto report = validate(samples_, rate_hz_);
    if (!report.ok()) {
        throw data_error("invalid signal: " + report.summary());
    }
}

EmgRecording EmgRecording::from_rows(std::span<const std::vector<double>> rows, std::size_t channels,
                                     double sample_rate_hz)
{
    const auto report = validate(rows, channels, sample_rate_hz);
    if (!report.ok()) {
        throw data_error("invalid signal: " + report.summary());
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(channels));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < channels; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return EmgRecording(std::move(m), sample_rate_hz);
}

WindowingConfig WindowingConfig::from_ms(double window_ms, double stride_ms, double sample_rate_hz)
{
    if (!(window_ms > 0.0) || !(stride_ms > 0.0) || !(sample_rate_hz > 0.0)) {
        throw parameter_error("window, stride and sample rate must be positive");
    }
    WindowingConfig cfg;
    cfg.window_len_samples = static_cast<std::size_t>(std::llround(window_ms * sample_rate_hz / 1000.0));
    cfg.stride_samples = static_cast<std::size_t>(std::llround(stride_ms * sample_rate_hz / 1000.0));
    cfg.check();
    return cfg;
}

void WindowingConfig::check() const
{
    if (window_len_samples < 2) {
        throw parameter_error("window must span at least 2 samples, got " + std::to_string(window_len_samples));
    }
    if (stride_samples == 0 || stride_samples > window_len_samples) {
        throw parameter_error("stride must satisfy 0 < stride <= window (stride=" +
                              std::to_string(stride_samples) +
                              ", window=" + std::to_string(window_len_samples) + ")");
    }
}

std::size_t window_count(std::size_t length, const WindowingConfig& cfg)
{
    if (length < cfg.window_len_samples) {
        return 0;
    }
    return (length - cfg.window_len_samples) / cfg.stride_samples + 1;
}

std::vector<SignalWindow> segment(const EmgRecording& rec, const WindowingConfig& cfg)
{
    cfg.check();
    if (rec.length() < cfg.window_len_samples) {
        throw data_error("insufficient samples: recording has " + std::to_string(rec.length()) +
                         " samples, window needs " + std::to_string(cfg.window_len_samples));
    }
    const auto n = window_count(rec.length(), cfg);
    const auto len = static_cast<Eigen::Index>(cfg.window_len_samples);
    std::vector<SignalWindow> windows;
    windows.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto start = k * cfg.stride_samples;
        windows.push_back({rec.samples().middleRows(static_cast<Eigen::Index>(start), len), start});
    }
    return windows;
}

}  // namespace emgrt
