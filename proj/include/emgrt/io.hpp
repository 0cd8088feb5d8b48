#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "emgrt/pipeline.hpp"

namespace emgrt::io {

inline constexpr std::string_view kModelMagic = "EMGRT-MODEL";
inline constexpr int kModelVersion = 1;

/// Lowercase hexadecimal floating point with a 0x prefix, e.g. "0x1.9p+7" or "-0x0p+0".
std::string format_hex(double value);
/// Inverse of format_hex. Throws a format error on anything else, including inf and nan.
double parse_hex(std::string_view text);

// ---------------------------------------------------------------------------
// Dataset table
//
//   # <free comment lines>
//   # rate_hz=<value> channels=<c>
//   timestamp_index,ch1,...,chc,label
//   0,<x>,...,<x>,hand-open
//   ...
//
// timestamp_index strictly increases; each contiguous run of one label is one recording.

struct Dataset {
    double sample_rate_hz = kDefaultSampleRateHz;
    std::size_t channels = kDefaultChannels;
    std::vector<LabeledRecording> recordings;
};

Dataset read_dataset(std::istream& in, const std::vector<std::string>& class_names = default_class_names(),
                     std::string_view source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path,
                     const std::vector<std::string>& class_names = default_class_names());

void write_dataset(std::ostream& out, const std::vector<LabeledRecording>& recordings,
                   const std::vector<std::string>& class_names = default_class_names(),
                   const std::vector<std::string>& comments = {});
void save_dataset(const std::filesystem::path& path, const std::vector<LabeledRecording>& recordings,
                  const std::vector<std::string>& class_names = default_class_names(),
                  const std::vector<std::string>& comments = {});

// ---------------------------------------------------------------------------
// Model file: "EMGRT-MODEL v1", then [meta] [windowing] [features] [scaler]? [projection]
// [classifier] sections of key=value lines and a final [end]. Reals are hex floats, arrays
// are written as name[rows x cols]=v v v ... in row-major order, and every section closes
// with values=<number of reals in the section>.

std::string serialize_model(const TrainedPipeline& pipe);
TrainedPipeline parse_model(std::string_view text);

void save_model(const TrainedPipeline& pipe, const std::filesystem::path& path);
TrainedPipeline load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports. Lines starting with '#' carry provenance (seed, flags); the rest is CSV.

void write_evaluation_report(std::ostream& out, const EvaluationReport& report,
                             const std::vector<std::string>& provenance = {});
void write_latency_report(std::ostream& out, const LatencyReport& report,
                          const std::vector<std::string>& provenance = {});

}  // namespace emgrt::io
