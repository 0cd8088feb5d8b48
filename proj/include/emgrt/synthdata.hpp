#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "emgrt/pipeline.hpp"
#include "emgrt/signal.hpp"

namespace emgrt::synth {

/// Identifies the generator so a corpus can be regenerated by another implementation.
inline constexpr std::string_view kGeneratorAlgorithm =
    "mt19937_64/splitmix64-stream-seeds/box-muller/v1";

/// Amplitude-modulated Gaussian noise model for one motion class.
struct ClassProfile {
    Eigen::VectorXd gains;      // per-channel burst amplitude, >= 0
    Eigen::VectorXd noise_std;  // per-channel background noise, > 0
    double duty_cycle = 1.0;    // fraction of each burst period the envelope is on

    std::size_t channels() const noexcept { return static_cast<std::size_t>(gains.size()); }
    void check() const;
};

inline constexpr double kDefaultAmplitude = 50.0;
inline constexpr double kDefaultNoiseStd = 1.0;
inline constexpr double kDefaultSessionSeconds = 5.0;

/// One profile per MotionClass, in encoding order. Each active motion drives a graded
/// three-channel pattern around the armband on top of a low co-contraction floor;
/// relaxation is background noise only.
std::vector<ClassProfile> default_profiles(std::size_t channels = kDefaultChannels,
                                           double amplitude = kDefaultAmplitude,
                                           double noise_std = kDefaultNoiseStd);

/// x[t, ch] = gain[ch] * env(t) * z1 + noise_std[ch] * z2 with z1, z2 ~ N(0, 1).
/// The envelope is a rectangular burst train with a one-second period and random phase.
EmgRecording gen_session(MotionClass motion, double duration_s, double rate_hz, const ClassProfile& profile,
                         std::uint64_t seed);

struct CorpusOptions {
    double duration_s = kDefaultSessionSeconds;
    double rate_hz = kDefaultSampleRateHz;
    std::vector<ClassProfile> profiles = default_profiles();
};

struct SyntheticCorpus {
    std::vector<LabeledRecording> recordings;
    std::vector<std::uint64_t> session_seeds;
};

/// One recording per (session seed, class), session-major. Each recording's stream seed is
/// derive_seed(session_seed, class_index).
SyntheticCorpus generate_corpus(const std::vector<std::uint64_t>& session_seeds, const CorpusOptions& opts = {});

/// Seeds first, first + 1, ..., first + count - 1.
std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

/// Closed-form per-window feature expectations for a profile with the envelope on for the given duty.
/// IEMG is exact; lnVAR and RSS use the first-order values ln(s^2) and sqrt(N) s.
Eigen::VectorXd expected_features(const ClassProfile& profile, std::size_t window_len);

}  // namespace emgrt::synth
