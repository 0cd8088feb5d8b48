#include "emgrt/synthdata.hpp"

#include <cmath>
#include <numbers>

#include "emgrt/error.hpp"
#include "emgrt/random.hpp"

namespace emgrt::synth {

namespace {

constexpr double kCoContraction = 0.1;
constexpr std::array<double, 3> kPeak = {1.0, 0.5, 0.25};

}  // namespace

void ClassProfile::check() const
{
    if (gains.size() == 0 || noise_std.size() != gains.size()) {
        throw parameter_error("profile gain and noise vectors must be non-empty and equal length");
    }
    if ((gains.array() < 0.0).any() || !gains.allFinite()) {
        throw parameter_error("profile gains must be finite and non-negative");
    }
    if ((noise_std.array() <= 0.0).any() || !noise_std.allFinite()) {
        throw parameter_error("profile noise std must be finite and positive");
    }
    if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) {
        throw parameter_error("duty cycle must lie in [0, 1]");
    }
}

std::vector<ClassProfile> default_profiles(std::size_t channels, double amplitude, double noise_std)
{
    if (channels == 0) {
        throw parameter_error("channel count must be positive");
    }
    const auto c = static_cast<Eigen::Index>(channels);
    std::vector<ClassProfile> profiles;
    profiles.reserve(kMotionCount);
    for (int k = 0; k < kMotionCount - 1; ++k) {
        ClassProfile p;
        p.gains = Eigen::VectorXd::Constant(c, kCoContraction * amplitude);
        for (std::size_t i = 0; i < kPeak.size(); ++i) {
            p.gains[static_cast<Eigen::Index>((static_cast<std::size_t>(k) + i) % channels)] += kPeak[i] * amplitude;
        }
        p.noise_std = Eigen::VectorXd::Constant(c, noise_std);
        p.duty_cycle = 1.0;
        profiles.push_back(std::move(p));
    }
    ClassProfile relax;
    relax.gains = Eigen::VectorXd::Zero(c);
    relax.noise_std = Eigen::VectorXd::Constant(c, noise_std);
    relax.duty_cycle = 0.0;
    profiles.push_back(std::move(relax));
    return profiles;
}

EmgRecording gen_session(MotionClass motion, double duration_s, double rate_hz, const ClassProfile& profile,
                         std::uint64_t seed)
{
    (void)motion;  // the profile carries everything class-specific
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
        throw parameter_error("session duration must be positive");
    }
    if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
        throw parameter_error("sample rate must be positive");
    }
    profile.check();
    const auto samples = static_cast<Eigen::Index>(std::llround(duration_s * rate_hz));
    if (samples < 2) {
        throw parameter_error("session shorter than two samples");
    }
    const auto c = static_cast<Eigen::Index>(profile.channels());
    const auto period = std::max<std::int64_t>(1, std::llround(rate_hz));
    const auto on_len = std::llround(profile.duty_cycle * static_cast<double>(period));

    Rng rng(seed);
    const auto phase = static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(period));
    Eigen::MatrixXd x(samples, c);
    for (Eigen::Index t = 0; t < samples; ++t) {
        const bool on = (static_cast<std::int64_t>(t) + phase) % period < on_len;
        for (Eigen::Index ch = 0; ch < c; ++ch) {
            const double burst = standard_normal(rng);
            const double noise = standard_normal(rng);
            x(t, ch) = (on ? profile.gains[ch] * burst : 0.0) + profile.noise_std[ch] * noise;
        }
    }
    return EmgRecording(std::move(x), rate_hz);
}

SyntheticCorpus generate_corpus(const std::vector<std::uint64_t>& session_seeds, const CorpusOptions& opts)
{
    if (opts.profiles.size() != static_cast<std::size_t>(kMotionCount)) {
        throw parameter_error("corpus generation needs one profile per motion class");
    }
    SyntheticCorpus corpus;
    corpus.session_seeds = session_seeds;
    corpus.recordings.reserve(session_seeds.size() * opts.profiles.size());
    for (const auto s : session_seeds) {
        for (int k = 0; k < kMotionCount; ++k) {
            const auto motion = static_cast<MotionClass>(k);
            auto rec = gen_session(motion, opts.duration_s, opts.rate_hz, opts.profiles[static_cast<std::size_t>(k)],
                                   derive_seed(s, static_cast<std::uint64_t>(k)));
            corpus.recordings.push_back({std::move(rec), k});
        }
    }
    return corpus;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count)
{
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) {
        seeds[i] = first + i;
    }
    return seeds;
}

Eigen::VectorXd expected_features(const ClassProfile& profile, std::size_t window_len)
{
    profile.check();
    const auto c = static_cast<Eigen::Index>(profile.channels());
    const double n = static_cast<double>(window_len);
    const double abs_mean = std::sqrt(2.0 / std::numbers::pi);
    Eigen::VectorXd f(3 * c);
    for (Eigen::Index ch = 0; ch < c; ++ch) {
        const double noise2 = profile.noise_std[ch] * profile.noise_std[ch];
        const double on2 = profile.gains[ch] * profile.gains[ch] + noise2;
        const double duty = profile.duty_cycle;
        f[ch] = n * abs_mean * (duty * std::sqrt(on2) + (1.0 - duty) * std::sqrt(noise2));
        const double power = duty * on2 + (1.0 - duty) * noise2;
        f[c + ch] = std::log(power);
        f[2 * c + ch] = std::sqrt(n * power);
    }
    return f;
}

}  // namespace emgrt::synth
