#include <doctest.h>

#include <cmath>
#include <vector>

#include "emgrt/error.hpp"
#include "emgrt/features.hpp"
#include "emgrt/oracle.hpp"
#include "emgrt/synthdata.hpp"
#include "helpers.hpp"

using namespace emgrt;
using namespace emgrt::synth;
using emgrt::test::rel_err;

namespace {

/// Mean and standard deviation of feature vectors over all windows of a recording.
std::pair<Eigen::VectorXd, Eigen::VectorXd> window_stats(const EmgRecording& rec, const WindowingConfig& w = {})
{
    const auto windows = segment(rec, w);
    Eigen::MatrixXd f(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(3 * rec.channels()));
    for (std::size_t i = 0; i < windows.size(); ++i) {
        f.row(static_cast<Eigen::Index>(i)) = extract(windows[i]).values().transpose();
    }
    const Eigen::VectorXd mean = f.colwise().mean().transpose();
    const Eigen::VectorXd sd =
        ((f.rowwise() - mean.transpose()).array().square().colwise().sum() / static_cast<double>(f.rows() - 1))
            .sqrt()
            .transpose();
    return {mean, sd};
}

}  // namespace

TEST_CASE("default profiles")
{
    const auto profiles = default_profiles();
    REQUIRE(profiles.size() == static_cast<std::size_t>(kMotionCount));
    for (const auto& p : profiles) {
        CHECK(p.channels() == kDefaultChannels);
        CHECK_NOTHROW(p.check());
    }
    const auto& relax = profiles[static_cast<std::size_t>(MotionClass::Relaxation)];
    CHECK(relax.gains.isZero(0.0));

    std::vector<Eigen::VectorXd> expected;
    for (const auto& p : profiles) {
        expected.push_back(expected_features(p, 50));
    }
    for (std::size_t a = 0; a < expected.size(); ++a) {
        for (std::size_t b = a + 1; b < expected.size(); ++b) {
            CHECK((expected[a] - expected[b]).norm() > 0.0);
        }
        if (a != static_cast<std::size_t>(MotionClass::Relaxation)) {
            CHECK(expected[a].head(kDefaultChannels).sum() > expected.back().head(kDefaultChannels).sum());
        }
    }
}

TEST_CASE("profile validation")
{
    ClassProfile p{Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2), 1.0};
    CHECK_THROWS_AS(p.check(), Error);
    p.noise_std = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(p.check(), Error);
    p.noise_std = Eigen::VectorXd::Ones(3);
    p.duty_cycle = 1.5;
    CHECK_THROWS_AS(p.check(), Error);
    p.duty_cycle = 0.5;
    p.gains[0] = -1.0;
    CHECK_THROWS_AS(p.check(), Error);
}

TEST_CASE("session shape and determinism")
{
    const auto profiles = default_profiles();
    const auto a = gen_session(MotionClass::WristFlexion, 5.0, 200.0, profiles[2], 77);
    CHECK(a.length() == 1000);
    CHECK(a.channels() == 8);
    CHECK(a.sample_rate_hz() == 200.0);
    CHECK(a.samples().allFinite());

    const auto b = gen_session(MotionClass::WristFlexion, 5.0, 200.0, profiles[2], 77);
    CHECK(a.samples() == b.samples());
    const auto c = gen_session(MotionClass::WristFlexion, 5.0, 200.0, profiles[2], 78);
    CHECK(a.samples() != c.samples());

    CHECK_THROWS_AS(gen_session(MotionClass::HandOpen, 0.0, 200.0, profiles[0], 1), Error);
    CHECK_THROWS_AS(gen_session(MotionClass::HandOpen, 1.0, -5.0, profiles[0], 1), Error);
}

TEST_CASE("corpus layout")
{
    const auto corpus = generate_corpus(seed_range(3, 2));
    REQUIRE(corpus.recordings.size() == 18);
    CHECK(corpus.session_seeds == std::vector<std::uint64_t>{3, 4});
    for (std::size_t i = 0; i < corpus.recordings.size(); ++i) {
        CHECK(corpus.recordings[i].label == static_cast<int>(i % 9));
    }
    const auto again = generate_corpus({4});
    CHECK(again.recordings[5].recording.samples() == corpus.recordings[9 + 5].recording.samples());
    CHECK(corpus.recordings[5].recording.samples() != corpus.recordings[9 + 5].recording.samples());
}

TEST_CASE("relaxation sits well below every active class in lnVAR")
{
    const auto corpus = generate_corpus(seed_range(0, 3));
    std::vector<Eigen::VectorXd> means(kMotionCount, Eigen::VectorXd::Zero(24));
    for (const auto& r : corpus.recordings) {
        means[static_cast<std::size_t>(r.label)] += window_stats(r.recording).first / 3.0;
    }
    const Eigen::VectorXd relax = means.back().segment(8, 8);
    for (int k = 0; k < kMotionCount - 1; ++k) {
        const Eigen::VectorXd active = means[static_cast<std::size_t>(k)].segment(8, 8);
        CHECK((active - relax).minCoeff() >= 2.0);
    }
}

TEST_CASE("class means are separated relative to within-class spread")
{
    const auto corpus = generate_corpus({11});
    std::vector<Eigen::VectorXd> mean, sd;
    for (const auto& r : corpus.recordings) {
        const auto [m, s] = window_stats(r.recording);
        mean.push_back(m);
        sd.push_back(s);
    }
    for (std::size_t a = 0; a < mean.size(); ++a) {
        for (std::size_t b = a + 1; b < mean.size(); ++b) {
            const double sep = (mean[a] - mean[b]).norm();
            const double spread = std::max(sd[a].norm(), sd[b].norm());
            CHECK(sep >= 5.0 * spread);
        }
    }
}

TEST_CASE("empirical features agree with the closed-form expectations")
{
    const auto profiles = default_profiles();
    for (int k = 0; k < kMotionCount; ++k) {
        const auto& p = profiles[static_cast<std::size_t>(k)];
        const auto rec = gen_session(static_cast<MotionClass>(k), 60.0, 200.0, p, 500 + static_cast<std::uint64_t>(k));
        const Eigen::VectorXd emp = window_stats(rec).first;
        const Eigen::VectorXd want = expected_features(p, 50);
        for (Eigen::Index h = 0; h < 8; ++h) {
            CHECK(rel_err(emp[h], want[h]) < 0.05);
            CHECK(std::abs(emp[8 + h] - want[8 + h]) < 0.15);
            CHECK(rel_err(emp[16 + h], want[16 + h]) < 0.05);
        }
    }
}

TEST_CASE("oracle feature spot checks")
{
    CHECK(oracle::rss({3.0, 4.0}) == 5.0);
    CHECK(oracle::iemg({-1.0, 2.0, -3.0}) == 6.0);
    CHECK(oracle::ln_var({1.0, 1.0, 1.0}, 1e-12) == std::log(1e-12));
    CHECK(oracle::ln_var({0.0, 2.0}, 1e-12) == doctest::Approx(std::log(2.0)));
}
