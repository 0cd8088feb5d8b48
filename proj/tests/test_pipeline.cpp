#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "emgrt/error.hpp"
#include "emgrt/pipeline.hpp"
#include "emgrt/synthdata.hpp"
#include "helpers.hpp"

using namespace emgrt;

namespace {

const std::vector<LabeledRecording>& train_corpus()
{
    static const auto corpus = synth::generate_corpus(synth::seed_range(0, 10)).recordings;
    return corpus;
}

const TrainedPipeline& trained()
{
    static const auto pipe = train_pipeline(train_corpus(), PipelineConfig{}, 1);
    return pipe;
}

std::vector<SignalWindow> all_windows(const std::vector<LabeledRecording>& recs, std::vector<int>* labels = nullptr)
{
    std::vector<SignalWindow> out;
    for (const auto& r : recs) {
        for (auto& w : segment(r.recording, WindowingConfig{})) {
            out.push_back(std::move(w));
            if (labels) {
                labels->push_back(r.label);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("training matrix shape")
{
    const auto g = build_training_matrix(train_corpus(), PipelineConfig{});
    CHECK(g.features.cols() == 24);
    CHECK(g.features.rows() == 90 * 39);
    CHECK(g.classes == 9);
    for (auto n : g.class_counts()) {
        CHECK(n == 390);
    }
}

TEST_CASE("trained pipeline fits its training data")
{
    const auto& pipe = trained();
    CHECK(pipe.feature_dim() == 24);
    CHECK(pipe.projected_dim() == 8);
    CHECK(pipe.classifier().centers.rows() == 14);
    CHECK(pipe.classifier().weights.rows() == 9);
    const auto report = evaluate_corpus(pipe, train_corpus());
    CHECK(report.total_accuracy_pct >= 99.0);
}

TEST_CASE("held-out sessions")
{
    const auto test = synth::generate_corpus(synth::seed_range(10, 10)).recordings;
    const auto report = evaluate_corpus(trained(), test);
    CHECK(report.total_accuracy_pct >= 95.0);
    for (const auto& acc : report.class_accuracy_pct) {
        REQUIRE(acc.has_value());
        CHECK(*acc >= 90.0);
    }
}

TEST_CASE("kernel pipeline")
{
    PipelineConfig cfg;
    cfg.projection = ProjectionKind::Kernel;
    const auto corpus = synth::generate_corpus(synth::seed_range(0, 3)).recordings;
    const auto pipe = train_pipeline(corpus, cfg, 2);
    CHECK(pipe.projected_dim() == 8);
    const auto test = synth::generate_corpus(synth::seed_range(30, 3)).recordings;
    CHECK(evaluate_corpus(pipe, test).total_accuracy_pct >= 95.0);
}

TEST_CASE("evaluate_window is the composition of its stages")
{
    const auto& pipe = trained();
    const auto windows = all_windows({train_corpus().begin(), train_corpus().begin() + 9});
    for (std::size_t i = 0; i < windows.size(); i += 7) {
        const auto& w = windows[i];
        const Eigen::VectorXd f = pipe.features(w);
        const Eigen::VectorXd s = pipe.project(f);
        const auto manual = predict(pipe.classifier(), s);
        const auto got = evaluate_window(pipe, w);
        REQUIRE(got.scores == manual.scores);
        REQUIRE(got.decided_class == manual.decided_class);
    }
}

TEST_CASE("all-zero window yields finite scores")
{
    const SignalWindow w{Eigen::MatrixXd::Zero(50, 8), 0};
    const auto p = evaluate_window(trained(), w);
    CHECK(p.scores.allFinite());
    CHECK(p.decided_class >= 0);
    CHECK(p.decided_class < 9);
}

TEST_CASE("window shape is checked")
{
    CHECK_THROWS_AS(evaluate_window(trained(), SignalWindow{Eigen::MatrixXd::Zero(40, 8), 0}), Error);
    CHECK_THROWS_AS(evaluate_window(trained(), SignalWindow{Eigen::MatrixXd::Zero(50, 7), 0}), Error);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(50, 8);
    bad(3, 3) = NAN;
    CHECK_THROWS_AS(evaluate_window(trained(), SignalWindow{bad, 0}), Error);
}

TEST_CASE("property: random fresh windows classify correctly")
{
    const auto& pipe = trained();
    const auto profiles = synth::default_profiles();
    Rng rng(99);
    int correct = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const int k = static_cast<int>(test::uniform_int(rng, 0, 8));
        const auto rec =
            synth::gen_session(static_cast<MotionClass>(k), 0.25, 200.0, profiles[static_cast<std::size_t>(k)], rng());
        correct += evaluate_window(pipe, SignalWindow{rec.samples(), 0}).decided_class == k;
    }
    CHECK(correct >= 190);
}

TEST_CASE("evaluation reports")
{
    SUBCASE("perfect classifier")
    {
        const auto corpus = synth::generate_corpus({5}).recordings;
        std::vector<int> labels;
        const auto windows = all_windows(corpus, &labels);
        std::size_t idx = 0;
        const auto r = evaluate_corpus([&](const SignalWindow&) { return labels[idx++]; }, corpus, WindowingConfig{},
                                       default_class_names());
        CHECK(r.total_accuracy_pct == 100.0);
        CHECK(r.total_windows == static_cast<std::int64_t>(windows.size()));
        CHECK(r.confusion.trace() == r.confusion.sum());
        for (const auto& a : r.class_accuracy_pct) {
            CHECK(a == 100.0);
        }
    }
    SUBCASE("constant classifier on a single class")
    {
        const auto corpus = synth::generate_corpus({5}).recordings;
        const std::vector<LabeledRecording> one{corpus[3]};
        const auto r = evaluate_corpus([](const SignalWindow&) { return 3; }, one, WindowingConfig{},
                                       default_class_names());
        CHECK(r.total_accuracy_pct == 100.0);
        CHECK(r.class_accuracy_pct[3] == 100.0);
        CHECK_FALSE(r.class_accuracy_pct[0].has_value());
        CHECK(r.counts[3] == 39);
    }
    SUBCASE("total accuracy is trace over sum")
    {
        Rng rng(7);
        for (int t = 0; t < 100; ++t) {
            ConfusionMatrix c(4, 4);
            for (Eigen::Index i = 0; i < 16; ++i) {
                c(i / 4, i % 4) = static_cast<std::int64_t>(test::uniform_int(rng, 0, 20));
            }
            c(0, 0) += 1;
            const auto r = make_report(c, {"a", "b", "c", "d"});
            CHECK(r.total_accuracy_pct ==
                  doctest::Approx(100.0 * static_cast<double>(c.trace()) / static_cast<double>(c.sum())));
            CHECK(r.total_windows == c.sum());
        }
    }
    SUBCASE("empty corpus")
    {
        CHECK_THROWS_AS(evaluate_corpus(trained(), {}), Error);
    }
}

TEST_CASE("latency summary")
{
    const auto r = summarize_latency({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}, 0.0);
    CHECK(r.misses == 10);
    CHECK(r.mean_ms == doctest::Approx(5.5));
    CHECK(r.p95_ms == 10.0);
    CHECK(r.p99_ms == 10.0);
    CHECK(r.max_ms == 10.0);
    CHECK(summarize_latency({1.0, 2.0}, 2.0).misses == 0);
    CHECK_THROWS_AS(summarize_latency({}, 1.0), Error);
    CHECK_THROWS_AS(bench_latency(trained(), {}), Error);

    const auto windows = all_windows({train_corpus()[0]});
    const auto bench = bench_latency(trained(), windows, 0.0);
    CHECK(bench.windows == windows.size());
    CHECK(bench.times_ms.size() == windows.size());
    CHECK(bench.misses == windows.size());
}

TEST_CASE("training errors")
{
    auto corpus = synth::generate_corpus({1}).recordings;
    SUBCASE("a class without enough windows is named")
    {
        corpus.erase(corpus.begin() + 4);
        try {
            train_pipeline(corpus, PipelineConfig{}, 0);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("wrist-pronation") != std::string::npos);
        }
    }
    SUBCASE("empty corpus")
    {
        CHECK_THROWS_AS(train_pipeline({}, PipelineConfig{}, 0), Error);
    }
    SUBCASE("bad configuration")
    {
        PipelineConfig cfg;
        cfg.dims = 0;
        CHECK_THROWS_AS(train_pipeline(corpus, cfg, 0), Error);
        cfg = {};
        cfg.windowing.stride_samples = 0;
        CHECK_THROWS_AS(train_pipeline(corpus, cfg, 0), Error);
    }
}

TEST_CASE("training is deterministic")
{
    const auto corpus = synth::generate_corpus({2}).recordings;
    const auto a = train_pipeline(corpus, PipelineConfig{}, 5);
    const auto b = train_pipeline(corpus, PipelineConfig{}, 5);
    CHECK(a.classifier().centers == b.classifier().centers);
    CHECK(a.classifier().weights == b.classifier().weights);
}

TEST_CASE("concurrent evaluation matches sequential")
{
    const auto& pipe = trained();
    const auto windows = all_windows({train_corpus().begin(), train_corpus().begin() + 9});
    std::vector<int> sequential;
    for (const auto& w : windows) {
        sequential.push_back(evaluate_window(pipe, w).decided_class);
    }
    std::vector<std::vector<int>> results(4);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < results.size(); ++t) {
        threads.emplace_back([&, t] {
            auto ws = pipe.make_workspace();
            for (const auto& w : windows) {
                results[t].push_back(pipe.evaluate_into(w.data, ws));
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    for (const auto& r : results) {
        CHECK(r == sequential);
    }
}

TEST_CASE("latency statistics are stable when repetitions double")
{
    const auto windows = all_windows({train_corpus().begin(), train_corpus().begin() + 9});
    const auto once = bench_latency(trained(), windows, kDefaultDeadlineMs, 1);
    const auto twice = bench_latency(trained(), windows, kDefaultDeadlineMs, 2);
    CHECK(once.times_ms.size() == windows.size());
    CHECK(twice.times_ms.size() == 2 * windows.size());
    CHECK(twice.repetitions == 2);
    CHECK(std::abs(twice.mean_ms - once.mean_ms) <= 0.5 * once.mean_ms);
}
