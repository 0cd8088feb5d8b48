#include "emgrt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "emgrt/error.hpp"

namespace emgrt {

std::string_view motion_name(MotionClass m)
{
    return kMotionNames.at(static_cast<std::size_t>(m));
}

std::optional<MotionClass> parse_motion(std::string_view name)
{
    for (std::size_t i = 0; i < kMotionNames.size(); ++i) {
        if (kMotionNames[i] == name) {
            return static_cast<MotionClass>(i);
        }
    }
    return std::nullopt;
}

std::vector<std::string> default_class_names()
{
    return {kMotionNames.begin(), kMotionNames.end()};
}

std::string_view projection_kind_name(ProjectionKind kind)
{
    return kind == ProjectionKind::Linear ? "linear" : "kernel";
}

void PipelineConfig::check() const
{
    if (channels == 0) {
        throw parameter_error("channel count must be positive");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw parameter_error("sample rate must be positive");
    }
    windowing.check();
    if (class_names.empty()) {
        throw parameter_error("at least one class name is required");
    }
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        for (std::size_t j = i + 1; j < class_names.size(); ++j) {
            if (class_names[i] == class_names[j]) {
                throw parameter_error("duplicate class name '" + class_names[i] + "'");
            }
        }
    }
    if (!(features.variance_floor > 0.0)) {
        throw parameter_error("variance floor must be positive");
    }
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& features)
{
    FeatureScaler s;
    s.mean = features.colwise().mean().transpose();
    s.scale.resize(features.cols());
    const double denom = std::max<double>(1.0, static_cast<double>(features.rows() - 1));
    for (Eigen::Index h = 0; h < features.cols(); ++h) {
        const double sd = std::sqrt((features.col(h).array() - s.mean[h]).square().sum() / denom);
        s.scale[h] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

void FeatureScaler::apply(Eigen::Ref<Eigen::VectorXd> f) const
{
    f = ((f - mean).array() / scale.array()).matrix();
}

TrainedPipeline::TrainedPipeline(PipelineConfig config, std::optional<FeatureScaler> scaler,
                                 ProjectionModel projection, RbfModel classifier, PipelineMetadata metadata)
    : config_(std::move(config)),
      scaler_(std::move(scaler)),
      projection_(std::move(projection)),
      classifier_(std::move(classifier)),
      metadata_(std::move(metadata))
{
    config_.check();
    classifier_.check();
    const auto [in, out] = std::visit([](const auto& m) { return std::pair{m.input_dim(), m.output_dim()}; },
                                      projection_);
    if (in != feature_dim()) {
        throw parameter_error("projection expects " + std::to_string(in) + " features, pipeline produces " +
                              std::to_string(feature_dim()));
    }
    if (out != classifier_.input_dim()) {
        throw parameter_error("projection output dimension " + std::to_string(out) +
                              " does not match classifier input " + std::to_string(classifier_.input_dim()));
    }
    if (classifier_.classes() != config_.class_names.size()) {
        throw parameter_error("classifier has " + std::to_string(classifier_.classes()) + " classes, config names " +
                              std::to_string(config_.class_names.size()));
    }
    if (config_.features.zscore != scaler_.has_value()) {
        throw parameter_error("feature standardization flag and scaler presence disagree");
    }
    if (scaler_ && (static_cast<std::size_t>(scaler_->mean.size()) != feature_dim() ||
                    static_cast<std::size_t>(scaler_->scale.size()) != feature_dim())) {
        throw parameter_error("feature scaler has wrong dimension");
    }
}

std::size_t TrainedPipeline::projected_dim() const
{
    return std::visit([](const auto& m) { return m.output_dim(); }, projection_);
}

Eigen::VectorXd TrainedPipeline::features(const SignalWindow& window) const
{
    check_window(window.data);
    Eigen::VectorXd f(static_cast<Eigen::Index>(feature_dim()));
    extract_into(window.data, config_.features.variance_floor, f);
    if (scaler_) {
        scaler_->apply(f);
    }
    return f;
}

Eigen::VectorXd TrainedPipeline::project(const Eigen::Ref<const Eigen::VectorXd>& features) const
{
    return std::visit([&](const auto& m) { return m.project(features); }, projection_);
}

EvalWorkspace TrainedPipeline::make_workspace() const
{
    EvalWorkspace ws;
    ws.features.resize(static_cast<Eigen::Index>(feature_dim()));
    ws.projected.resize(static_cast<Eigen::Index>(projected_dim()));
    ws.hidden.resize(static_cast<Eigen::Index>(classifier_.nodes()));
    ws.scores.resize(static_cast<Eigen::Index>(classifier_.classes()));
    return ws;
}

void TrainedPipeline::check_window(const Eigen::Ref<const Eigen::MatrixXd>& window) const
{
    if (static_cast<std::size_t>(window.rows()) != config_.windowing.window_len_samples ||
        static_cast<std::size_t>(window.cols()) != config_.channels) {
        throw parameter_error("window is " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) +
                              ", pipeline expects " + std::to_string(config_.windowing.window_len_samples) + "x" +
                              std::to_string(config_.channels));
    }
    if (!window.allFinite()) {
        throw data_error("invalid signal: window contains non-finite samples");
    }
}

int TrainedPipeline::evaluate_into(const Eigen::Ref<const Eigen::MatrixXd>& window, EvalWorkspace& ws) const
{
    check_window(window);
    extract_into(window, config_.features.variance_floor, ws.features);
    if (scaler_) {
        scaler_->apply(ws.features);
    }
    std::visit([&](const auto& m) { m.project_into(ws.features, ws.projected); }, projection_);
    return predict_into(classifier_, ws.projected, ws.hidden, ws.scores);
}

Prediction TrainedPipeline::evaluate(const SignalWindow& window) const
{
    auto ws = make_workspace();
    Prediction p;
    p.decided_class = evaluate_into(window.data, ws);
    p.scores = std::move(ws.scores);
    return p;
}

TrainingMatrix build_training_matrix(const std::vector<LabeledRecording>& recordings, const PipelineConfig& config)
{
    config.check();
    std::size_t total = 0;
    for (const auto& r : recordings) {
        if (r.recording.channels() != config.channels) {
            throw data_error("recording has " + std::to_string(r.recording.channels()) + " channels, expected " +
                             std::to_string(config.channels));
        }
        if (r.recording.sample_rate_hz() != config.sample_rate_hz) {
            throw data_error("recording sample rate " + std::to_string(r.recording.sample_rate_hz()) +
                             " Hz differs from configured " + std::to_string(config.sample_rate_hz) + " Hz");
        }
        if (r.label < 0 || r.label >= config.classes()) {
            throw data_error("recording label " + std::to_string(r.label) + " is not a configured class");
        }
        total += window_count(r.recording.length(), config.windowing);
    }

    TrainingMatrix g;
    g.classes = config.classes();
    g.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(3 * config.channels));
    g.labels.reserve(total);
    Eigen::VectorXd f(g.features.cols());
    Eigen::Index row = 0;
    for (const auto& r : recordings) {
        const auto n = window_count(r.recording.length(), config.windowing);
        for (std::size_t k = 0; k < n; ++k) {
            const auto start = static_cast<Eigen::Index>(k * config.windowing.stride_samples);
            extract_into(r.recording.samples().middleRows(start,
                                                          static_cast<Eigen::Index>(config.windowing.window_len_samples)),
                         config.features.variance_floor, f);
            g.features.row(row++) = f.transpose();
            g.labels.push_back(r.label);
        }
    }
    return g;
}

TrainedPipeline train_pipeline(const std::vector<LabeledRecording>& recordings, const PipelineConfig& config,
                               std::uint64_t seed)
{
    TrainingMatrix g = build_training_matrix(recordings, config);
    const auto counts = g.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2) {
            throw data_error("class '" + config.class_names[c] + "' has " + std::to_string(counts[c]) +
                             " training windows, need at least 2");
        }
    }

    std::optional<FeatureScaler> scaler;
    if (config.features.zscore) {
        scaler = FeatureScaler::fit(g.features);
        for (Eigen::Index i = 0; i < g.features.rows(); ++i) {
            Eigen::VectorXd row = g.features.row(i).transpose();
            scaler->apply(row);
            g.features.row(i) = row.transpose();
        }
    }

    ProjectionModel projection;
    ScatterMatrix d;
    if (config.projection == ProjectionKind::Linear) {
        auto model = train_linear_fisher(g, config.dims, config.fisher_ridge);
        d = make_scatter(model, g);
        projection = std::move(model);
    } else {
        KernelFisherOptions opts;
        opts.dims = config.dims;
        opts.bandwidth = config.kernel_bandwidth;
        opts.reg = config.kernel_reg;
        opts.reg_scale = config.kernel_reg_scale;
        auto model = train_kernel_fisher(g, opts);
        d = make_scatter(model, g);
        projection = std::move(model);
    }

    RbfModel rbf = train_rbf(d, config.rbf, seed, config.class_names);
    return TrainedPipeline(config, std::move(scaler), std::move(projection), std::move(rbf),
                           PipelineMetadata{seed, PipelineMetadata{}.version});
}

EvaluationReport make_report(ConfusionMatrix confusion, std::vector<std::string> class_names)
{
    const auto v = static_cast<Eigen::Index>(class_names.size());
    if (confusion.rows() != v || confusion.cols() != v) {
        throw parameter_error("confusion matrix must be square over the class set");
    }
    EvaluationReport r;
    r.class_names = std::move(class_names);
    r.confusion = std::move(confusion);
    std::int64_t correct = 0;
    for (Eigen::Index c = 0; c < v; ++c) {
        const std::int64_t n = r.confusion.row(c).sum();
        r.counts.push_back(n);
        r.total_windows += n;
        correct += r.confusion(c, c);
        if (n > 0) {
            r.class_accuracy_pct.emplace_back(100.0 * static_cast<double>(r.confusion(c, c)) / static_cast<double>(n));
        } else {
            r.class_accuracy_pct.emplace_back(std::nullopt);
        }
    }
    r.total_accuracy_pct =
        r.total_windows > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(r.total_windows) : 0.0;
    return r;
}

EvaluationReport evaluate_corpus(const WindowClassifier& classify, const std::vector<LabeledRecording>& recordings,
                                 const WindowingConfig& windowing, std::vector<std::string> class_names)
{
    if (recordings.empty()) {
        throw data_error("evaluation corpus is empty");
    }
    const auto v = static_cast<Eigen::Index>(class_names.size());
    ConfusionMatrix confusion = ConfusionMatrix::Zero(v, v);
    for (const auto& r : recordings) {
        if (r.label < 0 || r.label >= v) {
            throw data_error("recording label " + std::to_string(r.label) + " is not a configured class");
        }
        for (const auto& w : segment(r.recording, windowing)) {
            const int decided = classify(w);
            if (decided < 0 || decided >= v) {
                throw numeric_error("classifier returned out-of-range class " + std::to_string(decided));
            }
            ++confusion(r.label, decided);
        }
    }
    return make_report(std::move(confusion), std::move(class_names));
}

EvaluationReport evaluate_corpus(const TrainedPipeline& pipe, const std::vector<LabeledRecording>& recordings)
{
    auto ws = pipe.make_workspace();
    const WindowClassifier classify = [&](const SignalWindow& w) { return pipe.evaluate_into(w.data, ws); };
    return evaluate_corpus(classify, recordings, pipe.config().windowing, pipe.config().class_names);
}

LatencyReport summarize_latency(std::vector<double> times_ms, double deadline_ms)
{
    if (times_ms.empty()) {
        throw parameter_error("latency summary needs at least one timing");
    }
    LatencyReport r;
    r.deadline_ms = deadline_ms;
    r.times_ms = std::move(times_ms);
    std::vector<double> sorted = r.times_ms;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const auto rank = [&](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        return sorted[std::clamp<std::size_t>(k, 1, n) - 1];
    };
    r.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    r.p95_ms = rank(0.95);
    r.p99_ms = rank(0.99);
    r.max_ms = sorted.back();
    r.misses = static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(),
                                                      [&](double t) { return t > deadline_ms; }));
    return r;
}

LatencyReport bench_latency(const TrainedPipeline& pipe, const std::vector<SignalWindow>& windows,
                            double deadline_ms, int repetitions)
{
    if (windows.empty()) {
        throw parameter_error("latency benchmark needs at least one window");
    }
    if (repetitions < 1) {
        throw parameter_error("repetitions must be >= 1");
    }
    using Clock = std::chrono::steady_clock;
    volatile int sink = 0;
    for (int i = 0; i < kWarmupEvaluations; ++i) {
        sink = sink + pipe.evaluate(windows[static_cast<std::size_t>(i) % windows.size()]).decided_class;
    }
    std::vector<double> times;
    times.reserve(windows.size() * static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
        for (const auto& w : windows) {
            const auto t0 = Clock::now();
            const auto p = pipe.evaluate(w);
            const auto t1 = Clock::now();
            sink = sink + p.decided_class;
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }
    auto report = summarize_latency(std::move(times), deadline_ms);
    report.windows = windows.size();
    report.repetitions = static_cast<std::size_t>(repetitions);
    return report;
}

}  // namespace emgrt
