#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "emgrt/classifier.hpp"
#include "emgrt/features.hpp"
#include "emgrt/projection.hpp"
#include "emgrt/signal.hpp"

namespace emgrt {

/// The nine wrist-hand motions, with their stable integer encoding.
enum class MotionClass : int {
    HandOpen = 0,
    HandClose,
    WristFlexion,
    WristExtension,
    WristPronation,
    WristSupination,
    WristUlnarFlexion,
    WristRadialFlexion,
    Relaxation,
};

inline constexpr int kMotionCount = 9;

inline constexpr std::array<std::string_view, kMotionCount> kMotionNames = {
    "hand-open",       "hand-close",       "wrist-flexion",
    "wrist-extension", "wrist-pronation",  "wrist-supination",
    "wrist-ulnar-flexion", "wrist-radial-flexion", "relaxation",
};

std::string_view motion_name(MotionClass m);
std::optional<MotionClass> parse_motion(std::string_view name);
std::vector<std::string> default_class_names();

struct LabeledRecording {
    EmgRecording recording;
    int label = 0;
};

enum class ProjectionKind { Linear, Kernel };

std::string_view projection_kind_name(ProjectionKind kind);

struct PipelineConfig {
    std::size_t channels = kDefaultChannels;
    double sample_rate_hz = kDefaultSampleRateHz;
    WindowingConfig windowing;
    FeatureConfig features;

    ProjectionKind projection = ProjectionKind::Linear;
    int dims = kMotionCount - 1;
    double fisher_ridge = kDefaultFisherRidge;
    std::optional<double> kernel_bandwidth;
    std::optional<double> kernel_reg;
    double kernel_reg_scale = 1e-3;

    RbfConfig rbf;
    std::vector<std::string> class_names = default_class_names();

    int classes() const noexcept { return static_cast<int>(class_names.size()); }
    void check() const;
};

/// Per-feature standardization fitted on the training matrix.
struct FeatureScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static FeatureScaler fit(const Eigen::MatrixXd& features);
    void apply(Eigen::Ref<Eigen::VectorXd> f) const;
};

using ProjectionModel = std::variant<LinearProjectionModel, KernelProjectionModel>;

struct PipelineMetadata {
    std::uint64_t seed = 0;
    std::string version = "emgrt-1.0";
};

/// Scratch buffers for allocation-free evaluation.
struct EvalWorkspace {
    Eigen::VectorXd features;
    Eigen::VectorXd projected;
    Eigen::VectorXd hidden;
    Eigen::VectorXd scores;
};

/// Immutable bundle consumed by the evaluation phase.
class TrainedPipeline {
public:
    TrainedPipeline(PipelineConfig config, std::optional<FeatureScaler> scaler, ProjectionModel projection,
                    RbfModel classifier, PipelineMetadata metadata);

    const PipelineConfig& config() const noexcept { return config_; }
    const std::optional<FeatureScaler>& scaler() const noexcept { return scaler_; }
    const ProjectionModel& projection() const noexcept { return projection_; }
    const RbfModel& classifier() const noexcept { return classifier_; }
    const PipelineMetadata& metadata() const noexcept { return metadata_; }

    std::size_t feature_dim() const noexcept { return 3 * config_.channels; }
    std::size_t projected_dim() const;

    /// Features as the projection sees them (standardized when enabled).
    Eigen::VectorXd features(const SignalWindow& window) const;
    Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& features) const;

    EvalWorkspace make_workspace() const;

    /// extract -> project -> RBF scores -> argmax. Scores land in ws.scores.
    int evaluate_into(const Eigen::Ref<const Eigen::MatrixXd>& window, EvalWorkspace& ws) const;

    Prediction evaluate(const SignalWindow& window) const;

private:
    void check_window(const Eigen::Ref<const Eigen::MatrixXd>& window) const;

    PipelineConfig config_;
    std::optional<FeatureScaler> scaler_;
    ProjectionModel projection_;
    RbfModel classifier_;
    PipelineMetadata metadata_;
};

/// Segments every recording and stacks the feature vectors into G.
TrainingMatrix build_training_matrix(const std::vector<LabeledRecording>& recordings, const PipelineConfig& config);

TrainedPipeline train_pipeline(const std::vector<LabeledRecording>& recordings, const PipelineConfig& config,
                               std::uint64_t seed);

inline Prediction evaluate_window(const TrainedPipeline& pipe, const SignalWindow& window)
{
    return pipe.evaluate(window);
}

using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct EvaluationReport {
    std::vector<std::string> class_names;
    ConfusionMatrix confusion;  // rows: true class, columns: decided class
    std::vector<std::int64_t> counts;
    std::vector<std::optional<double>> class_accuracy_pct;  // empty when the class has no windows
    std::int64_t total_windows = 0;
    double total_accuracy_pct = 0.0;
};

EvaluationReport make_report(ConfusionMatrix confusion, std::vector<std::string> class_names);

using WindowClassifier = std::function<int(const SignalWindow&)>;

EvaluationReport evaluate_corpus(const WindowClassifier& classify, const std::vector<LabeledRecording>& recordings,
                                 const WindowingConfig& windowing, std::vector<std::string> class_names);

EvaluationReport evaluate_corpus(const TrainedPipeline& pipe, const std::vector<LabeledRecording>& recordings);

inline constexpr double kDefaultDeadlineMs = 128.0;
inline constexpr int kWarmupEvaluations = 10;

struct LatencyReport {
    std::vector<double> times_ms;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
    double max_ms = 0.0;
    double deadline_ms = kDefaultDeadlineMs;
    std::size_t misses = 0;
    std::size_t windows = 0;
    std::size_t repetitions = 0;
};

/// Nearest-rank statistics over `times_ms`; misses count times strictly above the deadline.
LatencyReport summarize_latency(std::vector<double> times_ms, double deadline_ms);

/// Times every evaluate() call after kWarmupEvaluations untimed ones.
LatencyReport bench_latency(const TrainedPipeline& pipe, const std::vector<SignalWindow>& windows,
                            double deadline_ms = kDefaultDeadlineMs, int repetitions = 1);

}  // namespace emgrt
