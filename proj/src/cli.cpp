#include "emgrt/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "emgrt/error.hpp"
#include "emgrt/io.hpp"
#include "emgrt/pipeline.hpp"
#include "emgrt/synthdata.hpp"

namespace emgrt::cli {

namespace {

struct GenOptions {
    std::uint64_t seed = 0;
    std::size_t sessions = 10;
    double duration_s = synth::kDefaultSessionSeconds;
    double rate_hz = kDefaultSampleRateHz;
    std::string out;
};

struct TrainOptions {
    std::string dataset;
    std::string out;
    double window_ms = 250.0;
    double stride_ms = 125.0;
    std::optional<std::size_t> window_samples;
    std::optional<std::size_t> stride_samples;
    std::string projection = "linear";
    int dims = kMotionCount - 1;
    std::optional<double> gamma;
    std::optional<double> reg;
    int centers = kDefaultCenters;
    double ridge = kDefaultOutputRidge;
    bool no_bias = false;
    bool zscore = false;
    std::uint64_t seed = 0;
};

struct EvalOptions {
    std::string dataset;
    std::string model;
    std::string out;
};

struct BenchOptions {
    std::string model;
    std::string dataset;
    std::size_t windows = 10000;
    int repetitions = 1;
    double deadline_ms = kDefaultDeadlineMs;
    std::uint64_t seed = 0;
    std::string out;
};

std::string command_line(const std::vector<std::string>& args)
{
    std::string s;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i != 0) {
            s += ' ';
        }
        s += args[i];
    }
    return s;
}

// Writes to the file when a path is given, otherwise to `fallback`.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write)
{
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw data_error("cannot write " + path);
    }
    write(f);
    if (!f) {
        throw data_error("failed while writing " + path);
    }
}

void run_gen(const GenOptions& o, const std::vector<std::string>& args, std::ostream& out)
{
    synth::CorpusOptions opts;
    opts.duration_s = o.duration_s;
    opts.rate_hz = o.rate_hz;
    const auto corpus = synth::generate_corpus(synth::seed_range(o.seed, o.sessions), opts);
    std::vector<std::string> comments = {
        "generator=" + std::string(synth::kGeneratorAlgorithm),
        "seed=" + std::to_string(o.seed) + " sessions=" + std::to_string(o.sessions),
        "command: " + command_line(args),
    };
    io::save_dataset(o.out, corpus.recordings, default_class_names(), comments);
    out << "wrote " << corpus.recordings.size() << " recordings to " << o.out << '\n';
}

void run_train(const TrainOptions& o, std::ostream& out)
{
    const auto ds = io::load_dataset(o.dataset);
    PipelineConfig cfg;
    cfg.channels = ds.channels;
    cfg.sample_rate_hz = ds.sample_rate_hz;
    cfg.windowing = WindowingConfig::from_ms(o.window_ms, o.stride_ms, ds.sample_rate_hz);
    if (o.window_samples) {
        cfg.windowing.window_len_samples = *o.window_samples;
    }
    if (o.stride_samples) {
        cfg.windowing.stride_samples = *o.stride_samples;
    }
    cfg.windowing.check();
    cfg.features.zscore = o.zscore;
    cfg.projection = o.projection == "kernel" ? ProjectionKind::Kernel : ProjectionKind::Linear;
    cfg.dims = o.dims;
    if (o.reg) {
        if (cfg.projection == ProjectionKind::Linear) {
            cfg.fisher_ridge = *o.reg;
        } else {
            cfg.kernel_reg_scale = *o.reg;
        }
    }
    cfg.kernel_bandwidth = o.gamma;
    cfg.rbf.centers = o.centers;
    cfg.rbf.ridge = o.ridge;
    cfg.rbf.use_bias = !o.no_bias;

    const auto pipe = train_pipeline(ds.recordings, cfg, o.seed);
    io::save_model(pipe, o.out);
    out << "trained " << projection_kind_name(cfg.projection) << " pipeline (window=" << cfg.windowing.window_len_samples
        << " stride=" << cfg.windowing.stride_samples << " p=" << cfg.dims << " M=" << cfg.rbf.centers
        << " seed=" << o.seed << ") -> " << o.out << '\n';
}

void run_eval(const EvalOptions& o, const std::vector<std::string>& args, std::ostream& out)
{
    const auto pipe = io::load_model(o.model);
    const auto ds = io::load_dataset(o.dataset, pipe.config().class_names);
    const auto report = evaluate_corpus(pipe, ds.recordings);
    const std::vector<std::string> provenance = {
        "command: " + command_line(args),
        "model_seed=" + std::to_string(pipe.metadata().seed),
    };
    emit(o.out, out, [&](std::ostream& os) { io::write_evaluation_report(os, report, provenance); });
    if (!o.out.empty()) {
        out << "total accuracy " << report.total_accuracy_pct << "% over " << report.total_windows
            << " windows -> " << o.out << '\n';
    }
}

void run_bench(const BenchOptions& o, const std::vector<std::string>& args, std::ostream& out)
{
    const auto pipe = io::load_model(o.model);
    if (o.windows == 0) {
        throw parameter_error("--windows must be positive");
    }
    std::vector<LabeledRecording> recordings;
    if (!o.dataset.empty()) {
        recordings = io::load_dataset(o.dataset, pipe.config().class_names).recordings;
    } else {
        synth::CorpusOptions opts;
        opts.rate_hz = pipe.config().sample_rate_hz;
        opts.profiles = synth::default_profiles(pipe.config().channels);
        recordings = synth::generate_corpus(synth::seed_range(o.seed, 1), opts).recordings;
    }
    std::vector<SignalWindow> pool;
    for (const auto& r : recordings) {
        auto w = segment(r.recording, pipe.config().windowing);
        pool.insert(pool.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    std::vector<SignalWindow> windows;
    windows.reserve(o.windows);
    for (std::size_t i = 0; i < o.windows; ++i) {
        windows.push_back(pool[i % pool.size()]);
    }
    const auto report = bench_latency(pipe, windows, o.deadline_ms, o.repetitions);
    const std::vector<std::string> provenance = {
        "command: " + command_line(args),
        "seed=" + std::to_string(o.seed) + " model_seed=" + std::to_string(pipe.metadata().seed),
    };
    emit(o.out, out, [&](std::ostream& os) { io::write_latency_report(os, report, provenance); });
    if (!o.out.empty()) {
        out << "p99 " << report.p99_ms << " ms, " << report.misses << " deadline misses -> " << o.out << '\n';
    }
}

void run_predict(const EvalOptions& o, std::ostream& out)
{
    const auto pipe = io::load_model(o.model);
    const auto ds = io::load_dataset(o.dataset, pipe.config().class_names);
    const auto& names = pipe.config().class_names;
    emit(o.out, out, [&](std::ostream& os) {
        os << "recording,start_index,label,decided\n";
        auto ws = pipe.make_workspace();
        for (std::size_t r = 0; r < ds.recordings.size(); ++r) {
            const auto& rec = ds.recordings[r];
            for (const auto& w : segment(rec.recording, pipe.config().windowing)) {
                const int decided = pipe.evaluate_into(w.data, ws);
                os << r << ',' << w.start_index << ',' << names[static_cast<std::size_t>(rec.label)] << ','
                   << names[static_cast<std::size_t>(decided)] << '\n';
            }
        }
    });
}

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Parameter:
        return kUsage;
    case ErrorKind::Data:
    case ErrorKind::Format:
        return kDataError;
    case ErrorKind::Numeric:
        return kNumericError;
    }
    return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"EMG wrist-hand motion recognition: synthesize, train, evaluate, benchmark", "emgrt"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a seeded synthetic 9-motion corpus");
    gen_cmd->add_option("--seed", gen.seed, "First session seed")->capture_default_str();
    gen_cmd->add_option("--sessions", gen.sessions, "Number of sessions (seeds seed..seed+n-1)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--duration-s", gen.duration_s, "Seconds per motion per session")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--rate-hz", gen.rate_hz, "Sample rate")->capture_default_str()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a pipeline and write a model file");
    train_cmd->add_option("--dataset", train.dataset, "Training dataset")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train.out, "Output model path")->required();
    train_cmd->add_option("--window-ms", train.window_ms, "Window length in ms")->capture_default_str();
    train_cmd->add_option("--stride-ms", train.stride_ms, "Window stride in ms")->capture_default_str();
    train_cmd->add_option("--window-samples", train.window_samples, "Window length in samples (overrides ms)");
    train_cmd->add_option("--stride-samples", train.stride_samples, "Stride in samples (overrides ms)");
    train_cmd->add_option("--projection", train.projection, "Projection kind")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "kernel"}));
    train_cmd->add_option("--dims", train.dims, "Projected dimension p")->capture_default_str();
    train_cmd->add_option("--gamma", train.gamma, "Kernel bandwidth (default: median pairwise distance)");
    train_cmd->add_option("--reg", train.reg, "Projection regularization scale (default 1e-3)");
    train_cmd->add_option("--centers", train.centers, "RBF hidden nodes M")->capture_default_str();
    train_cmd->add_option("--ridge", train.ridge, "RBF output ridge")->capture_default_str();
    train_cmd->add_flag("--no-bias", train.no_bias, "Drop the RBF output bias");
    train_cmd->add_flag("--zscore", train.zscore, "Standardize features before projection");
    train_cmd->add_option("--seed", train.seed, "k-means seed")->capture_default_str();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a model on a labeled dataset");
    eval_cmd->add_option("--dataset", eval.dataset, "Labeled dataset")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--model", eval.model, "Model file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval.out, "Report path (default: stdout)");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure per-window evaluation latency");
    bench_cmd->add_option("--model", bench.model, "Model file")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--dataset", bench.dataset, "Window source (default: synthetic session)")
        ->check(CLI::ExistingFile);
    bench_cmd->add_option("--windows", bench.windows, "Timed windows per repetition")->capture_default_str();
    bench_cmd->add_option("--repetitions", bench.repetitions, "Passes over the windows")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--deadline-ms", bench.deadline_ms, "Real-time deadline")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Seed for synthetic windows")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "Report path (default: stdout)");

    EvalOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Stream per-window decisions for a dataset");
    predict_cmd->add_option("--dataset", predict.dataset, "Dataset")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--model", predict.model, "Model file")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--out", predict.out, "Output path (default: stdout)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (gen_cmd->parsed()) {
            run_gen(gen, args, out);
        } else if (train_cmd->parsed()) {
            run_train(train, out);
        } else if (eval_cmd->parsed()) {
            run_eval(eval, args, out);
        } else if (bench_cmd->parsed()) {
            run_bench(bench, args, out);
        } else if (predict_cmd->parsed()) {
            run_predict(predict, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}

}  // namespace emgrt::cli
