#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trendlab/experiment.hpp"

namespace {

using namespace trendlab;

namespace fs = std::filesystem;

void atomic_write_file(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

BarSeries load_bars(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_ohlcv_csv(in, &std::cerr);
}

struct SynthFlags {
    std::string kind = "gbm";
    std::size_t length = 500;
    double start = 100.0;
    double drift = 0.0;
    double volatility = 0.01;
    std::size_t segment_length = 60;
    double amplitude = 10.0;
    double period = 50.0;
    double base_volume = 1.0e6;

    SyntheticSpec to_spec() const {
        SyntheticSpec spec;
        spec.kind = synthetic_kind_from_string(kind);
        spec.length = length;
        spec.start = start;
        spec.drift = drift;
        spec.volatility = volatility;
        spec.segment_length = segment_length;
        spec.amplitude = amplitude;
        spec.period = period;
        spec.base_volume = base_volume;
        return spec;
    }
};

void add_synth_flags(CLI::App* cmd, SynthFlags& flags, bool require_kind) {
    auto* kind = cmd->add_option("--kind", flags.kind, "gbm, regime_switch or sinusoid");
    if (require_kind) kind->required();
    cmd->add_option("--length", flags.length, "number of bars");
    cmd->add_option("--start", flags.start, "initial price level");
    cmd->add_option("--drift", flags.drift, "per-step log drift");
    cmd->add_option("--volatility", flags.volatility, "per-step log-return stddev");
    cmd->add_option("--segment-length", flags.segment_length,
                    "bars per regime (regime_switch)");
    cmd->add_option("--amplitude", flags.amplitude, "sinusoid amplitude");
    cmd->add_option("--period", flags.period, "sinusoid period in bars");
    cmd->add_option("--base-volume", flags.base_volume, "base traded volume");
}

struct TrainFlags {
    std::string scaler = "ecdf";
    std::string mode = "full_manifest";
    std::string manifest;
    double train_fraction = 0.9;
    std::size_t min_trend_length = 10;
    bool filter_eval = false;
    bool paper_faithful = false;
    bool shuffle_folds = false;
    std::size_t jobs = 1;

    AeTrainConfig ae;
    RbmTrainConfig rbm;
    std::string ae_loss = "cross_entropy";
    std::string svm_kernel = "rbf";
    double svm_c = 1.0;
    double svm_gamma = -1.0;
    double svm_tol = 1e-3;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
    cmd->add_option("--scaler", flags.scaler, "minmax or ecdf");
    cmd->add_option("--mode", flags.mode, "full_manifest or crossovers");
    cmd->add_option("--manifest", flags.manifest, "custom indicator manifest file");
    cmd->add_option("--train-fraction", flags.train_fraction,
                    "chronological holdout train fraction");
    cmd->add_option("--min-trend-length", flags.min_trend_length,
                    "minimum run length for eligible trends");
    cmd->add_flag("--filter-eval", flags.filter_eval,
                  "apply the trend filter to evaluation rows too");
    cmd->add_flag("--paper-faithful", flags.paper_faithful,
                  "fit scaler and reducer on all rows, not the training split");
    cmd->add_option("--jobs", flags.jobs, "concurrent (size, fold) runs");

    cmd->add_option("--ae-lr", flags.ae.learning_rate, "AE learning rate");
    cmd->add_option("--ae-decay", flags.ae.decay_rate, "AE learning-rate decay per epoch");
    cmd->add_option("--ae-batch", flags.ae.batch_size, "AE mini-batch size");
    cmd->add_option("--ae-epochs", flags.ae.max_epochs, "AE max epochs");
    cmd->add_option("--ae-patience", flags.ae.patience, "AE early-stopping patience");
    cmd->add_option("--ae-corruption", flags.ae.corruption_level,
                    "denoising corruption level");
    cmd->add_option("--ae-loss", flags.ae_loss, "cross_entropy or squared");

    cmd->add_option("--rbm-lr", flags.rbm.learning_rate, "RBM learning rate");
    cmd->add_option("--rbm-decay", flags.rbm.decay_rate, "RBM learning-rate decay");
    cmd->add_option("--rbm-batch", flags.rbm.batch_size, "RBM mini-batch size");
    cmd->add_option("--rbm-epochs", flags.rbm.max_epochs, "RBM max epochs");
    cmd->add_option("--rbm-patience", flags.rbm.patience, "RBM early-stopping patience");
    cmd->add_option("--rbm-k", flags.rbm.gibbs_steps, "Gibbs steps per PCD update");

    cmd->add_option("--svm-kernel", flags.svm_kernel, "linear or rbf");
    cmd->add_option("--svm-c", flags.svm_c, "soft-margin C");
    cmd->add_option("--svm-gamma", flags.svm_gamma, "rbf gamma (<0 means 1/features)");
    cmd->add_option("--svm-tol", flags.svm_tol, "KKT stopping tolerance");
}

ExperimentConfig make_config(const TrainFlags& flags, const std::string& data,
                             const SynthFlags* synth, std::uint64_t seed) {
    ExperimentConfig config;
    config.csv_path = data;
    if (data.empty()) {
        if (synth == nullptr) throw std::runtime_error("no data source: pass --data");
        config.synthetic = synth->to_spec();
    }
    config.feature_mode = feature_mode_from_string(flags.mode);
    config.manifest_path = flags.manifest;
    config.scaler = scaler_kind_from_string(flags.scaler);
    config.train_fraction = flags.train_fraction;
    config.min_trend_length = flags.min_trend_length;
    config.filter_eval = flags.filter_eval;
    config.paper_faithful = flags.paper_faithful;
    config.shuffle_folds = flags.shuffle_folds;
    config.ae = flags.ae;
    config.ae.loss = ae_loss_from_string(flags.ae_loss);
    config.rbm = flags.rbm;
    config.svm.kernel = svm_kernel_from_string(flags.svm_kernel);
    config.svm.c = flags.svm_c;
    config.svm.gamma = flags.svm_gamma;
    config.svm.tolerance = flags.svm_tol;
    config.seed = seed;
    return config;
}

std::vector<Reducer> parse_reducers(const std::string& text) {
    if (text == "both") return {Reducer::ae, Reducer::rbm};
    return {reducer_from_string(text)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trend prediction pipeline: indicators, scaling, feature reduction, SVM"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags (--seed, --config) may follow the subcommand
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "flat key = value config file; flags win over the file");

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "master seed; every run derives from it")
        ->envname("TRENDLAB_SEED");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic OHLCV CSV");
    SynthFlags synth_flags;
    add_synth_flags(synth_cmd, synth_flags, true);
    std::string synth_out;
    synth_cmd->add_option("--out", synth_out, "output CSV path")->required();

    // features
    auto* features_cmd = app.add_subcommand("features", "compute a feature matrix CSV");
    std::string features_data, features_out, features_mode = "full_manifest";
    std::string features_manifest;
    bool no_price_volume = false;
    features_cmd->add_option("--data", features_data, "OHLCV CSV input")->required();
    features_cmd->add_option("--out", features_out, "feature CSV output")->required();
    features_cmd->add_option("--mode", features_mode, "full_manifest or crossovers");
    features_cmd->add_option("--manifest", features_manifest,
                             "custom indicator manifest file");
    features_cmd->add_flag("--no-price-volume", no_price_volume,
                           "omit the adjusted close and volume columns");

    // label
    auto* label_cmd = app.add_subcommand("label", "assign trend labels to a bar series");
    std::string label_data, label_out;
    std::size_t label_min_length = 10;
    label_cmd->add_option("--data", label_data, "OHLCV CSV input")->required();
    label_cmd->add_option("--out", label_out, "label CSV output")->required();
    label_cmd->add_option("--min-length", label_min_length,
                          "minimum eligible trend length");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "hidden-size sweep plus baseline");
    std::string sweep_data, sweep_reducer = "both", sweep_out_dir = "report";
    std::vector<std::size_t> sweep_sizes;
    TrainFlags sweep_train;
    SynthFlags sweep_synth;
    sweep_cmd->add_option("--data", sweep_data, "OHLCV CSV input");
    add_synth_flags(sweep_cmd, sweep_synth, false);
    sweep_cmd->add_option("--reducer", sweep_reducer, "ae, rbm, both or none");
    sweep_cmd->add_option("--sizes", sweep_sizes, "hidden sizes to sweep")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out-dir", sweep_out_dir, "report output directory");
    add_train_flags(sweep_cmd, sweep_train);

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "k-fold cross validation");
    std::string cv_data, cv_reducer = "both", cv_out_dir = "report";
    std::size_t cv_k = 10, cv_hidden_ae = 50, cv_hidden_rbm = 25;
    TrainFlags cv_train;
    SynthFlags cv_synth;
    cv_cmd->add_option("--data", cv_data, "OHLCV CSV input");
    add_synth_flags(cv_cmd, cv_synth, false);
    cv_cmd->add_option("--k", cv_k, "number of folds");
    cv_cmd->add_option("--reducer", cv_reducer, "ae, rbm, both or none");
    cv_cmd->add_option("--hidden-ae", cv_hidden_ae, "AE code size");
    cv_cmd->add_option("--hidden-rbm", cv_hidden_rbm, "RBM hidden units");
    cv_cmd->add_option("--out-dir", cv_out_dir, "report output directory");
    cv_cmd->add_flag("--shuffle-folds", cv_train.shuffle_folds,
                     "shuffle rows before folding instead of chronological folds");
    add_train_flags(cv_cmd, cv_train);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) {
            const BarSeries bars =
                generate_synthetic(synth_flags.to_spec(), mix_seed(seed, 0x5f17));
            std::ostringstream out;
            write_ohlcv_csv(bars, out);
            atomic_write_file(synth_out, out.str());
            std::cout << "wrote " << bars.size() << " bars to " << synth_out << "\n";
        } else if (features_cmd->parsed()) {
            const BarSeries bars = load_bars(features_data);
            FeatureMatrix features = [&] {
                if (feature_mode_from_string(features_mode) == FeatureMode::crossovers) {
                    std::vector<std::size_t> fast(11), slow(11);
                    std::iota(fast.begin(), fast.end(), std::size_t{5});
                    std::iota(slow.begin(), slow.end(), std::size_t{20});
                    return build_crossover_features(fast, slow, bars);
                }
                std::vector<IndicatorSpec> manifest;
                if (features_manifest.empty()) {
                    manifest = default_manifest();
                } else {
                    std::ifstream in(features_manifest);
                    if (!in)
                        throw std::runtime_error("cannot open " + features_manifest);
                    std::stringstream buffer;
                    buffer << in.rdbuf();
                    manifest = parse_manifest(buffer.str());
                }
                return build_indicator_matrix(manifest, bars, !no_price_volume);
            }();
            std::ostringstream out;
            features.write_csv(out);
            atomic_write_file(features_out, out.str());
            std::cout << "wrote " << features.col_count() << " columns x "
                      << features.row_count() << " rows to " << features_out << "\n";
        } else if (label_cmd->parsed()) {
            const BarSeries bars = load_bars(label_data);
            LabelSeries labels = assign_labels(bars.closes());
            labels = filter_trend_periods(labels, bars.closes(), label_min_length);
            std::ostringstream out;
            write_labels_csv(labels, bars.dates(), out);
            atomic_write_file(label_out, out.str());
            std::cout << "wrote " << labels.size() << " labels to " << label_out << "\n";
        } else if (sweep_cmd->parsed()) {
            const ExperimentConfig config =
                make_config(sweep_train, sweep_data,
                            sweep_data.empty() ? &sweep_synth : nullptr, seed);
            const ExperimentReport report = hidden_size_sweep(
                config, sweep_sizes, parse_reducers(sweep_reducer), sweep_train.jobs);
            render_report(report, sweep_out_dir);
            std::cout << "wrote " << report.rows.size() << " rows to " << sweep_out_dir
                      << "\n";
        } else if (cv_cmd->parsed()) {
            const ExperimentConfig config = make_config(
                cv_train, cv_data, cv_data.empty() ? &cv_synth : nullptr, seed);
            std::vector<std::pair<Reducer, std::size_t>> runs;
            for (const Reducer reducer : parse_reducers(cv_reducer)) {
                const std::size_t hidden = reducer == Reducer::ae    ? cv_hidden_ae
                                           : reducer == Reducer::rbm ? cv_hidden_rbm
                                                                     : 0;
                runs.emplace_back(reducer, hidden);
            }
            const ExperimentReport report = kfold_cv(config, cv_k, runs, cv_train.jobs);
            render_report(report, cv_out_dir);
            std::cout << "wrote " << report.rows.size() << " rows to " << cv_out_dir
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
