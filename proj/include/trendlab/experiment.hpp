#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/autoencoder.hpp"
#include "trendlab/indicators.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/rbm.hpp"
#include "trendlab/scaling.hpp"
#include "trendlab/svm.hpp"

namespace trendlab {

enum class Reducer { none, ae, rbm };

Reducer reducer_from_string(const std::string& name);
std::string to_string(Reducer reducer);

enum class FeatureMode { crossovers, full_manifest };

FeatureMode feature_mode_from_string(const std::string& name);
std::string to_string(FeatureMode mode);

struct ExperimentConfig {
    // data source: a CSV path, or a synthetic spec when csv_path is empty
    std::string csv_path;
    SyntheticSpec synthetic;

    FeatureMode feature_mode = FeatureMode::full_manifest;
    std::string manifest_path;          // full_manifest only; empty -> default
    ScalerKind scaler = ScalerKind::ecdf;
    double train_fraction = 0.9;
    std::size_t min_trend_length = 10;
    bool filter_eval = false;           // apply the trend filter to test rows too
    bool paper_faithful = false;        // fit scaler/reducer on all rows
    bool shuffle_folds = false;         // k-fold: shuffled instead of chronological
    AeTrainConfig ae;
    RbmTrainConfig rbm;
    SvmParams svm;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

struct ReportRow {
    std::string reducer;
    std::string scaler;
    std::string feature_mode;
    std::size_t hidden = 0;   // 0 for the no-reduction baseline
    long fold = -1;           // -1 for holdout runs
    double accuracy = 0.0;
    double reducer_train_seconds = 0.0;
    double svm_train_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> environment;
    std::string config_echo; // JSON text
};

/// Matching fraction of two equal-length non-empty label vectors.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Everything a single (split, reducer, hidden) run produces. The fitted
/// models are exposed so leakage checks and model export can inspect them.
struct RunResult {
    ReportRow row;
    ScalerModel scaler;
    std::optional<AeModel> ae;
    std::optional<RbmModel> rbm;
    SvmModel svm;
};

/// Ingest -> features -> labels -> trend filter -> drop_warmup.
Dataset assemble_dataset(const ExperimentConfig& config);

/// One fit/evaluate cycle over explicit train/test row indices.
RunResult run_split(const ExperimentConfig& config, const Dataset& dataset,
                    const std::vector<std::size_t>& train_rows,
                    const std::vector<std::size_t>& test_rows, Reducer reducer,
                    std::size_t hidden, long fold);

/// Holdout run over the configured train fraction.
RunResult run_pipeline(const ExperimentConfig& config, Reducer reducer,
                       std::size_t hidden);

/// One row per requested reducer per size plus a single no-reduction
/// baseline row; identical split and derived seeds across sizes.
ExperimentReport hidden_size_sweep(const ExperimentConfig& config,
                                   const std::vector<std::size_t>& sizes,
                                   const std::vector<Reducer>& reducers,
                                   std::size_t jobs = 1);

/// Contiguous chronological k folds with sizes differing by at most one
/// (shuffled when config.shuffle_folds). Each (reducer, hidden) pair is
/// refit per fold.
ExperimentReport kfold_cv(const ExperimentConfig& config, std::size_t k,
                          const std::vector<std::pair<Reducer, std::size_t>>& runs,
                          std::size_t jobs = 1);

/// Fold index ranges over `rows` rows: disjoint, exhaustive, contiguous,
/// sizes differ by <= 1 (earlier folds take the remainder).
std::vector<IndexRange> kfold_partition(std::size_t rows, std::size_t k);

/// Writes report.csv, report.json and accuracy_by_hidden.dat into out_dir
/// (created if missing). Files are written to temporaries and renamed, so a
/// failure never leaves partial reports.
void render_report(const ExperimentReport& report, const std::string& out_dir);

std::map<std::string, std::string> environment_stamp();

} // namespace trendlab
