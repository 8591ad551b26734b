#include "trendlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace trendlab {

namespace {

namespace fs = std::filesystem;

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return std::string(buf);
}

std::uint64_t run_seed(const ExperimentConfig& config, Reducer reducer,
                       std::size_t hidden, long fold) {
    std::uint64_t tag = 0x5eed0000;
    tag = mix_seed(tag, static_cast<std::uint64_t>(reducer) + 1);
    tag = mix_seed(tag, hidden + 1);
    tag = mix_seed(tag, static_cast<std::uint64_t>(fold + 2));
    return mix_seed(config.seed, tag);
}

std::vector<std::size_t> range_indices(const IndexRange& range) {
    std::vector<std::size_t> out(range.size());
    std::iota(out.begin(), out.end(), range.begin);
    return out;
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = x.row_ptr(rows[i]);
        std::copy(src, src + x.cols, out.row_ptr(i));
    }
    return out;
}

void atomic_write(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

} // namespace

Reducer reducer_from_string(const std::string& name) {
    if (name == "none") return Reducer::none;
    if (name == "ae") return Reducer::ae;
    if (name == "rbm") return Reducer::rbm;
    throw std::runtime_error("unknown reducer '" + name + "'");
}

std::string to_string(Reducer reducer) {
    switch (reducer) {
        case Reducer::none: return "none";
        case Reducer::ae: return "ae";
        case Reducer::rbm: return "rbm";
    }
    return "?";
}

FeatureMode feature_mode_from_string(const std::string& name) {
    if (name == "crossovers") return FeatureMode::crossovers;
    if (name == "full_manifest" || name == "full") return FeatureMode::full_manifest;
    throw std::runtime_error("unknown feature mode '" + name + "'");
}

std::string to_string(FeatureMode mode) {
    return mode == FeatureMode::crossovers ? "crossovers" : "full_manifest";
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json doc;
    doc["data"] = csv_path.empty()
                      ? nlohmann::json{{"synthetic", to_string(synthetic.kind)},
                                       {"length", synthetic.length},
                                       {"start", synthetic.start},
                                       {"drift", synthetic.drift},
                                       {"volatility", synthetic.volatility},
                                       {"segment_length", synthetic.segment_length},
                                       {"amplitude", synthetic.amplitude},
                                       {"period", synthetic.period},
                                       {"base_volume", synthetic.base_volume}}
                      : nlohmann::json{{"csv", csv_path}};
    doc["feature_mode"] = to_string(feature_mode);
    if (!manifest_path.empty()) doc["manifest"] = manifest_path;
    doc["scaler"] = to_string(scaler);
    doc["train_fraction"] = train_fraction;
    doc["min_trend_length"] = min_trend_length;
    doc["filter_eval"] = filter_eval;
    doc["paper_faithful"] = paper_faithful;
    doc["shuffle_folds"] = shuffle_folds;
    doc["ae"] = {{"learning_rate", ae.learning_rate},
                 {"decay_rate", ae.decay_rate},
                 {"batch_size", ae.batch_size},
                 {"max_epochs", ae.max_epochs},
                 {"patience", ae.patience},
                 {"corruption_level", ae.corruption_level},
                 {"loss", to_string(ae.loss)}};
    doc["rbm"] = {{"learning_rate", rbm.learning_rate},
                  {"decay_rate", rbm.decay_rate},
                  {"batch_size", rbm.batch_size},
                  {"max_epochs", rbm.max_epochs},
                  {"gibbs_steps", rbm.gibbs_steps},
                  {"patience", rbm.patience}};
    doc["svm"] = {{"kernel", to_string(svm.kernel)},
                  {"C", svm.c},
                  {"gamma", svm.gamma},
                  {"tolerance", svm.tolerance}};
    doc["seed"] = seed;
    return doc.dump(2);
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw std::runtime_error("accuracy: length mismatch");
    if (predicted.empty()) throw std::runtime_error("accuracy: empty label vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Dataset assemble_dataset(const ExperimentConfig& config) {
    std::optional<BarSeries> bars;
    if (!config.csv_path.empty()) {
        std::ifstream in(config.csv_path);
        if (!in) throw std::runtime_error("cannot open " + config.csv_path);
        bars.emplace(parse_ohlcv_csv(in));
    } else {
        if (config.synthetic.length == 0)
            throw std::runtime_error("no data source configured");
        bars.emplace(generate_synthetic(config.synthetic, mix_seed(config.seed, 0xda7a)));
    }

    FeatureMatrix features = [&] {
        if (config.feature_mode == FeatureMode::crossovers) {
            std::vector<std::size_t> fast(11), slow(11);
            std::iota(fast.begin(), fast.end(), std::size_t{5});
            std::iota(slow.begin(), slow.end(), std::size_t{20});
            return build_crossover_features(fast, slow, *bars);
        }
        std::vector<IndicatorSpec> manifest;
        if (config.manifest_path.empty()) {
            manifest = default_manifest();
        } else {
            std::ifstream in(config.manifest_path);
            if (!in) throw std::runtime_error("cannot open " + config.manifest_path);
            std::stringstream buffer;
            buffer << in.rdbuf();
            manifest = parse_manifest(buffer.str());
        }
        return build_indicator_matrix(manifest, *bars, true);
    }();

    LabelSeries labels = assign_labels(bars->closes());
    labels = filter_trend_periods(labels, bars->closes(), config.min_trend_length);
    return drop_warmup(features, labels);
}

RunResult run_split(const ExperimentConfig& config, const Dataset& dataset,
                    const std::vector<std::size_t>& train_rows,
                    const std::vector<std::size_t>& test_rows, Reducer reducer,
                    std::size_t hidden, long fold) {
    if (train_rows.empty() || test_rows.empty())
        throw std::runtime_error("empty train or test split");
    const std::uint64_t seed = run_seed(config, reducer, hidden, fold);

    // the reducer and scaler may see all rows only in paper-faithful mode
    std::vector<std::size_t> fit_rows = train_rows;
    if (config.paper_faithful) {
        fit_rows.resize(dataset.x.rows);
        std::iota(fit_rows.begin(), fit_rows.end(), std::size_t{0});
    }

    const Matrix fit_matrix = select_rows(dataset.x, fit_rows);
    const ScalerModel scaler =
        ScalerModel::fit(config.scaler, fit_matrix, dataset.feature_names);
    const Matrix scaled_fit = scaler.apply(fit_matrix, dataset.feature_names);
    const Matrix scaled_train =
        scaler.apply(select_rows(dataset.x, train_rows), dataset.feature_names);
    const Matrix scaled_test =
        scaler.apply(select_rows(dataset.x, test_rows), dataset.feature_names);

    RunResult result{ReportRow{}, scaler, std::nullopt, std::nullopt, SvmModel{}};
    Matrix encoded_train, encoded_test;
    double reducer_seconds = 0.0;

    switch (reducer) {
        case Reducer::none:
            encoded_train = scaled_train;
            encoded_test = scaled_test;
            break;
        case Reducer::ae: {
            if (hidden == 0 || hidden >= dataset.x.cols)
                throw std::runtime_error("hidden size must lie in [1, feature count)");
            AeTrainConfig ae_config = config.ae;
            ae_config.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            auto [model, history] =
                train_ae(init_ae(dataset.x.cols, hidden, seed), scaled_fit, ae_config);
            reducer_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
            encoded_train = ae_encode_matrix(model, scaled_train);
            encoded_test = ae_encode_matrix(model, scaled_test);
            result.ae = std::move(model);
            break;
        }
        case Reducer::rbm: {
            if (hidden == 0 || hidden >= dataset.x.cols)
                throw std::runtime_error("hidden size must lie in [1, feature count)");
            RbmTrainConfig rbm_config = config.rbm;
            rbm_config.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            auto [model, history] =
                train_pcd(init_rbm(dataset.x.cols, hidden, seed), scaled_fit, rbm_config);
            reducer_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
            encoded_train = rbm_encode(model, scaled_train);
            encoded_test = rbm_encode(model, scaled_test);
            result.rbm = std::move(model);
            break;
        }
    }

    // SVM trains on eligible rows only
    std::vector<std::size_t> eligible_local;
    for (std::size_t i = 0; i < train_rows.size(); ++i)
        if (dataset.eligible[train_rows[i]]) eligible_local.push_back(i);
    if (eligible_local.empty())
        throw std::runtime_error("no eligible training rows after the trend filter");
    Matrix svm_x = select_rows(encoded_train, eligible_local);
    std::vector<int> svm_y(eligible_local.size());
    for (std::size_t i = 0; i < eligible_local.size(); ++i)
        svm_y[i] = dataset.labels[train_rows[eligible_local[i]]];

    const auto svm_start = std::chrono::steady_clock::now();
    result.svm = train_svm(svm_x, svm_y, config.svm);
    const double svm_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - svm_start)
            .count();

    // evaluation rows: all known-label test rows, or eligible ones only
    std::vector<std::size_t> eval_local;
    for (std::size_t i = 0; i < test_rows.size(); ++i)
        if (!config.filter_eval || dataset.eligible[test_rows[i]]) eval_local.push_back(i);
    if (eval_local.empty()) throw std::runtime_error("no evaluation rows in the test split");
    const Matrix eval_x = select_rows(encoded_test, eval_local);
    std::vector<int> truth(eval_local.size());
    for (std::size_t i = 0; i < eval_local.size(); ++i)
        truth[i] = dataset.labels[test_rows[eval_local[i]]];
    const std::vector<int> predicted = predict(result.svm, eval_x);

    result.row = ReportRow{to_string(reducer),
                           to_string(config.scaler),
                           to_string(config.feature_mode),
                           reducer == Reducer::none ? 0 : hidden,
                           fold,
                           accuracy(predicted, truth),
                           reducer_seconds,
                           svm_seconds,
                           config.seed};
    return result;
}

RunResult run_pipeline(const ExperimentConfig& config, Reducer reducer,
                       std::size_t hidden) {
    const Dataset dataset = assemble_dataset(config);
    const auto [train, test] = chronological_split(dataset.x.rows, config.train_fraction);
    return run_split(config, dataset, range_indices(train), range_indices(test), reducer,
                     hidden, -1);
}

std::vector<IndexRange> kfold_partition(std::size_t rows, std::size_t k) {
    if (k < 2) throw std::runtime_error("k-fold needs k >= 2");
    if (rows < k) throw std::runtime_error("fewer rows than folds");
    std::vector<IndexRange> folds(k);
    const std::size_t base = rows / k;
    const std::size_t remainder = rows % k;
    std::size_t begin = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < remainder ? 1 : 0);
        folds[f] = IndexRange{begin, begin + len};
        begin += len;
    }
    return folds;
}

namespace {

struct RunTask {
    Reducer reducer;
    std::size_t hidden;
    long fold;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

std::vector<ReportRow> execute_tasks(const ExperimentConfig& config,
                                     const Dataset& dataset,
                                     const std::vector<RunTask>& tasks, std::size_t jobs) {
    std::vector<ReportRow> rows(tasks.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const RunTask& t = tasks[i];
            rows[i] = run_split(config, dataset, t.train_rows, t.test_rows, t.reducer,
                                t.hidden, t.fold)
                          .row;
        }
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const RunTask& t = tasks[i];
                rows[i] = run_split(config, dataset, t.train_rows, t.test_rows, t.reducer,
                                    t.hidden, t.fold)
                              .row;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(jobs, tasks.size()); ++j)
        pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

} // namespace

ExperimentReport hidden_size_sweep(const ExperimentConfig& config,
                                   const std::vector<std::size_t>& sizes,
                                   const std::vector<Reducer>& reducers,
                                   std::size_t jobs) {
    if (sizes.empty()) throw std::runtime_error("hidden size list is empty");
    const Dataset dataset = assemble_dataset(config);
    const auto [train, test] = chronological_split(dataset.x.rows, config.train_fraction);
    const std::vector<std::size_t> train_rows = range_indices(train);
    const std::vector<std::size_t> test_rows = range_indices(test);

    std::vector<RunTask> tasks;
    tasks.push_back(RunTask{Reducer::none, 0, -1, train_rows, test_rows});
    for (const Reducer reducer : reducers) {
        if (reducer == Reducer::none) continue;
        for (const std::size_t size : sizes)
            tasks.push_back(RunTask{reducer, size, -1, train_rows, test_rows});
    }

    ExperimentReport report;
    report.rows = execute_tasks(config, dataset, tasks, jobs);
    report.environment = environment_stamp();
    report.config_echo = config.to_json();
    return report;
}

ExperimentReport kfold_cv(const ExperimentConfig& config, std::size_t k,
                          const std::vector<std::pair<Reducer, std::size_t>>& runs,
                          std::size_t jobs) {
    if (runs.empty()) throw std::runtime_error("no (reducer, hidden) runs requested");
    const Dataset dataset = assemble_dataset(config);

    std::vector<std::size_t> order(dataset.x.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (config.shuffle_folds) {
        Rng rng(mix_seed(config.seed, 0xf01d));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);
    }
    const std::vector<IndexRange> folds = kfold_partition(dataset.x.rows, k);

    std::vector<RunTask> tasks;
    for (const auto& [reducer, hidden] : runs) {
        for (std::size_t f = 0; f < k; ++f) {
            RunTask task;
            task.reducer = reducer;
            task.hidden = reducer == Reducer::none ? 0 : hidden;
            task.fold = static_cast<long>(f);
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (i >= folds[f].begin && i < folds[f].end)
                    task.test_rows.push_back(order[i]);
                else
                    task.train_rows.push_back(order[i]);
            }
            tasks.push_back(std::move(task));
        }
    }

    ExperimentReport report;
    report.rows = execute_tasks(config, dataset, tasks, jobs);
    report.environment = environment_stamp();
    report.config_echo = config.to_json();
    return report;
}

std::map<std::string, std::string> environment_stamp() {
    std::map<std::string, std::string> env;
    env["compiler"] =
#if defined(__clang__)
        std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
        std::string("gcc ") + std::to_string(__GNUC__) + "." +
        std::to_string(__GNUC_MINOR__);
#else
        "unknown";
#endif
#if defined(__linux__)
    env["platform"] = "linux";
#elif defined(__APPLE__)
    env["platform"] = "macos";
#elif defined(_WIN32)
    env["platform"] = "windows";
#else
    env["platform"] = "unknown";
#endif
    return env;
}

void render_report(const ExperimentReport& report, const std::string& out_dir) {
    if (report.rows.empty()) throw std::runtime_error("refusing to render an empty report");
    fs::create_directories(out_dir);

    std::ostringstream csv;
    csv << "reducer,scaler,feature_mode,hidden,fold,accuracy,reducer_train_seconds,"
           "svm_train_seconds,seed\n";
    for (const ReportRow& row : report.rows) {
        csv << row.reducer << ',' << row.scaler << ',' << row.feature_mode << ','
            << row.hidden << ',';
        if (row.fold >= 0) csv << row.fold;
        csv << ',' << format_double(row.accuracy) << ','
            << format_double(row.reducer_train_seconds) << ','
            << format_double(row.svm_train_seconds) << ',' << row.seed << '\n';
    }
    atomic_write(fs::path(out_dir) / "report.csv", csv.str());

    nlohmann::json doc;
    doc["environment"] = report.environment;
    doc["config"] = nlohmann::json::parse(report.config_echo);
    nlohmann::json rows = nlohmann::json::array();
    for (const ReportRow& row : report.rows) {
        rows.push_back({{"reducer", row.reducer},
                        {"scaler", row.scaler},
                        {"feature_mode", row.feature_mode},
                        {"hidden", row.hidden},
                        {"fold", row.fold},
                        {"accuracy", row.accuracy},
                        {"reducer_train_seconds", row.reducer_train_seconds},
                        {"svm_train_seconds", row.svm_train_seconds},
                        {"seed", row.seed}});
    }
    doc["rows"] = rows;
    atomic_write(fs::path(out_dir) / "report.json", doc.dump(2) + "\n");

    // plot-ready accuracy-by-hidden series, one block per reducer
    std::ostringstream dat;
    for (const char* reducer : {"ae", "rbm"}) {
        std::vector<std::pair<std::size_t, double>> points;
        for (const ReportRow& row : report.rows)
            if (row.reducer == reducer) points.emplace_back(row.hidden, row.accuracy);
        if (points.empty()) continue;
        std::stable_sort(points.begin(), points.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        dat << "# " << reducer << "\n";
        for (const auto& [hidden, acc] : points)
            dat << hidden << ' ' << format_double(acc) << '\n';
        dat << '\n';
    }
    atomic_write(fs::path(out_dir) / "accuracy_by_hidden.dat", dat.str());
}

} // namespace trendlab
