// lesstrees: feature scores, LESS / forest training, prediction and the
// benchmark harness from the command line.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 compute error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lesstrees/data_io.hpp"
#include "lesstrees/ensemble.hpp"
#include "lesstrees/error.hpp"
#include "lesstrees/experiment.hpp"
#include "lesstrees/feature_scores.hpp"
#include "lesstrees/model_io.hpp"

namespace lt = lesstrees;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kComputeError = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataFlags {
    std::string path;
    std::string format = "csv";
    std::string label_col = "-1";
    bool has_header = false;
    std::string delimiter = ",";
    bool standardize = false;

    void add(CLI::App* app, bool required) {
        auto* opt = app->add_option("--data", path, "Dataset path");
        if (required) opt->required();
        app->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"csv", "libsvm"}));
        app->add_option("--label-col", label_col, "CSV label column: index (negative from the end), header name, or none");
        app->add_flag("--has-header", has_header, "CSV has a header row");
        app->add_option("--delimiter", delimiter, "CSV delimiter (one character, or 'tab')");
        app->add_flag("--standardize", standardize, "Scale every column to unit variance");
    }

    lt::LabeledDataset load(std::optional<std::size_t> libsvm_features = std::nullopt) const {
        auto read = [&]() -> lt::LabeledDataset {
            if (format == "libsvm") return lt::load_libsvm(path, libsvm_features);
            lt::CsvOptions options;
            options.has_header = has_header;
            if (label_col == "none") options.label_column.reset();
            else options.label_column = label_col;
            if (delimiter == "tab") options.delimiter = '\t';
            else if (delimiter.size() == 1) options.delimiter = delimiter[0];
            else throw UsageError("--delimiter must be one character or 'tab'");
            return lt::load_csv(path, options);
        };
        try {
            auto data = read();
            return standardize ? lt::standardize_columns(data) : data;
        } catch (const lt::Error& e) {
            throw DataError(e.what());
        }
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

lt::TreeParams tree_params(std::size_t min_split, std::size_t max_depth) {
    lt::TreeParams params;
    params.min_samples_split = min_split;
    if (max_depth > 0) params.max_depth = max_depth;
    return params;
}

// ---- scores -----------------------------------------------------------------

struct ScoresCmd {
    DataFlags data;
    std::string scheme = "leverage";
    std::size_t max_rank = 50;
    std::size_t d = 0;
    std::string out;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("scores", "Compute a feature sampling distribution");
        data.add(app, false);
        app->add_option("--scheme", scheme, "Sampling scheme")->check(CLI::IsMember({"uniform", "norm", "leverage"}));
        app->add_option("--max-rank", max_rank, "Truncation rank for leverage scores")->check(CLI::PositiveNumber);
        app->add_option("--d", d, "Feature count for --scheme uniform without --data");
        app->add_option("--out", out, "Output JSON path (stdout when omitted)");
        app->callback([this] { code = run(); });
    }

    int run() {
        lt::FeatureDistribution dist;
        bool fell_back = false;
        if (data.path.empty()) {
            if (scheme != "uniform" || d == 0) throw UsageError("scores: --data is required (or --scheme uniform --d N)");
            dist = lt::uniform_distribution(d);
        } else {
            const auto ds = data.load();
            dist = lt::compute_distribution(ds.matrix, lt::parse_scheme(scheme), max_rank, true, &fell_back);
        }
        nlohmann::json j = {{"scheme", std::string(lt::to_string(dist.scheme))},
                            {"effective_rank", dist.effective_rank},
                            {"n_features", dist.size()},
                            {"fallback", fell_back},
                            {"probs", dist.probs}};
        if (fell_back) std::cerr << "warning: all-zero matrix, fell back to uniform\n";
        write_text(out, j.dump(2) + "\n");
        return 0;
    }

    int code = 0;
};

// ---- train ------------------------------------------------------------------

struct TrainCmd {
    DataFlags data;
    std::string scheme = "leverage";
    std::size_t k = 50;
    std::size_t trees = 100;
    std::uint64_t seed = 1;
    std::size_t max_rank = 50;
    std::size_t min_split = 2;
    std::size_t max_depth = 0;
    int threads = 0;
    bool replacement = false;
    std::string out = "model.json";
    CLI::Option* k_opt = nullptr;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("train", "Train a LESS ensemble or the forest baseline");
        data.add(app, true);
        app->add_option("--scheme", scheme, "uniform, norm, leverage or rf")
            ->check(CLI::IsMember({"uniform", "norm", "leverage", "rf"}));
        k_opt = app->add_option("--k", k, "Features per tree (LESS schemes)")->check(CLI::PositiveNumber);
        app->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--max-rank", max_rank, "Truncation rank for leverage scores")->check(CLI::PositiveNumber);
        app->add_option("--min-split", min_split, "Minimum samples to split a node")->check(CLI::Range(2, 1 << 30));
        app->add_option("--max-depth", max_depth, "Maximum tree depth (0: unlimited)");
        app->add_option("--threads", threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
        app->add_flag("--replacement", replacement, "Draw tree features with replacement (duplicates dropped)");
        app->add_option("--out,--model", out, "Model output path");
        app->callback([this] { code = run(); });
    }

    int run() {
        const auto ds = data.load();
        if (!ds.has_labels()) throw DataError("train: dataset has no labels");
        if (ds.num_classes() < 2) throw DataError("train: need at least two classes");
        const std::size_t d = ds.matrix.cols();
        lt::EnsembleModel model;
        if (scheme == "rf") {
            if (k_opt->count() > 0) std::cerr << "warning: --k is ignored for --scheme rf\n";
            lt::RfOptions options;
            options.trees = trees;
            options.tree = tree_params(min_split, max_depth);
            options.seed = seed;
            options.threads = threads;
            model = lt::train_rf(ds.matrix, ds.labels, ds.num_classes(), options);
        } else {
            if (k > d) throw UsageError("train: --k " + std::to_string(k) + " exceeds d = " + std::to_string(d));
            lt::LessOptions options;
            options.trees = trees;
            options.k = k;
            options.scheme = lt::parse_scheme(scheme);
            options.tree = tree_params(min_split, max_depth);
            options.seed = seed;
            options.max_rank = max_rank;
            options.with_replacement = replacement;
            options.threads = threads;
            model = lt::train_less(ds.matrix, ds.labels, ds.num_classes(), options);
        }
        model.classes = ds.classes;
        try {
            lt::save_model(model, out);
        } catch (const lt::Error& e) {
            throw DataError(e.what());
        }
        double tree_time = 0.0;
        for (double s : model.tree_seconds) tree_time += s;
        const double train_error = lt::classification_error(model, ds.matrix, ds.labels, 0, threads);
        std::printf("scheme=%s trees=%zu k=%zu scores_s=%.4f train_s=%.4f nodes=%zu train_error=%.6f model=%s\n",
                    model.scheme_name().c_str(), model.trees.size(), model.k, model.scores_seconds, tree_time,
                    lt::total_node_count(model), train_error, out.c_str());
        if (model.degenerate_fallback) std::cerr << "warning: all-zero matrix, scores fell back to uniform\n";
        return 0;
    }

    int code = 0;
};

// ---- predict ----------------------------------------------------------------

struct PredictCmd {
    DataFlags data;
    std::string model_path;
    std::string out;
    int threads = 0;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("predict", "Predict labels with a saved model");
        data.add(app, true);
        app->add_option("--model", model_path, "Model path")->required();
        app->add_option("--out", out, "Prediction output path, one label per line (stdout when omitted)");
        app->add_option("--threads", threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
        app->callback([this] { code = run(); });
    }

    int run() {
        lt::EnsembleModel model;
        try {
            model = lt::load_model(model_path);
        } catch (const lt::Error& e) {
            throw DataError(e.what());
        }
        const auto ds = data.load(model.n_features);
        if (ds.matrix.cols() != model.n_features)
            throw DataError("predict: model expects " + std::to_string(model.n_features) + " features, data has " +
                            std::to_string(ds.matrix.cols()));
        const auto predicted = lt::predict_all(model, ds.matrix, 0, threads);
        std::string text;
        for (int code : predicted) {
            const auto c = static_cast<std::size_t>(code);
            text += c < model.classes.size() ? model.classes[c] : std::to_string(code);
            text += '\n';
        }
        write_text(out, text);
        if (ds.has_labels()) {
            // Translate the file's label codes into the model's code space.
            std::vector<int> labels(ds.labels.size(), -1);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto& name = ds.classes[static_cast<std::size_t>(ds.labels[i])];
                for (std::size_t c = 0; c < model.classes.size(); ++c)
                    if (model.classes[c] == name) labels[i] = static_cast<int>(c);
            }
            const double error = lt::classification_error(model, ds.matrix, labels, 0, threads);
            std::fprintf(stderr, "error=%.6f n=%zu\n", error, labels.size());
        }
        return 0;
    }

    int code = 0;
};

// ---- bench ------------------------------------------------------------------

struct BenchCmd {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string data, format, label_col, schemes, k, out;
    std::optional<std::size_t> trees, repetitions, max_rank, min_split, max_depth;
    std::optional<double> epsilon, time_budget;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("bench", "Run the experiment harness");
        app->add_option("--config", config_path, "Flat key = value experiment file");
        app->add_option("--set", overrides, "Extra key=value override (repeatable)");
        app->add_option("--data", data, "Dataset path (planted data when omitted)");
        app->add_option("--format", format, "csv, libsvm or planted");
        app->add_option("--label-col", label_col, "CSV label column");
        app->add_option("--schemes", schemes, "Comma-separated subset of leverage,uniform,norm,rf");
        app->add_option("--k", k, "Comma-separated k values");
        app->add_option("--trees", trees, "Trees per ensemble");
        app->add_option("--repetitions", repetitions, "Seeded repetitions");
        app->add_option("--epsilon", epsilon, "Target error for nodes-to-epsilon");
        app->add_option("--time-budget", time_budget, "Training time budget in seconds");
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--max-rank", max_rank, "Truncation rank for leverage scores");
        app->add_option("--min-split", min_split, "Minimum samples to split a node");
        app->add_option("--max-depth", max_depth, "Maximum tree depth (0: unlimited)");
        app->add_option("--threads", threads, "Worker threads");
        app->add_option("--out", out, "Output directory");
        app->callback([this] { code = run(); });
    }

    lt::ExperimentConfig config() const {
        lt::ExperimentConfig cfg;
        try {
            if (!config_path.empty()) cfg = lt::load_config(config_path);
            auto set = [&](const std::string& key, const std::string& value) { lt::apply_config_value(cfg, key, value); };
            if (!data.empty()) set("data", data);
            if (!format.empty()) set("format", format);
            if (!label_col.empty()) set("label_col", label_col);
            if (!schemes.empty()) set("schemes", schemes);
            if (!k.empty()) set("k", k);
            if (trees) set("trees", std::to_string(*trees));
            if (repetitions) set("repetitions", std::to_string(*repetitions));
            if (epsilon) set("epsilon", std::to_string(*epsilon));
            if (time_budget) set("time_budget", std::to_string(*time_budget));
            if (seed) set("seed", std::to_string(*seed));
            if (max_rank) set("max_rank", std::to_string(*max_rank));
            if (min_split) set("min_split", std::to_string(*min_split));
            if (max_depth) set("max_depth", std::to_string(*max_depth));
            if (threads) set("threads", std::to_string(*threads));
            if (!out.empty()) set("out", out);
            for (const auto& item : overrides) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw lt::InvalidArgument("--set expects key=value, got '" + item + "'");
                set(item.substr(0, eq), item.substr(eq + 1));
            }
            for (const auto& s : cfg.schemes)
                if (s != "rf") (void)lt::parse_scheme(s);
            cfg.validate();
        } catch (const lt::ParseError& e) {
            throw DataError(e.what());
        } catch (const lt::InvalidArgument& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }

    int run() {
        const auto cfg = config();
        std::filesystem::create_directories(cfg.output_dir);
        const auto dir = std::filesystem::path(cfg.output_dir);
        std::filesystem::remove(dir / "failures.json");
        const auto ds = [&] {
            try {
                return lt::load_source(cfg.source);
            } catch (const lt::Error& e) {
                nlohmann::json manifest = {{"stage", "load"}, {"error", e.what()}};
                write_text((dir / "failures.json").string(), manifest.dump(2) + "\n");
                throw DataError(e.what());
            }
        }();

        std::optional<lt::CurveResult> curves;
        std::optional<std::vector<lt::NodesToEpsilon>> nodes;
        auto write_summary = [&] {
            const auto summary = lt::summary_json(cfg, ds, curves ? &*curves : nullptr, nodes ? &*nodes : nullptr);
            write_text((dir / "summary.json").string(), summary.dump(2) + "\n");
        };
        auto fail = [&](const std::string& stage, const std::exception& e) {
            nlohmann::json manifest = {{"stage", stage},
                                       {"error", e.what()},
                                       {"completed", {{"curves", curves.has_value()}, {"nodes", nodes.has_value()}}}};
            write_text((dir / "failures.json").string(), manifest.dump(2) + "\n");
            write_summary();
        };

        if (cfg.run_curves) {
            try {
                curves = lt::run_error_vs_time(cfg, ds);
                lt::write_curves_csv((dir / "curves.csv").string(), curves->records);
            } catch (const std::exception& e) {
                fail("curves", e);
                throw;
            }
            for (const auto& p : curves->means)
                if (p.tree_index == cfg.trees)
                    std::printf("curves scheme=%s k=%zu trees=%zu mean_error=%.4f std=%.4f mean_time_s=%.4f\n",
                                p.scheme.c_str(), p.k, p.tree_index, p.mean_error, p.std_error, p.mean_time_s);
        }
        if (cfg.run_nodes) {
            try {
                nodes = lt::run_nodes_to_epsilon(cfg, ds);
            } catch (const std::exception& e) {
                fail("nodes", e);
                throw;
            }
            for (const auto& r : *nodes)
                std::printf("nodes scheme=%s k=%zu status=%s trees=%zu nodes=%zu mean_error=%.4f\n", r.scheme.c_str(),
                            r.k, lt::to_string(r.status).c_str(), r.trees, r.nodes, r.mean_error);
        }
        write_summary();
        return 0;
    }

    int code = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LESS tree ensembles and the random forest baseline"};
    app.require_subcommand(1);
    ScoresCmd scores;
    TrainCmd train;
    PredictCmd predict;
    BenchCmd bench;
    scores.add(app);
    train.add(app);
    predict.add(app);
    bench.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const lt::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kComputeError;
    }
    return scores.code | train.code | predict.code | bench.code;
}
