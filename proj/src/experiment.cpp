#include "lesstrees/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lesstrees/ensemble.hpp"
#include "lesstrees/error.hpp"
#include "lesstrees/feature_scores.hpp"
#include "lesstrees/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lesstrees {

namespace {

using Clock = std::chrono::steady_clock;

int thread_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto text = trim(value);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("config: bad value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("config: bad boolean '" + value + "' for " + key);
}

// One (scheme, k) arm of one repetition, grown tree by tree.
struct Arm {
    std::string scheme;
    std::size_t k = 0;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    const LabeledDataset* train = nullptr;
    const LabeledDataset* test = nullptr;
    FeatureDistribution dist;
    double scores_seconds = 0.0;
    bool include_scores_time = false;

    std::vector<std::size_t> votes;  // test rows x classes
    std::size_t trees = 0;
    double tree_seconds = 0.0;
    std::size_t nodes = 0;
    double error = 1.0;

    double elapsed() const { return tree_seconds + (include_scores_time ? scores_seconds : 0.0); }
};

struct Repetition {
    LabeledDataset train;
    LabeledDataset test;
    std::uint64_t seed = 0;
};

// Shared setup: seeded split per repetition.
std::vector<Repetition> make_repetitions(const ExperimentConfig& config, const LabeledDataset& data) {
    std::vector<Repetition> reps;
    reps.reserve(config.repetitions);
    const SeededRng master(config.seed);
    for (std::size_t r = 0; r < config.repetitions; ++r) {
        const std::uint64_t seed = master.child(r).seed();
        auto [train, test] = train_test_split(data, config.test_fraction, seed);
        reps.push_back({std::move(train), std::move(test), seed});
    }
    return reps;
}

std::vector<std::pair<std::string, std::size_t>> arms_for(const ExperimentConfig& config, std::size_t d) {
    std::vector<std::pair<std::string, std::size_t>> arms;
    const auto ks = config.k_values.empty() ? default_k_values(d) : config.k_values;
    for (const auto& scheme : config.schemes) {
        if (scheme == "rf") {
            arms.emplace_back(scheme, rf_candidates(d));
            continue;
        }
        for (std::size_t k : ks) arms.emplace_back(scheme, std::min(k, d));
    }
    return arms;
}

Arm make_arm(const ExperimentConfig& config, const Repetition& rep, std::size_t rep_index, const std::string& scheme,
             std::size_t k, std::size_t num_classes) {
    Arm arm;
    arm.scheme = scheme;
    arm.k = k;
    arm.rep = rep_index;
    arm.seed = mix_seed(rep.seed ^ 0xa5a5a5a5ULL);
    arm.train = &rep.train;
    arm.test = &rep.test;
    arm.include_scores_time = config.include_scores_time;
    arm.votes.assign(rep.test.matrix.rows() * num_classes, 0);
    if (scheme != "rf") {
        const auto start = Clock::now();
        arm.dist = compute_distribution(rep.train.matrix, parse_scheme(scheme), config.max_rank);
        arm.scores_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    }
    return arm;
}

void grow_one(Arm& arm, const ExperimentConfig& config, std::size_t num_classes) {
    const auto& a = arm.train->matrix;
    const auto start = Clock::now();
    DecisionTree tree;
    if (arm.scheme == "rf") {
        RfOptions options;
        options.seed = arm.seed;
        options.tree = config.tree;
        tree = train_rf_tree(a, arm.train->labels, num_classes, options, arm.trees);
    } else {
        LessOptions options;
        options.k = arm.k;
        options.scheme = parse_scheme(arm.scheme);
        options.seed = arm.seed;
        options.tree = config.tree;
        options.max_rank = config.max_rank;
        tree = train_less_tree(a, arm.train->labels, num_classes, arm.dist, options, arm.trees);
    }
    arm.tree_seconds += std::chrono::duration<double>(Clock::now() - start).count();
    ++arm.trees;
    arm.nodes += tree.node_count();

    const auto predicted = serial::predict_rows(tree, arm.test->matrix);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const std::span<std::size_t> row(arm.votes.data() + i * num_classes, num_classes);
        ++row[static_cast<std::size_t>(predicted[i])];
        if (vote_winner(row) != arm.test->labels[i]) ++wrong;
    }
    arm.error = static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

template <class Body>
void for_each_parallel(std::size_t count, int threads, Body body) {
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(threads))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(lesstrees_experiment)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

void check_data(const LabeledDataset& data) {
    if (!data.has_labels()) throw InvalidArgument("experiment: dataset has no labels");
    if (data.num_classes() < 2) throw InvalidArgument("experiment: need at least two classes");
}

}  // namespace

LabeledDataset load_source(const DatasetSource& source) {
    LabeledDataset data = [&] {
        switch (source.kind) {
            case DatasetSource::Kind::csv: return load_csv(source.path, source.csv);
            case DatasetSource::Kind::libsvm: return load_libsvm(source.path);
            case DatasetSource::Kind::planted: break;
        }
        return make_planted_dataset(source.planted).data;
    }();
    return source.standardize ? standardize_columns(data) : data;
}

void ExperimentConfig::validate() const {
    if (repetitions == 0) throw InvalidArgument("config: repetitions must be >= 1");
    if (trees == 0) throw InvalidArgument("config: trees must be >= 1");
    if (!(epsilon_target > 0.0 && epsilon_target <= 1.0))
        throw InvalidArgument("config: epsilon must be in (0, 1]");
    if (!(time_budget_secs >= 0.0)) throw InvalidArgument("config: time_budget must be >= 0");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("config: test_fraction must be in (0, 1)");
    if (max_rank == 0) throw InvalidArgument("config: max_rank must be >= 1");
    if (tree.min_samples_split < 2) throw InvalidArgument("config: min_split must be >= 2");
    if (schemes.empty()) throw InvalidArgument("config: no schemes");
    for (const auto& s : schemes)
        if (s != "rf") parse_scheme(s);
    for (std::size_t k : k_values)
        if (k == 0) throw InvalidArgument("config: k values must be positive");
}

void apply_config_value(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    auto& src = c.source;
    if (key == "data") {
        src.path = value;
        if (src.kind == DatasetSource::Kind::planted) src.kind = DatasetSource::Kind::csv;
    } else if (key == "format") {
        if (value == "csv") src.kind = DatasetSource::Kind::csv;
        else if (value == "libsvm") src.kind = DatasetSource::Kind::libsvm;
        else if (value == "planted") src.kind = DatasetSource::Kind::planted;
        else throw InvalidArgument("config: unknown format '" + value + "'");
    } else if (key == "label_col") {
        src.csv.label_column = value == "none" ? std::nullopt : std::optional<std::string>(value);
    } else if (key == "has_header") {
        src.csv.has_header = parse_bool(key, value);
    } else if (key == "delimiter") {
        if (value.size() != 1 && value != "tab") throw InvalidArgument("config: delimiter must be one character");
        src.csv.delimiter = value == "tab" ? '\t' : value[0];
    } else if (key == "standardize") {
        src.standardize = parse_bool(key, value);
    } else if (key == "planted_n") {
        src.planted.n = parse_number<std::size_t>(key, value);
    } else if (key == "planted_d") {
        src.planted.d = parse_number<std::size_t>(key, value);
    } else if (key == "planted_informative") {
        src.planted.n_informative = parse_number<std::size_t>(key, value);
    } else if (key == "planted_classes") {
        src.planted.class_count = parse_number<std::size_t>(key, value);
    } else if (key == "planted_noise") {
        src.planted.noise_scale = parse_number<double>(key, value);
    } else if (key == "planted_amplification") {
        src.planted.amplification = parse_number<double>(key, value);
    } else if (key == "planted_seed") {
        src.planted.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "schemes") {
        c.schemes = split_list(value);
    } else if (key == "k") {
        c.k_values.clear();
        for (const auto& item : split_list(value)) c.k_values.push_back(parse_number<std::size_t>(key, item));
    } else if (key == "trees") {
        c.trees = parse_number<std::size_t>(key, value);
    } else if (key == "repetitions") {
        c.repetitions = parse_number<std::size_t>(key, value);
    } else if (key == "epsilon") {
        c.epsilon_target = parse_number<double>(key, value);
    } else if (key == "time_budget") {
        c.time_budget_secs = parse_number<double>(key, value);
    } else if (key == "epsilon_max_trees") {
        c.epsilon_max_trees = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out") {
        c.output_dir = value;
    } else if (key == "test_fraction") {
        c.test_fraction = parse_number<double>(key, value);
    } else if (key == "max_rank") {
        c.max_rank = parse_number<std::size_t>(key, value);
    } else if (key == "min_split") {
        c.tree.min_samples_split = parse_number<std::size_t>(key, value);
    } else if (key == "max_depth") {
        if (value == "none" || value == "0") c.tree.max_depth.reset();
        else c.tree.max_depth = parse_number<std::size_t>(key, value);
    } else if (key == "threads") {
        c.threads = parse_number<int>(key, value);
    } else if (key == "include_scores_time") {
        c.include_scores_time = parse_bool(key, value);
    } else if (key == "experiments") {
        c.run_curves = false;
        c.run_nodes = false;
        for (const auto& item : split_list(value)) {
            if (item == "curves") c.run_curves = true;
            else if (item == "nodes") c.run_nodes = true;
            else throw InvalidArgument("config: unknown experiment '" + item + "'");
        }
    } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(number) + ": expected key = value");
        apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

std::vector<std::size_t> default_k_values(std::size_t d) {
    const std::size_t root = rf_candidates(d);
    std::vector<std::size_t> ks{root};
    if (std::min(2 * root, d) != root) ks.push_back(std::min(2 * root, d));
    return ks;
}

std::vector<CurvePoint> mean_curves(const std::vector<ExperimentRecord>& records) {
    struct Acc {
        double err = 0, err_sq = 0, time = 0, nodes = 0;
        std::size_t count = 0;
    };
    std::map<std::tuple<std::string, std::size_t, std::size_t>, Acc> groups;
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> order;
    for (const auto& r : records) {
        const auto key = std::make_tuple(r.scheme, r.k, r.tree_index);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        auto& acc = it->second;
        acc.err += r.test_error;
        acc.err_sq += r.test_error * r.test_error;
        acc.time += r.cum_time_s;
        acc.nodes += static_cast<double>(r.cum_nodes);
        ++acc.count;
    }
    std::vector<CurvePoint> out;
    for (const auto& key : order) {
        const auto& acc = groups.at(key);
        const auto n = static_cast<double>(acc.count);
        CurvePoint p;
        std::tie(p.scheme, p.k, p.tree_index) = key;
        p.mean_error = acc.err / n;
        p.std_error = acc.count > 1 ? std::sqrt(std::max(0.0, (acc.err_sq - n * p.mean_error * p.mean_error) / (n - 1)))
                                    : 0.0;
        p.mean_time_s = acc.time / n;
        p.mean_nodes = acc.nodes / n;
        p.repetitions = acc.count;
        out.push_back(p);
    }
    return out;
}

CurveResult run_error_vs_time(const ExperimentConfig& config, const LabeledDataset& data) {
    config.validate();
    check_data(data);
    const std::size_t num_classes = data.num_classes();
    const auto reps = make_repetitions(config, data);
    const auto arm_specs = arms_for(config, data.matrix.cols());

    // records[arm][rep] holds that run's curve.
    std::vector<std::vector<std::vector<ExperimentRecord>>> grid(arm_specs.size(),
                                                                 std::vector<std::vector<ExperimentRecord>>(reps.size()));
    const std::size_t jobs = arm_specs.size() * reps.size();
    for_each_parallel(jobs, config.threads, [&](std::size_t job) {
        const std::size_t a = job / reps.size();
        const std::size_t r = job % reps.size();
        const auto& [scheme, k] = arm_specs[a];
        Arm arm = make_arm(config, reps[r], r, scheme, k, num_classes);
        auto& out = grid[a][r];
        out.reserve(config.trees);
        for (std::size_t t = 0; t < config.trees; ++t) {
            grow_one(arm, config, num_classes);
            out.push_back({scheme, k, r, arm.trees, arm.elapsed(), arm.error, arm.nodes, arm.seed});
        }
    });

    CurveResult result;
    for (auto& per_arm : grid)
        for (auto& per_rep : per_arm) result.records.insert(result.records.end(), per_rep.begin(), per_rep.end());
    result.means = mean_curves(result.records);
    return result;
}

CurveResult run_error_vs_trees(const ExperimentConfig& config, const LabeledDataset& data) {
    return run_error_vs_time(config, data);
}

std::string to_string(EpsilonStatus status) {
    switch (status) {
        case EpsilonStatus::reached: return "reached";
        case EpsilonStatus::exceeded_budget: return "exceeded_budget";
        case EpsilonStatus::tree_limit: return "tree_limit";
    }
    return "unknown";
}

std::vector<NodesToEpsilon> run_nodes_to_epsilon(const ExperimentConfig& config, const LabeledDataset& data) {
    config.validate();
    check_data(data);
    const std::size_t num_classes = data.num_classes();
    const auto reps = make_repetitions(config, data);
    const auto n_reps = static_cast<double>(reps.size());

    std::vector<NodesToEpsilon> results;
    for (const auto& [scheme, k] : arms_for(config, data.matrix.cols())) {
        std::vector<Arm> arms(reps.size());
        for_each_parallel(reps.size(), config.threads, [&, &scheme = scheme, k = k](std::size_t r) {
            arms[r] = make_arm(config, reps[r], r, scheme, k, num_classes);
        });

        NodesToEpsilon result;
        result.scheme = scheme;
        result.k = k;
        auto summarize = [&] {
            double err = 0, nodes = 0, elapsed = 0;
            for (const auto& arm : arms) {
                err += arm.error;
                nodes += static_cast<double>(arm.nodes);
                elapsed += arm.elapsed();
            }
            result.mean_error = err / n_reps;
            result.nodes = static_cast<std::size_t>(std::llround(nodes / n_reps));
            result.elapsed_s = elapsed / n_reps;
            result.trees = arms.front().trees;
        };
        summarize();
        for (;;) {
            if (result.elapsed_s >= config.time_budget_secs) {
                result.status = EpsilonStatus::exceeded_budget;
                break;
            }
            if (result.trees >= config.epsilon_max_trees) {
                result.status = EpsilonStatus::tree_limit;
                break;
            }
            for_each_parallel(arms.size(), config.threads, [&](std::size_t r) { grow_one(arms[r], config, num_classes); });
            summarize();
            if (result.mean_error <= config.epsilon_target) {
                result.status = EpsilonStatus::reached;
                break;
            }
        }
        results.push_back(result);
    }
    return results;
}

void write_curves_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
    bool needs_header = true;
    if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
        std::ifstream in(path);
        std::string first;
        std::getline(in, first);
        if (trim(first) != kCurvesCsvHeader)
            throw ParseError(path + ": existing file has a different header; refusing to append");
        needs_header = false;
    }
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    if (needs_header) out << kCurvesCsvHeader << '\n';
    char buf[64];
    auto num = [&](double v) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    for (const auto& r : records)
        out << r.scheme << ',' << r.k << ',' << r.rep << ',' << r.tree_index << ',' << num(r.cum_time_s) << ','
            << num(r.test_error) << ',' << r.cum_nodes << '\n';
}

nlohmann::json summary_json(const ExperimentConfig& config, const LabeledDataset& data, const CurveResult* curves,
                            const std::vector<NodesToEpsilon>* nodes) {
    using nlohmann::json;
    json out;
    out["format"] = "lesstrees-experiment-summary";
    out["schema_version"] = kExperimentSchemaVersion;
    out["dataset"] = {{"n", data.matrix.rows()}, {"d", data.matrix.cols()}, {"classes", data.num_classes()}};
    out["config"] = {{"schemes", config.schemes},
                     {"k", config.k_values.empty() ? default_k_values(data.matrix.cols()) : config.k_values},
                     {"trees", config.trees},
                     {"repetitions", config.repetitions},
                     {"epsilon", config.epsilon_target},
                     {"time_budget_secs", config.time_budget_secs},
                     {"epsilon_max_trees", config.epsilon_max_trees},
                     {"seed", config.seed},
                     {"test_fraction", config.test_fraction},
                     {"max_rank", config.max_rank},
                     {"min_split", config.tree.min_samples_split},
                     {"max_depth", config.tree.max_depth ? json(*config.tree.max_depth) : json(nullptr)},
                     {"include_scores_time", config.include_scores_time}};
    if (curves) {
        json final_points = json::array();
        json curve = json::array();
        for (const auto& p : curves->means) {
            json point = {{"scheme", p.scheme},          {"k", p.k},
                          {"tree_index", p.tree_index},  {"mean_error", p.mean_error},
                          {"std_error", p.std_error},    {"mean_time_s", p.mean_time_s},
                          {"mean_nodes", p.mean_nodes},  {"repetitions", p.repetitions}};
            if (p.tree_index == config.trees) final_points.push_back(point);
            curve.push_back(std::move(point));
        }
        out["final"] = std::move(final_points);
        out["mean_curves"] = std::move(curve);
    }
    if (nodes) {
        json items = json::array();
        for (const auto& r : *nodes)
            items.push_back({{"scheme", r.scheme},
                             {"k", r.k},
                             {"status", to_string(r.status)},
                             {"trees", r.trees},
                             {"nodes", r.nodes},
                             {"mean_error", r.mean_error},
                             {"elapsed_s", r.elapsed_s}});
        out["nodes_to_epsilon"] = std::move(items);
    }
    return out;
}

}  // namespace lesstrees
