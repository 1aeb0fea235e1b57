#include "lesstrees/model_io.hpp"

#include <fstream>

#include "lesstrees/error.hpp"

namespace lesstrees {

using nlohmann::json;

namespace {

std::string split_mode_name(SplitMode mode) {
    return mode == SplitMode::per_node_uniform ? "per_node_uniform" : "fixed_subset";
}

SplitMode parse_split_mode(const std::string& name) {
    if (name == "fixed_subset") return SplitMode::fixed_subset;
    if (name == "per_node_uniform") return SplitMode::per_node_uniform;
    throw ParseError("model: unknown split_mode '" + name + "'");
}

}  // namespace

json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array();
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf())
            nodes.push_back({{"label", node.label}});
        else
            nodes.push_back(
                {{"feature", node.feature}, {"threshold", node.threshold}, {"left", node.left}, {"right", node.right}});
    }
    json out = {{"num_classes", tree.num_classes()}, {"nodes", std::move(nodes)}};
    if (!tree.feature_map().empty()) out["features"] = tree.feature_map();
    return out;
}

DecisionTree tree_from_json(const json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& item : j.at("nodes")) {
        TreeNode node;
        if (item.contains("label")) {
            node.label = item.at("label").get<std::int32_t>();
        } else {
            node.feature = item.at("feature").get<std::int32_t>();
            node.threshold = item.at("threshold").get<double>();
            node.left = item.at("left").get<std::int32_t>();
            node.right = item.at("right").get<std::int32_t>();
            if (node.feature < 0) throw ParseError("model: negative feature index");
        }
        nodes.push_back(node);
    }
    std::vector<std::size_t> features;
    if (j.contains("features")) features = j.at("features").get<std::vector<std::size_t>>();
    return DecisionTree(std::move(nodes), std::move(features), j.at("num_classes").get<std::size_t>());
}

json model_to_json(const EnsembleModel& model) {
    json trees = json::array();
    for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
    json params = {{"min_samples_split", model.params.min_samples_split},
                   {"max_depth", model.params.max_depth ? json(*model.params.max_depth) : json(nullptr)},
                   {"split_mode", split_mode_name(model.params.split_mode)},
                   {"candidates_per_node", model.params.candidates_per_node}};
    return {{"format", "lesstrees-model"},
            {"schema_version", kModelSchemaVersion},
            {"scheme", model.scheme_name()},
            {"k", model.k},
            {"t", model.trees.size()},
            {"seed", model.seed},
            {"n_features", model.n_features},
            {"num_classes", model.num_classes},
            {"classes", model.classes},
            {"max_rank", model.max_rank},
            {"effective_rank", model.effective_rank},
            {"with_replacement", model.with_replacement},
            {"degenerate_fallback", model.degenerate_fallback},
            {"params", std::move(params)},
            {"trees", std::move(trees)}};
}

EnsembleModel model_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "lesstrees-model") throw ParseError("model: not a lesstrees model");
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw ParseError("model: unsupported schema_version " + std::to_string(version));

        EnsembleModel model;
        const auto scheme = j.at("scheme").get<std::string>();
        if (scheme == "rf") {
            model.kind = EnsembleKind::random_forest;
        } else {
            model.kind = EnsembleKind::less;
            model.scheme = parse_scheme(scheme);
        }
        model.k = j.at("k").get<std::size_t>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.n_features = j.at("n_features").get<std::size_t>();
        model.num_classes = j.at("num_classes").get<std::size_t>();
        model.classes = j.value("classes", std::vector<std::string>{});
        model.max_rank = j.value("max_rank", std::size_t{0});
        model.effective_rank = j.value("effective_rank", std::size_t{0});
        model.with_replacement = j.value("with_replacement", false);
        model.degenerate_fallback = j.value("degenerate_fallback", false);

        const auto& params = j.at("params");
        model.params.min_samples_split = params.at("min_samples_split").get<std::size_t>();
        if (!params.at("max_depth").is_null()) model.params.max_depth = params.at("max_depth").get<std::size_t>();
        model.params.split_mode = parse_split_mode(params.at("split_mode").get<std::string>());
        model.params.candidates_per_node = params.at("candidates_per_node").get<std::size_t>();

        for (const auto& tree : j.at("trees")) {
            model.trees.push_back(tree_from_json(tree));
            if (model.trees.back().num_classes() != model.num_classes)
                throw ParseError("model: tree class count disagrees with the model");
            if (model.trees.back().required_features() > model.n_features)
                throw ParseError("model: tree references a feature beyond n_features");
        }
        if (model.trees.size() != j.at("t").get<std::size_t>()) throw ParseError("model: tree count mismatch");
        if (!model.classes.empty() && model.classes.size() != model.num_classes)
            throw ParseError("model: class table size mismatch");
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

void save_model(const EnsembleModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << model_to_json(model).dump() << '\n';
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace lesstrees
