#pragma once

#include <string>

#include "json.hpp"
#include "lesstrees/ensemble.hpp"
#include "lesstrees/tree.hpp"

namespace lesstrees {

inline constexpr int kModelSchemaVersion = 1;

/// {"features": [...], "num_classes": C, "nodes": [...]} where an internal
/// node is {"feature", "threshold", "left", "right"} and a leaf is {"label"}.
/// Node features index into "features"; an absent "features" means the tree
/// addresses the global columns directly.
nlohmann::json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

/// Ensemble container {format, schema_version, scheme, k, t, seed, ...,
/// trees[...]}. Timing metadata is left out so identical training runs
/// produce identical files.
nlohmann::json model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const nlohmann::json& j);

void save_model(const EnsembleModel& model, const std::string& path);
/// Throws ParseError on unreadable files or unsupported schema versions.
EnsembleModel load_model(const std::string& path);

}  // namespace lesstrees
