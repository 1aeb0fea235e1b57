#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lesstrees/error.hpp"
#include "lesstrees/model_io.hpp"
#include "oracles.hpp"

using namespace lesstrees;

namespace {

std::pair<DataMatrix, std::vector<int>> small_problem() {
    const auto a = oracle::random_matrix(120, 9, 21);
    std::vector<int> y(120);
    for (std::size_t i = 0; i < 120; ++i) y[i] = a(i, 2) * a(i, 5) > 0 ? 1 : 0;
    return {a, y};
}

}  // namespace

TEST_CASE("model JSON round trip") {
    const auto [a, y] = small_problem();
    LessOptions options;
    options.trees = 6;
    options.k = 4;
    options.tree.max_depth = 5;
    auto model = train_less(a, y, 2, options);
    model.classes = {"no", "yes"};
    const auto j = model_to_json(model);
    CHECK(j.at("format") == "lesstrees-model");
    CHECK(j.at("schema_version") == kModelSchemaVersion);
    CHECK(j.at("scheme") == "leverage");
    CHECK(j.at("k") == 4);
    CHECK(j.at("t") == 6);

    const auto back = model_from_json(j);
    CHECK(back.trees == model.trees);
    CHECK(back.classes == model.classes);
    CHECK(back.params.max_depth == std::optional<std::size_t>(5));
    CHECK(model_to_json(back) == j);
    CHECK(predict_all(back, a) == predict_all(model, a));

    RfOptions rf;
    rf.trees = 3;
    const auto forest = train_rf(a, y, 2, rf);
    const auto forest_back = model_from_json(model_to_json(forest));
    CHECK(forest_back.kind == EnsembleKind::random_forest);
    CHECK(forest_back.trees == forest.trees);
    CHECK(forest_back.params.split_mode == SplitMode::per_node_uniform);
}

TEST_CASE("model files are byte-identical for equal seeds") {
    const auto [a, y] = small_problem();
    LessOptions options;
    options.trees = 4;
    options.k = 3;
    const auto dir = std::filesystem::temp_directory_path() / "lesstrees_model_io";
    std::filesystem::create_directories(dir);
    save_model(train_less(a, y, 2, options), (dir / "a.json").string());
    save_model(train_less(a, y, 2, options), (dir / "b.json").string());
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(load_model((dir / "a.json").string()).trees.size() == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("model loading errors") {
    const auto [a, y] = small_problem();
    LessOptions options;
    options.trees = 2;
    options.k = 3;
    auto j = model_to_json(train_less(a, y, 2, options));
    auto bad_version = j;
    bad_version["schema_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad_version), ParseError);
    auto bad_format = j;
    bad_format["format"] = "other";
    CHECK_THROWS_AS(model_from_json(bad_format), ParseError);
    auto bad_tree = j;
    bad_tree["trees"][0]["nodes"][0]["left"] = 0;
    CHECK_THROWS_AS(model_from_json(bad_tree), ParseError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ParseError);
}
