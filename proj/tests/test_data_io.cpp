#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "doctest.h"
#include "lesstrees/data_io.hpp"
#include "lesstrees/ensemble.hpp"
#include "lesstrees/error.hpp"
#include "oracles.hpp"

using namespace lesstrees;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() : path(std::filesystem::temp_directory_path() / "lesstrees_data_io") {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("encode_labels orders numeric labels numerically") {
    const auto [codes, classes] = encode_labels({"10", "-1", "2", "10"});
    CHECK(classes == std::vector<std::string>{"-1", "2", "10"});
    CHECK(codes == std::vector<int>{2, 0, 1, 2});
    const auto [c2, k2] = encode_labels({"b", "a", "10", "b"});
    CHECK(k2 == std::vector<std::string>{"10", "a", "b"});
    CHECK(c2 == std::vector<int>{2, 1, 0, 2});
}

TEST_CASE("load_csv basic file") {
    TempDir tmp;
    const auto path = tmp.write("basic.csv", "x,y,label\n1,2,a\n3,4,b\n");
    CsvOptions options;
    options.has_header = true;
    const auto ds = load_csv(path, options);
    CHECK(ds.matrix == DataMatrix::from_rows({{1, 2}, {3, 4}}));
    CHECK(ds.classes == std::vector<std::string>{"a", "b"});
    CHECK(ds.labels == std::vector<int>{0, 1});

    options.label_column.reset();
    CHECK_THROWS_AS(load_csv(path, options), ParseError);  // "a" is not a number

    const auto numeric = tmp.write("numeric.csv", "x,y,z\n1,2,7\n3,4,8\n");
    options.label_column = "x";
    const auto by_name = load_csv(numeric, options);
    CHECK(by_name.matrix == DataMatrix::from_rows({{2, 7}, {4, 8}}));
    CHECK(by_name.classes == std::vector<std::string>{"1", "3"});
    options.label_column = "0";
    CHECK(load_csv(numeric, options).matrix == by_name.matrix);
    options.label_column = "-2";
    CHECK(load_csv(numeric, options).matrix == DataMatrix::from_rows({{1, 7}, {3, 8}}));
}

TEST_CASE("load_csv quoting, delimiters and unlabeled files") {
    TempDir tmp;
    const auto quoted = tmp.write("q.csv", "\"1.5\";2;\"cat; dog\"\r\n-3;4e1;\"say \"\"hi\"\"\"\n");
    CsvOptions options;
    options.delimiter = ';';
    const auto ds = load_csv(quoted, options);
    CHECK(ds.matrix == DataMatrix::from_rows({{1.5, 2}, {-3, 40}}));
    REQUIRE(ds.classes.size() == 2);
    CHECK(ds.classes[0] == "cat; dog");
    CHECK(ds.classes[1] == "say \"hi\"");
    CHECK_THROWS_AS(load_csv(tmp.write("junk.csv", "\"1\"x,2\n")), ParseError);

    const auto plain = tmp.write("u.csv", "1,2\n3,4\n");
    CsvOptions unlabeled;
    unlabeled.label_column.reset();
    const auto u = load_csv(plain, unlabeled);
    CHECK_FALSE(u.has_labels());
    CHECK(u.matrix.cols() == 2);
}

TEST_CASE("load_csv errors name the location") {
    TempDir tmp;
    auto message = [](const std::string& path, CsvOptions options = {}) {
        try {
            load_csv(path, options);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const auto nan = message(tmp.write("nan.csv", "1,2,a\n3,NaN,b\n"));
    CHECK(nan.find("line 2") != std::string::npos);
    CHECK(nan.find("column 2") != std::string::npos);
    CHECK(message(tmp.write("inf.csv", "1,inf,a\n")).find("line 1") != std::string::npos);
    CHECK(message(tmp.write("bad.csv", "1,x,a\n")).find("column 2") != std::string::npos);
    CHECK(message(tmp.write("ragged.csv", "1,2,a\n3,b\n")).find("line 2") != std::string::npos);
    CsvOptions missing;
    missing.has_header = true;
    missing.label_column = "target";
    CHECK(!message(tmp.write("h.csv", "x,y\n1,2\n"), missing).empty());
    missing.label_column = "5";
    CHECK(!message(tmp.write("h2.csv", "x,y\n1,2\n"), missing).empty());
    CHECK(!message(tmp.file("absent.csv")).empty());
}

TEST_CASE("CSV round trip") {
    TempDir tmp;
    const auto a = oracle::random_matrix(25, 6, 3);
    std::vector<int> y(25);
    for (std::size_t i = 0; i < 25; ++i) y[i] = static_cast<int>(i % 3);
    const LabeledDataset ds{a, y, {"-1", "0", "7"}};
    write_csv(ds, tmp.file("rt.csv"));
    CsvOptions options;
    options.has_header = true;
    const auto back = load_csv(tmp.file("rt.csv"), options);
    CHECK(back.matrix == a);
    CHECK(back.labels == y);
    CHECK(back.classes == ds.classes);
}

TEST_CASE("load_libsvm") {
    TempDir tmp;
    const auto ds = load_libsvm(tmp.write("a.svm", "1 1:2.0 3:1.0\n-1\n# comment\n1 2:5 # trailing\n"));
    CHECK(ds.matrix == DataMatrix::from_rows({{2, 0, 1}, {0, 0, 0}, {0, 5, 0}}));
    CHECK(ds.classes == std::vector<std::string>{"-1", "1"});
    CHECK(ds.labels == std::vector<int>{1, 0, 1});
    CHECK(load_libsvm(tmp.file("a.svm"), 5).matrix.cols() == 5);
    CHECK_THROWS_AS(load_libsvm(tmp.file("a.svm"), 2), ParseError);

    CHECK_THROWS_AS(load_libsvm(tmp.write("b.svm", "1 3:1 2:1\n")), ParseError);
    CHECK_THROWS_AS(load_libsvm(tmp.write("c.svm", "1 0:1\n")), ParseError);
    CHECK_THROWS_AS(load_libsvm(tmp.write("d.svm", "1 1:x\n")), ParseError);
    CHECK_THROWS_AS(load_libsvm(tmp.write("e.svm", "1 1-2\n")), ParseError);
    CHECK_THROWS_AS(load_libsvm(tmp.write("f.svm", "1 1:nan\n")), ParseError);
}

TEST_CASE("LIBSVM and CSV agree") {
    TempDir tmp;
    auto values = oracle::random_matrix(15, 5, 8).values();
    std::vector<double> sparse(values.begin(), values.end());
    for (std::size_t i = 0; i < sparse.size(); i += 3) sparse[i] = 0.0;
    const DataMatrix a(15, 5, sparse);
    std::vector<int> y(15);
    for (std::size_t i = 0; i < 15; ++i) y[i] = static_cast<int>(i % 2);
    const LabeledDataset ds{a, y, {"1", "2"}};
    write_libsvm(ds, tmp.file("x.svm"));
    write_csv(ds, tmp.file("x.csv"));
    CsvOptions options;
    options.has_header = true;
    const auto from_svm = load_libsvm(tmp.file("x.svm"), 5);
    const auto from_csv = load_csv(tmp.file("x.csv"), options);
    CHECK(from_svm.matrix == from_csv.matrix);
    CHECK(from_svm.matrix == a);
    CHECK(from_svm.labels == from_csv.labels);
}

TEST_CASE("train_test_split") {
    std::vector<double> values(10);
    std::iota(values.begin(), values.end(), 0.0);
    const LabeledDataset ds{DataMatrix(10, 1, values), {0, 1, 0, 1, 0, 1, 0, 1, 1, 1}, {"a", "b"}};
    const auto [train, test] = train_test_split(ds, 0.3, 4);
    CHECK(train.matrix.rows() == 7);
    CHECK(test.matrix.rows() == 3);
    std::vector<double> all;
    for (const auto* part : {&train, &test})
        for (std::size_t i = 0; i < part->matrix.rows(); ++i) all.push_back(part->matrix(i, 0));
    std::sort(all.begin(), all.end());
    CHECK(all == values);

    std::map<int, int> counts;
    for (const auto* part : {&train, &test})
        for (std::size_t i = 0; i < part->labels.size(); ++i) {
            ++counts[part->labels[i]];
            CHECK(part->labels[i] == ds.labels[static_cast<std::size_t>(part->matrix(i, 0))]);
        }
    CHECK(counts == std::map<int, int>{{0, 4}, {1, 6}});
    CHECK(train.classes == ds.classes);

    const auto [train2, test2] = train_test_split(ds, 0.3, 4);
    CHECK(train2.matrix == train.matrix);
    CHECK(test2.matrix == test.matrix);
    CHECK(train_test_split(ds, 0.3, 5).second.matrix != test.matrix);

    CHECK_THROWS_AS(train_test_split(ds, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(train_test_split(ds, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(train_test_split(ds, 0.01, 1), InvalidArgument);
}

TEST_CASE("standardize_columns scales to unit variance") {
    const auto a = DataMatrix::from_rows({{1, 5, 2}, {3, 5, 4}, {5, 5, 9}});
    const auto s = standardize_columns({a, {0, 1, 0}, {"a", "b"}});
    for (std::size_t j : {0, 2}) {
        const auto col = s.matrix.column(j);
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / 3;
        double var = 0;
        for (double v : col) var += (v - mean) * (v - mean);
        CHECK(var / 3 == doctest::Approx(1.0));
        CHECK(s.matrix(0, j) / s.matrix(1, j) == doctest::Approx(a(0, j) / a(1, j)));
    }
    CHECK(s.matrix(0, 1) == 5);
}

TEST_CASE("make_planted_dataset") {
    PlantedConfig cfg;
    cfg.n = 1000;
    cfg.d = 100;
    cfg.n_informative = 10;
    const auto planted = make_planted_dataset(cfg);
    CHECK(planted.informative.size() == 10);
    CHECK(std::is_sorted(planted.informative.begin(), planted.informative.end()));
    CHECK(planted.data.classes == std::vector<std::string>{"0", "1"});

    const auto norms = oracle::squared_norms(planted.data.matrix);
    double inf = 0, noise = 0;
    for (std::size_t j = 0; j < 100; ++j)
        (std::binary_search(planted.informative.begin(), planted.informative.end(), j) ? inf : noise) += norms[j];
    const double ratio = (inf / 10) / (noise / 90);
    CHECK(std::abs(ratio / 100.0 - 1.0) < 0.1);

    std::size_t ones = 0;
    for (int v : planted.data.labels) ones += static_cast<std::size_t>(v);
    CHECK(ones > 350);
    CHECK(ones < 650);

    const auto again = make_planted_dataset(cfg);
    CHECK(again.data.matrix == planted.data.matrix);
    CHECK(again.data.labels == planted.data.labels);

    cfg.n_informative = cfg.d;
    CHECK(make_planted_dataset(cfg).informative.size() == cfg.d);
    cfg.n_informative = cfg.d + 1;
    CHECK_THROWS_AS(make_planted_dataset(cfg), InvalidArgument);
}

TEST_CASE("noiseless two-feature planted data is learned exactly") {
    PlantedConfig cfg;
    cfg.n = 600;
    cfg.d = 2;
    cfg.n_informative = 2;
    cfg.noise_scale = 0.0;
    auto planted = make_planted_dataset(cfg);
    auto [train, test] = train_test_split(planted.data, 0.3, 1);
    LessOptions options;
    options.trees = 5;
    options.k = 2;
    options.scheme = Scheme::uniform;
    auto model = train_less(train.matrix, train.labels, 2, options);
    CHECK(classification_error(model, test.matrix, test.labels) == 0.0);

    // With noise columns present, leverage scores at r = 2 steer every tree
    // to the informative pair.
    cfg.d = 10;
    planted = make_planted_dataset(cfg);
    std::tie(train, test) = train_test_split(planted.data, 0.3, 1);
    options.scheme = Scheme::leverage;
    options.max_rank = 2;
    options.trees = 11;
    model = train_less(train.matrix, train.labels, 2, options);
    CHECK(classification_error(model, test.matrix, test.labels) == 0.0);
}
