#include "lesstrees/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lesstrees/error.hpp"
#include "lesstrees/rng.hpp"

namespace lesstrees {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC-4180 style: quoted fields may contain the delimiter, newlines and
// doubled quotes. Blank lines are skipped.
std::vector<CsvRecord> parse_csv_records(const std::string& text, char delimiter, const std::string& path) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(field_quoted ? field : std::string(trim(field)));
        field.clear();
        field_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = current.fields.size() == 1 && current.fields[0].empty();
        if (!blank) records.push_back(std::move(current));
        current = CsvRecord{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && trim(field).empty()) {
            field.clear();
            in_quotes = true;
            field_quoted = true;
        } else if (ch == delimiter) {
            end_field();
        } else if (ch == '\n') {
            ++line;
            end_record();
        } else if (field_quoted) {
            if (ch != ' ' && ch != '\t' && ch != '\r')
                throw ParseError(path + ": line " + std::to_string(line) + ": unexpected '" + std::string(1, ch) +
                                 "' after a closing quote");
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw ParseError(path + ": unterminated quoted field starting near line " + std::to_string(line));
    if (!field.empty() || !current.fields.empty()) end_record();
    return records;
}

std::size_t resolve_label_column(const std::string& spec, const std::vector<std::string>* header, std::size_t width,
                                 const std::string& path) {
    if (header) {
        const auto it = std::find(header->begin(), header->end(), spec);
        if (it != header->end()) return static_cast<std::size_t>(it - header->begin());
    }
    long long index = 0;
    const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), index);
    if (ec != std::errc() || ptr != spec.data() + spec.size())
        throw ParseError(path + ": label column '" + spec + "' not found");
    const long long resolved = index < 0 ? static_cast<long long>(width) + index : index;
    if (resolved < 0 || resolved >= static_cast<long long>(width))
        throw ParseError(path + ": label column " + spec + " outside " + std::to_string(width) + " columns");
    return static_cast<std::size_t>(resolved);
}

bool all_numeric(const std::vector<std::string>& labels) {
    return std::all_of(labels.begin(), labels.end(), [](const std::string& s) {
        const auto v = parse_double(s);
        return v && std::isfinite(*v);
    });
}

}  // namespace

std::pair<std::vector<int>, std::vector<std::string>> encode_labels(const std::vector<std::string>& raw) {
    std::vector<std::string> classes(raw);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (all_numeric(classes)) {
        std::stable_sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
            return *parse_double(a) < *parse_double(b);
        });
    }
    std::vector<int> codes(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        codes[i] = static_cast<int>(std::find(classes.begin(), classes.end(), raw[i]) - classes.begin());
    return {std::move(codes), std::move(classes)};
}

LabeledDataset load_csv(const std::string& path, const CsvOptions& options) {
    auto records = parse_csv_records(read_file(path), options.delimiter, path);
    std::optional<CsvRecord> header;
    if (options.has_header) {
        if (records.empty()) throw ParseError(path + ": missing header");
        header = std::move(records.front());
        records.erase(records.begin());
    }
    if (records.empty()) throw ParseError(path + ": no data rows");

    const std::size_t width = header ? header->fields.size() : records.front().fields.size();
    std::optional<std::size_t> label_col;
    if (options.label_column)
        label_col = resolve_label_column(*options.label_column, header ? &header->fields : nullptr, width, path);
    const std::size_t d = width - (label_col ? 1 : 0);
    if (d == 0) throw ParseError(path + ": no feature columns");

    const std::size_t n = records.size();
    std::vector<double> values(n * d);
    std::vector<std::string> raw_labels;
    raw_labels.reserve(label_col ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != width)
            throw ParseError(path + ": line " + std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) +
                             " fields, expected " + std::to_string(width));
        std::size_t j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (label_col && c == *label_col) {
                raw_labels.push_back(rec.fields[c]);
                continue;
            }
            const auto v = parse_double(rec.fields[c]);
            if (!v || !std::isfinite(*v))
                throw ParseError(path + ": line " + std::to_string(rec.line) + ", column " + std::to_string(c + 1) +
                                 ": cannot parse '" + rec.fields[c] + "' as a finite number");
            values[j * n + i] = *v;
            ++j;
        }
    }

    LabeledDataset out{DataMatrix(n, d, std::move(values)), {}, {}};
    if (label_col) std::tie(out.labels, out.classes) = encode_labels(raw_labels);
    return out;
}

void write_csv(const LabeledDataset& data, const std::string& path, bool header, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    const auto& a = data.matrix;
    if (header) {
        for (std::size_t j = 0; j < a.cols(); ++j) out << (j ? std::string(1, delimiter) : "") << 'x' << j;
        if (data.has_labels()) out << delimiter << "label";
        out << '\n';
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out << delimiter;
            out << format_double(a(i, j));
        }
        if (data.has_labels()) out << delimiter << data.classes[static_cast<std::size_t>(data.labels[i])];
        out << '\n';
    }
}

LabeledDataset load_libsvm(const std::string& path, std::optional<std::size_t> n_features) {
    const std::string text = read_file(path);
    struct Entry {
        std::size_t row, col;
        double value;
    };
    std::vector<Entry> entries;
    std::vector<std::string> raw_labels;
    std::size_t d = 0;

    std::istringstream lines(text);
    std::string line_text;
    std::size_t line = 0;
    while (std::getline(lines, line_text)) {
        ++line;
        std::string_view view(line_text);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;

        std::istringstream tokens{std::string(view)};
        std::string token;
        tokens >> token;
        const std::size_t row = raw_labels.size();
        raw_labels.push_back(token);
        std::size_t previous = 0;
        while (tokens >> token) {
            const auto colon = token.find(':');
            const auto where = path + ": line " + std::to_string(line) + ": ";
            if (colon == std::string::npos) throw ParseError(where + "malformed token '" + token + "'");
            std::size_t index = 0;
            const auto [p, ec] = std::from_chars(token.data(), token.data() + colon, index);
            if (ec != std::errc() || p != token.data() + colon || index == 0)
                throw ParseError(where + "bad feature index in '" + token + "'");
            const auto value = parse_double(std::string_view(token).substr(colon + 1));
            if (!value || !std::isfinite(*value)) throw ParseError(where + "bad feature value in '" + token + "'");
            if (index <= previous) throw ParseError(where + "feature indices must be strictly increasing");
            if (n_features && index > *n_features)
                throw ParseError(where + "feature index " + std::to_string(index) + " exceeds " +
                                 std::to_string(*n_features));
            previous = index;
            d = std::max(d, index);
            entries.push_back({row, index - 1, *value});
        }
    }
    if (raw_labels.empty()) throw ParseError(path + ": no data rows");
    if (n_features) d = *n_features;
    if (d == 0) d = 1;

    const std::size_t n = raw_labels.size();
    std::vector<double> values(n * d, 0.0);
    for (const auto& e : entries) values[e.col * n + e.row] = e.value;
    LabeledDataset out{DataMatrix(n, d, std::move(values)), {}, {}};
    std::tie(out.labels, out.classes) = encode_labels(raw_labels);
    return out;
}

void write_libsvm(const LabeledDataset& data, const std::string& path) {
    if (!data.has_labels()) throw InvalidArgument("write_libsvm: dataset has no labels");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    const auto& a = data.matrix;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out << data.classes[static_cast<std::size_t>(data.labels[i])];
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) out << ' ' << (j + 1) << ':' << format_double(a(i, j));
        out << '\n';
    }
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data, double test_fraction,
                                                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidArgument("train_test_split: test_fraction must be in (0, 1)");
    const std::size_t n = data.matrix.rows();
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n)
        throw InvalidArgument("train_test_split: a partition of " + std::to_string(n) + " rows would be empty");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    auto take = [&](const std::vector<std::size_t>& rows) {
        LabeledDataset part{data.matrix.select_rows(rows), {}, data.classes};
        if (data.has_labels()) {
            part.labels.reserve(rows.size());
            for (std::size_t r : rows) part.labels.push_back(data.labels[r]);
        }
        return part;
    };
    return {take(train_rows), take(test_rows)};
}

LabeledDataset standardize_columns(const LabeledDataset& data) {
    const auto& a = data.matrix;
    const std::size_t n = a.rows();
    std::vector<double> values(a.values().begin(), a.values().end());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto col = a.column(j);
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        if (var <= 0.0) continue;
        const double scale = 1.0 / std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i) values[j * n + i] *= scale;
    }
    return {DataMatrix(n, a.cols(), std::move(values)), data.labels, data.classes};
}

PlantedDataset make_planted_dataset(const PlantedConfig& config) {
    if (config.n == 0 || config.d == 0) throw InvalidArgument("make_planted_dataset: empty shape");
    if (config.n_informative == 0 || config.n_informative > config.d)
        throw InvalidArgument("make_planted_dataset: n_informative must be in [1, d]");
    if (config.class_count < 2) throw InvalidArgument("make_planted_dataset: need at least two classes");
    if (!(config.noise_scale >= 0.0) || !(config.amplification > 0.0))
        throw InvalidArgument("make_planted_dataset: noise_scale must be >= 0 and amplification > 0");

    SeededRng rng(config.seed);
    const std::size_t n = config.n;
    const std::size_t d = config.d;

    // Informative column positions: a seeded uniform subset.
    std::vector<std::size_t> informative;
    SeededRng placement = rng.child(0);
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < config.n_informative; ++i) std::swap(perm[i], perm[i + placement.below(d - i)]);
    informative.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(config.n_informative));
    std::sort(informative.begin(), informative.end());
    std::vector<char> is_informative(d, 0);
    for (std::size_t j : informative) is_informative[j] = 1;

    const double norm = config.amplification / std::sqrt(1.0 + config.noise_scale * config.noise_scale);
    const std::size_t groups = (config.n_informative + 1) / 2;
    std::vector<double> values(n * d);
    std::vector<std::string> raw_labels(n);
    std::vector<int> signs(config.n_informative);
    SeededRng draws = rng.child(1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t next_informative = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (is_informative[j]) {
                const int s = (draws.next_u64() >> 63) ? 1 : -1;
                signs[next_informative++] = s;
                values[j * n + i] = norm * (static_cast<double>(s) + config.noise_scale * draws.normal());
            } else {
                values[j * n + i] = draws.normal();
            }
        }
        std::size_t count = 0;
        int first_bit = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            int bit = signs[2 * g] > 0 ? 1 : 0;
            if (2 * g + 1 < signs.size()) bit ^= signs[2 * g + 1] > 0 ? 1 : 0;
            if (g == 0) first_bit = bit;
            count += static_cast<std::size_t>(bit);
        }
        const double score = static_cast<double>(count) + 0.5 * first_bit;
        auto label = static_cast<std::size_t>(std::floor(static_cast<double>(config.class_count) * score /
                                                         static_cast<double>(groups + 1)));
        label = std::min(label, config.class_count - 1);
        raw_labels[i] = std::to_string(label);
    }

    PlantedDataset out{{DataMatrix(n, d, std::move(values)), {}, {}}, std::move(informative)};
    std::tie(out.data.labels, out.data.classes) = encode_labels(raw_labels);
    return out;
}

}  // namespace lesstrees
