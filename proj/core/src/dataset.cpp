#include "fedcmfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "fedcmfs/rng.hpp"

namespace fedcmfs {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

double parse_label_cell(const std::string& raw, int64_t row, const std::string& col_name) {
    const std::string tok = trim(raw);
    if (tok == "0") return 0.0;
    if (tok == "1") return 1.0;
    // Tolerate numeric spellings like 0.0 / 1.0.
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() && *end == '\0' && (v == 0.0 || v == 1.0)) return v;
    throw_data("non-binary label value '" + tok + "' in column '" + col_name + "' at data row " + std::to_string(row));
}

struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> cells; // row-major tokens
};

RawTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open dataset file: " + path);
    RawTable t;
    std::string line;
    if (!std::getline(in, line)) throw_data("empty dataset file: " + path);
    t.column_names = split_csv_line(line);
    for (auto& n : t.column_names) n = trim(n);
    int64_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != t.column_names.size())
            throw_data("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(t.column_names.size()) + " in " + path);
        t.cells.push_back(std::move(fields));
        ++row;
    }
    return t;
}

// ARFF subset: @relation, @attribute (numeric / real / integer / {nominal}),
// @data with comma-separated rows. Nominal attributes become category codes
// in declaration order.
struct ArffTable : RawTable {
    std::vector<std::vector<std::string>> nominal_values; // empty vector => numeric attribute
    int meka_c = 0;                                       // "-C n" from @relation, 0 when absent
};

ArffTable read_arff(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open dataset file: " + path);
    ArffTable t;
    std::string line;
    bool in_data = false;
    int64_t row = 0;
    while (std::getline(in, line)) {
        std::string s = trim(line);
        if (s.empty() || s[0] == '%') continue;
        if (!in_data) {
            std::string lower = s;
            std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
            if (lower.rfind("@relation", 0) == 0) {
                const size_t cpos = s.find("-C ");
                if (cpos != std::string::npos) t.meka_c = std::atoi(s.c_str() + cpos + 3);
                continue;
            }
            if (lower.rfind("@attribute", 0) == 0) {
                std::string rest = trim(s.substr(10));
                std::string name;
                if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
                    const char q = rest[0];
                    const size_t e = rest.find(q, 1);
                    if (e == std::string::npos) throw_data("unterminated attribute name in " + path);
                    name = rest.substr(1, e - 1);
                    rest = trim(rest.substr(e + 1));
                } else {
                    const size_t e = rest.find_first_of(" \t");
                    if (e == std::string::npos) throw_data("malformed @attribute line in " + path);
                    name = rest.substr(0, e);
                    rest = trim(rest.substr(e));
                }
                t.column_names.push_back(name);
                if (!rest.empty() && rest[0] == '{') {
                    const size_t e = rest.find('}');
                    if (e == std::string::npos) throw_data("unterminated nominal list for attribute '" + name + "'");
                    std::vector<std::string> values;
                    std::stringstream ss(rest.substr(1, e - 1));
                    std::string v;
                    while (std::getline(ss, v, ',')) values.push_back(trim(v));
                    t.nominal_values.push_back(std::move(values));
                } else {
                    t.nominal_values.emplace_back();
                }
                continue;
            }
            if (lower.rfind("@data", 0) == 0) {
                in_data = true;
                continue;
            }
            continue; // ignore other headers
        }
        auto fields = split_csv_line(s);
        if (fields.size() != t.column_names.size())
            throw_data("ARFF data row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(t.column_names.size()) + " in " + path);
        for (auto& f : fields) f = trim(f);
        t.cells.push_back(std::move(fields));
        ++row;
    }
    if (t.column_names.empty()) throw_data("no @attribute declarations in " + path);
    return t;
}

} // namespace

MultiLabelDataset::MultiLabelDataset(DataKind kind,
                                     std::vector<std::string> feature_names,
                                     std::vector<std::string> label_names,
                                     std::vector<double> column_major_values,
                                     int64_t n_samples)
    : data_kind_(kind),
      feature_names_(std::move(feature_names)),
      label_names_(std::move(label_names)),
      values_(std::move(column_major_values)),
      n_samples_(n_samples) {
    if (n_features() < 1 || n_labels() < 1 || n_samples_ < 1)
        throw_data("dataset requires at least one feature, one label, and one sample");
    if (values_.size() != static_cast<size_t>(n_variables()) * static_cast<size_t>(n_samples_))
        throw_internal("dataset value buffer size mismatch");
    for (int32_t v = 0; v < n_variables(); ++v) {
        const double* col = column(v);
        for (int64_t r = 0; r < n_samples_; ++r) {
            if (!std::isfinite(col[r]))
                throw_data("non-finite value in column '" + variable_name(v) + "' at data row " + std::to_string(r));
            if (is_label(v) && col[r] != 0.0 && col[r] != 1.0)
                throw_data("non-binary label value in column '" + variable_name(v) + "' at data row " + std::to_string(r));
            if (!is_label(v) && data_kind_ == DataKind::Discrete &&
                (col[r] < 0.0 || col[r] != std::floor(col[r])))
                throw_data("discrete feature column '" + variable_name(v) + "' holds a non-code value at data row " +
                           std::to_string(r));
        }
    }
    recompute_constant_flags();
}

void MultiLabelDataset::recompute_constant_flags() {
    constant_flags_.assign(static_cast<size_t>(n_variables()), false);
    for (int32_t v = 0; v < n_variables(); ++v) {
        const double* col = column(v);
        bool constant = true;
        for (int64_t r = 1; r < n_samples_; ++r) {
            if (col[r] != col[0]) {
                constant = false;
                break;
            }
        }
        constant_flags_[static_cast<size_t>(v)] = constant;
    }
}

MultiLabelDataset MultiLabelDataset::subset(const std::vector<int64_t>& rows) const {
    if (rows.empty()) throw_data("row subset must be non-empty");
    std::vector<double> values(static_cast<size_t>(n_variables()) * rows.size());
    for (int32_t v = 0; v < n_variables(); ++v) {
        const double* src = column(v);
        double* dst = values.data() + static_cast<size_t>(v) * rows.size();
        for (size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
    }
    MultiLabelDataset out(data_kind_, feature_names_, label_names_, std::move(values), static_cast<int64_t>(rows.size()));
    out.category_maps_ = category_maps_;
    return out;
}

MultiLabelDataset load_dataset(const std::string& path, FileFormat format, int32_t label_count, DataKind kind) {
    RawTable table;
    std::vector<std::vector<std::string>> nominal; // per column; only for ARFF
    int meka_c = 0;
    if (format == FileFormat::Csv) {
        table = read_csv(path);
    } else {
        ArffTable t = read_arff(path);
        nominal = std::move(t.nominal_values);
        meka_c = t.meka_c;
        table.column_names = std::move(t.column_names);
        table.cells = std::move(t.cells);
    }

    const int32_t n_cols = static_cast<int32_t>(table.column_names.size());
    const int64_t s = static_cast<int64_t>(table.cells.size());
    if (s == 0) throw_data("dataset has no data rows: " + path);

    int32_t q = label_count;
    bool labels_leading = false;
    if (format == FileFormat::Arff && meka_c != 0) {
        q = std::abs(meka_c);
        labels_leading = meka_c > 0;
    }
    if (q < 1 || q >= n_cols)
        throw_data("label count " + std::to_string(q) + " invalid for " + std::to_string(n_cols) + " columns");
    const int32_t m = n_cols - q;

    // Map file column -> (variable slot, is_label). Labels are trailing by
    // convention; leading only for MEKA-style ARFF with positive -C.
    auto var_of_col = [&](int32_t col) -> std::pair<int32_t, bool> {
        if (labels_leading) {
            if (col < q) return {m + col, true};
            return {col - q, false};
        }
        if (col >= m) return {m + (col - m), true};
        return {col, false};
    };

    std::vector<std::string> feature_names(static_cast<size_t>(m));
    std::vector<std::string> label_names(static_cast<size_t>(q));
    for (int32_t c = 0; c < n_cols; ++c) {
        auto [slot, is_label] = var_of_col(c);
        if (is_label)
            label_names[static_cast<size_t>(slot - m)] = table.column_names[static_cast<size_t>(c)];
        else
            feature_names[static_cast<size_t>(slot)] = table.column_names[static_cast<size_t>(c)];
    }

    std::vector<double> values(static_cast<size_t>(n_cols) * static_cast<size_t>(s));
    std::vector<std::vector<std::string>> category_maps(static_cast<size_t>(m));

    for (int32_t c = 0; c < n_cols; ++c) {
        auto [slot, is_label] = var_of_col(c);
        double* dst = values.data() + static_cast<size_t>(slot) * static_cast<size_t>(s);
        const std::string& col_name = table.column_names[static_cast<size_t>(c)];
        if (is_label) {
            for (int64_t r = 0; r < s; ++r) dst[r] = parse_label_cell(table.cells[static_cast<size_t>(r)][static_cast<size_t>(c)], r, col_name);
        } else if (kind == DataKind::Continuous) {
            for (int64_t r = 0; r < s; ++r) {
                const std::string tok = trim(table.cells[static_cast<size_t>(r)][static_cast<size_t>(c)]);
                char* end = nullptr;
                const double v = std::strtod(tok.c_str(), &end);
                if (end == tok.c_str() || *end != '\0')
                    throw_data("cannot parse '" + tok + "' as a number in column '" + col_name + "' at data row " + std::to_string(r));
                if (!std::isfinite(v))
                    throw_data("non-finite value in column '" + col_name + "' at data row " + std::to_string(r));
                dst[r] = v;
            }
        } else {
            // Discrete: dense 0-based codes. ARFF nominal declarations fix the
            // coding; otherwise codes follow first appearance.
            std::vector<std::string>& cats = category_maps[static_cast<size_t>(slot)];
            std::unordered_map<std::string, int32_t> code_of;
            if (format == FileFormat::Arff && !nominal[static_cast<size_t>(c)].empty()) {
                cats = nominal[static_cast<size_t>(c)];
                for (size_t i = 0; i < cats.size(); ++i) code_of[cats[i]] = static_cast<int32_t>(i);
                for (int64_t r = 0; r < s; ++r) {
                    const std::string tok = trim(table.cells[static_cast<size_t>(r)][static_cast<size_t>(c)]);
                    auto it = code_of.find(tok);
                    if (it == code_of.end())
                        throw_data("value '" + tok + "' not in nominal declaration of column '" + col_name + "' at data row " + std::to_string(r));
                    dst[r] = static_cast<double>(it->second);
                }
            } else {
                for (int64_t r = 0; r < s; ++r) {
                    const std::string tok = trim(table.cells[static_cast<size_t>(r)][static_cast<size_t>(c)]);
                    auto it = code_of.find(tok);
                    int32_t code;
                    if (it == code_of.end()) {
                        code = static_cast<int32_t>(cats.size());
                        code_of.emplace(tok, code);
                        cats.push_back(tok);
                    } else {
                        code = it->second;
                    }
                    dst[r] = static_cast<double>(code);
                }
            }
        }
    }

    MultiLabelDataset ds(kind, std::move(feature_names), std::move(label_names), std::move(values), s);
    if (kind == DataKind::Discrete) ds.set_category_maps(std::move(category_maps));
    return ds;
}

void save_csv(const MultiLabelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write dataset file: " + path);
    out.precision(17);
    for (int32_t v = 0; v < ds.n_variables(); ++v) {
        if (v) out << ',';
        out << ds.variable_name(v);
    }
    out << '\n';
    const bool discrete = ds.data_kind() == DataKind::Discrete;
    for (int64_t r = 0; r < ds.n_samples(); ++r) {
        for (int32_t v = 0; v < ds.n_variables(); ++v) {
            if (v) out << ',';
            const double x = ds.column(v)[r];
            if (ds.is_label(v)) {
                out << static_cast<int>(x);
            } else if (discrete) {
                // Datasets built in memory may carry no category maps; their
                // codes serialize as-is.
                const auto& maps = ds.category_maps();
                const auto code = static_cast<size_t>(x);
                if (static_cast<size_t>(v) < maps.size() && code < maps[static_cast<size_t>(v)].size())
                    out << maps[static_cast<size_t>(v)][code];
                else
                    out << static_cast<int64_t>(x);
            } else {
                out << x;
            }
        }
        out << '\n';
    }
}

std::vector<ClientShard> partition_clients(const MultiLabelDataset& ds, const PartitionPlan& plan) {
    if (plan.n_clients < 1) throw_config("n_clients must be >= 1");
    if (!(plan.fraction_low > 0.0) || !(plan.fraction_low <= plan.fraction_high) || !(plan.fraction_high <= 1.0))
        throw_config("shard fraction range must satisfy 0 < low <= high <= 1");
    const int64_t s = ds.n_samples();
    const auto lo = static_cast<int64_t>(std::floor(plan.fraction_low * static_cast<double>(s)));
    const auto hi = static_cast<int64_t>(std::floor(plan.fraction_high * static_cast<double>(s)));
    if (lo < 1) throw_config("shard fraction too small: floor(low*s) must be >= 1");

    Rng rng(plan.seed);
    std::vector<ClientShard> shards;
    shards.reserve(static_cast<size_t>(plan.n_clients));
    for (int32_t c = 0; c < plan.n_clients; ++c) {
        const int64_t size = rng.range(lo, hi);
        ClientShard shard;
        shard.client_id = c;
        shard.row_indices = rng.sample_without_replacement(s, size);
        std::sort(shard.row_indices.begin(), shard.row_indices.end());
        shard.weight = static_cast<int64_t>(shard.row_indices.size());
        shards.push_back(std::move(shard));
    }
    return shards;
}

std::pair<MultiLabelDataset, MultiLabelDataset> train_test_split(const MultiLabelDataset& ds,
                                                                 double test_fraction,
                                                                 uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) throw_config("test_fraction must lie in (0, 1)");
    const int64_t s = ds.n_samples();
    if (s < 2) throw_data("cannot split a dataset with fewer than 2 rows");
    int64_t n_test = static_cast<int64_t>(std::floor(test_fraction * static_cast<double>(s)));
    n_test = std::max<int64_t>(1, std::min(n_test, s - 1));

    std::vector<int64_t> order(static_cast<size_t>(s));
    for (int64_t i = 0; i < s; ++i) order[static_cast<size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<int64_t> test_rows(order.begin(), order.begin() + n_test);
    std::vector<int64_t> train_rows(order.begin() + n_test, order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

} // namespace fedcmfs
