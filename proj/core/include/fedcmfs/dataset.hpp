#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

// Multi-label dataset over the unified variable universe V = F ∪ Y.
// All m+q columns are materialized column-major as doubles so CI tests can
// address features and labels uniformly: features occupy global indices
// [0, m), labels [m, m+q). Discrete features hold dense 0-based category
// codes; labels always hold 0/1.
class MultiLabelDataset {
public:
    MultiLabelDataset() = default;
    MultiLabelDataset(DataKind kind,
                      std::vector<std::string> feature_names,
                      std::vector<std::string> label_names,
                      std::vector<double> column_major_values,
                      int64_t n_samples);

    int64_t n_samples() const { return n_samples_; }
    int32_t n_features() const { return static_cast<int32_t>(feature_names_.size()); }
    int32_t n_labels() const { return static_cast<int32_t>(label_names_.size()); }
    int32_t n_variables() const { return n_features() + n_labels(); }

    DataKind data_kind() const { return data_kind_; }

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& label_names() const { return label_names_; }

    // Contiguous column of length n_samples().
    const double* column(int32_t var) const { return values_.data() + static_cast<size_t>(var) * static_cast<size_t>(n_samples_); }

    bool is_label(int32_t var) const { return var >= n_features(); }
    VariableId variable(int32_t var) const { return {var, is_label(var) ? VarKind::Label : VarKind::Feature}; }
    VariableId feature_var(int32_t i) const { return {i, VarKind::Feature}; }
    VariableId label_var(int32_t j) const { return {n_features() + j, VarKind::Label}; }

    const std::string& variable_name(int32_t var) const {
        return is_label(var) ? label_names_[static_cast<size_t>(var - n_features())]
                             : feature_names_[static_cast<size_t>(var)];
    }

    // True when the column held a single value at load time. CI tests treat
    // such columns as independent of everything; kept so indices stay stable.
    bool constant_column(int32_t var) const { return constant_flags_[static_cast<size_t>(var)]; }
    const std::vector<bool>& constant_flags() const { return constant_flags_; }

    // Discrete datasets: code -> original token, per feature column
    // (first-appearance coding for CSV, declaration order for ARFF).
    const std::vector<std::vector<std::string>>& category_maps() const { return category_maps_; }
    void set_category_maps(std::vector<std::vector<std::string>> maps) { category_maps_ = std::move(maps); }

    // New dataset containing the given rows (in the given order).
    MultiLabelDataset subset(const std::vector<int64_t>& rows) const;

private:
    DataKind data_kind_ = DataKind::Discrete;
    std::vector<std::string> feature_names_;
    std::vector<std::string> label_names_;
    std::vector<double> values_; // column-major, (m+q) * s
    int64_t n_samples_ = 0;
    std::vector<bool> constant_flags_;
    std::vector<std::vector<std::string>> category_maps_;

    void recompute_constant_flags();
};

enum class FileFormat { Csv, Arff };

// CSV: header row, comma separated; trailing `label_count` columns are the
// labels. ARFF: labels come from a MEKA-style "-C <n>" marker in @relation
// when present (n>0 leading, n<0 trailing), else the trailing `label_count`
// attributes.
MultiLabelDataset load_dataset(const std::string& path, FileFormat format, int32_t label_count, DataKind kind);

// Serialize as CSV (discrete features written as their original tokens);
// load_dataset(save -> load) reproduces the in-memory structure exactly.
void save_csv(const MultiLabelDataset& ds, const std::string& path);

struct ClientShard {
    int32_t client_id = 0;
    std::vector<int64_t> row_indices; // sorted ascending, no duplicates
    int64_t weight = 0;               // == row_indices.size()
};

struct PartitionPlan {
    int32_t n_clients = 1;
    double fraction_low = 0.4;
    double fraction_high = 0.6;
    uint64_t seed = 0;
};

// One shard per client; each shard's size is uniform in
// [floor(low*s), floor(high*s)] and its rows are drawn uniformly without
// replacement. Deterministic given plan.seed; overlap across clients is
// allowed and unmanaged.
std::vector<ClientShard> partition_clients(const MultiLabelDataset& ds, const PartitionPlan& plan);

// Disjoint, exhaustive row split. Test side gets floor(test_fraction*s),
// clamped so both sides keep at least one row.
std::pair<MultiLabelDataset, MultiLabelDataset> train_test_split(const MultiLabelDataset& ds,
                                                                 double test_fraction,
                                                                 uint64_t seed);

} // namespace fedcmfs
