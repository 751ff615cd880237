#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcmfs/dataset.hpp"

namespace fedcmfs {

// Flat key=value experiment configuration. Any key can be overridden by an
// environment variable FEDCMFS_<KEY uppercased> or a --override key=value
// flag; precedence is file < environment < override.
struct RunConfig {
    std::string dataset_path;
    FileFormat format = FileFormat::Csv;
    DataKind data_kind = DataKind::Discrete;
    int32_t label_count = 0;

    std::vector<int32_t> n_clients_list{3};
    std::vector<uint64_t> seeds{1};
    double fraction_low = 0.4;
    double fraction_high = 0.6;

    double alpha = 0.05;
    double k1 = 0.1;
    double k2 = 0.1;
    int max_cond = 3;

    double test_fraction = 0.3;
    std::string train_path; // predefined split; both set => test_fraction unused
    std::string test_path;

    std::string out_dir = "out";
    bool trace_messages = false;
    bool raw_coverage = false;
    bool fedcfr_pseudocode_phase1 = false;
    bool cache_enabled = true;
    int32_t batch_size = 100;
    unsigned worker_threads = 0;

    int mlknn_k = 10;
    double mlknn_smoothing = 1.0;

    static RunConfig from_file(const std::string& path);
    void apply_key(const std::string& key, const std::string& value);
    void apply_environment();
    void validate() const;

    // Keys recognized by apply_key, for diagnostics.
    static const std::vector<std::string>& known_keys();
};

} // namespace fedcmfs
