#pragma once

#include <string>
#include <vector>

#include "fedcmfs/fedcfc.hpp"
#include "fedcmfs/metrics.hpp"
#include "fedcmfs/run_config.hpp"

namespace fedcmfs {

struct CellResult {
    std::string dataset;
    int32_t n_clients = 0;
    uint64_t seed = 0;
    SelectionResult selection;
    MetricReport metrics;
    double wall_seconds = 0.0;
};

// Serialized provenance for one experiment cell (schema_version 1).
std::string cell_provenance_json(const CellResult& cell, const RunConfig& cfg,
                                 const MultiLabelDataset& train);

// results.csv (one row per cell, fixed column set) and summary.csv (means
// across seeds per client count) under cfg.out_dir.
void emit_report(const std::vector<CellResult>& cells, const RunConfig& cfg);

// Full grid over (n_clients x seeds). Returns the process exit code: 0 on
// success; config/data/internal errors map to 1/2/3.
int run_experiment(const RunConfig& cfg);

} // namespace fedcmfs
