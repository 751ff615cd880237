#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedcmfs/fedcfr.hpp"

namespace fedcmfs {

struct RunProvenance {
    uint64_t seed = 0;
    double alpha = 0.05;
    double k1 = 0.1;
    double k2 = 0.1;
    int max_cond = 3;
    int32_t n_clients = 0;
    int32_t batch_size = 0;
    bool cache_enabled = true;
    std::vector<uint64_t> tests_per_client;
    uint64_t ci_tests_total = 0;
    uint64_t cache_hits = 0;
    uint64_t cache_misses = 0;
    double wall_seconds = 0.0; // only nondeterministic field
};

struct SelectionResult {
    std::map<int32_t, std::vector<int32_t>> per_label_pc; // label -> sorted feature indices
    std::vector<int32_t> selected;                        // sorted, deduplicated union
    RunProvenance provenance;
    std::vector<RetrievalWitness> witnesses;
};

// Symmetry correction: the weakest k2 fraction of each PC set is audited by
// learning that feature's own PC with fedcfl; features whose PC misses the
// label are dropped. sel is the union of the corrected per-label sets.
SelectionResult fedcfc(FederationHandle& handle, const std::map<int32_t, CandidateSet>& pc_sr,
                       const FedParams& params);

// Whole pipeline: partition -> fedcfl over all labels -> fedcfr -> fedcfc.
// Deterministic given (dataset, plan.seed, params); options only change
// execution shape (batching, threads, cache), never the selection.
SelectionResult run_fedcmfs(const MultiLabelDataset& train, const PartitionPlan& plan, const FedParams& params,
                            const FederationOptions& options = {});

} // namespace fedcmfs
