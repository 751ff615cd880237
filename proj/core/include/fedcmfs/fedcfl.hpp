#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedcmfs/federation.hpp"

namespace fedcmfs {

// One screened variable with its weighted empty-cond statistics.
struct CorrelationEntry {
    int32_t variable = -1;
    double c = 0.0;
    double p = 1.0;
};

// Ordered candidate set for one target; instantiates M_i, CPC, PC, sel and
// CanF depending on which stage produced it.
struct CandidateSet {
    int32_t target = -1;
    std::vector<CorrelationEntry> entries;

    bool contains(int32_t variable) const {
        for (const auto& e : entries)
            if (e.variable == variable) return true;
        return false;
    }

    std::vector<int32_t> variables() const {
        std::vector<int32_t> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.variable);
        return out;
    }
};

struct FedParams {
    double alpha = 0.05;
    double k1 = 0.1;
    double k2 = 0.1;
    int max_cond = 3;
    // Alg. 2 line 9 as printed admits independent features to sel(Y_i); the
    // surrounding prose admits dependent ones. Default follows the prose.
    bool fedcfr_pseudocode_phase1 = false;
};

// Phase I: one empty-cond query per (target, v) pair, batched; survivors are
// the pairs decided dependent, sorted by weighted C descending (ties by
// ascending index).
std::vector<CandidateSet> phase1_screen(FederationHandle& handle, const std::vector<int32_t>& targets,
                                        double alpha);

// Phase II: forward-backward pruning of one screened candidate set.
// Candidates enter CPC in order; after each admission every member is
// re-tested against conditioning subsets of the current CPC (sizes 0..max_cond,
// lexicographic), and the first independence removes it.
CandidateSet phase2_forward_backward(FederationHandle& handle, const CandidateSet& m_i, int max_cond,
                                     double alpha);

// Both phases for each target. Targets are usually labels; FedCFC calls this
// with feature targets for the symmetry check.
std::map<int32_t, CandidateSet> fedcfl(FederationHandle& handle, const std::vector<int32_t>& targets,
                                       const FedParams& params);

} // namespace fedcmfs
