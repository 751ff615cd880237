#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedcmfs/fedcfl.hpp"

namespace fedcmfs {

// Discarded features still dependent on the label at the empty conditioning
// set, truncated to the strongest k1 fraction.
struct RetrievalCandidateSet {
    int32_t label = -1;
    std::vector<CorrelationEntry> entries; // features only, descending c
};

// Certificate for one recovered feature: conditioning on s made the feature
// independent of the label, dropping y_j restored dependence.
struct RetrievalWitness {
    int32_t label = -1;
    int32_t feature = -1;
    std::vector<int32_t> s;
    double p_with = 1.0;    // weighted P of (feature ⊥ label | s)
    double p_without = 1.0; // weighted P of (feature ⊥ label | s \ {y_j})
};

// Phase I: screen features outside pc. Runs only when pc holds at least one
// label; survivors are dependence-screened (or independence-screened under
// the pseudocode variant), sorted by c descending and cut to ceil(k1 * count).
RetrievalCandidateSet identify_candidates(FederationHandle& handle, int32_t label, const CandidateSet& pc,
                                          double k1, double alpha, bool pseudocode_variant);

// Phase II: for each label y_j in pc, certify candidates via the paired tests
// and append the certified ones; y_j is dropped once its pass completes.
// Returns pc with only feature members. The S search space is snapshotted per
// label pass, so additions never widen it mid-pass.
CandidateSet retrieve_missed(FederationHandle& handle, int32_t label, CandidateSet pc,
                             const RetrievalCandidateSet& candidates, int max_cond, double alpha,
                             std::vector<RetrievalWitness>* witnesses = nullptr);

// Per-label composition over all labels; output PC sets are label-free.
std::map<int32_t, CandidateSet> fedcfr(FederationHandle& handle, const std::map<int32_t, CandidateSet>& pc_map,
                                       const FedParams& params,
                                       std::vector<RetrievalWitness>* witnesses = nullptr);

} // namespace fedcmfs
