#include "fedcmfs/fedcfr.hpp"

#include <algorithm>
#include <cmath>

#include "fedcmfs/subsets.hpp"
#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

std::vector<int32_t> labels_in(const MultiLabelDataset& ds, const CandidateSet& pc) {
    std::vector<int32_t> out;
    for (const auto& e : pc.entries)
        if (ds.is_label(e.variable)) out.push_back(e.variable);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

RetrievalCandidateSet identify_candidates(FederationHandle& handle, int32_t label, const CandidateSet& pc,
                                          double k1, double alpha, bool pseudocode_variant) {
    if (!(k1 > 0.0) || k1 > 1.0) throw_config("k1 must lie in (0, 1]");
    RetrievalCandidateSet out;
    out.label = label;
    const MultiLabelDataset& ds = handle.data();
    if (labels_in(ds, pc).empty()) return out; // retrieval only fires when labels mask the PC

    std::vector<int32_t> probes;
    std::vector<CiQuery> queries;
    for (int32_t f = 0; f < ds.n_features(); ++f) {
        if (pc.contains(f)) continue;
        probes.push_back(f);
        queries.push_back(CiQuery{label, f, {}});
    }
    const std::vector<AggregateResult> aggs = handle.query_all(queries);

    for (size_t i = 0; i < probes.size(); ++i) {
        const bool independent = decide_independent(aggs[i], alpha);
        const bool keep = pseudocode_variant ? independent : !independent;
        if (keep) out.entries.push_back(CorrelationEntry{probes[i], aggs[i].weighted_c, aggs[i].weighted_p});
    }

    std::stable_sort(out.entries.begin(), out.entries.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
        if (a.c != b.c) return a.c > b.c;
        return a.variable < b.variable;
    });
    const auto cut = static_cast<size_t>(std::ceil(k1 * static_cast<double>(out.entries.size())));
    if (out.entries.size() > cut) out.entries.resize(cut);
    return out;
}

CandidateSet retrieve_missed(FederationHandle& handle, int32_t label, CandidateSet pc,
                             const RetrievalCandidateSet& candidates, int max_cond, double alpha,
                             std::vector<RetrievalWitness>* witnesses) {
    const MultiLabelDataset& ds = handle.data();
    const std::vector<int32_t> pc_labels = labels_in(ds, pc);

    for (int32_t yj : pc_labels) {
        if (!pc.contains(yj)) continue;

        // Snapshot the S search space: additions during this pass must not
        // widen it.
        std::vector<int32_t> snapshot = pc.variables();
        std::sort(snapshot.begin(), snapshot.end());

        for (const CorrelationEntry& cand : candidates.entries) {
            const int32_t x = cand.variable;
            if (pc.contains(x)) continue; // certified by an earlier label pass

            bool added = false;
            for (int size = 1; size <= max_cond && !added; ++size) {
                for_each_combination(snapshot, size, [&](std::span<const int32_t> s) {
                    bool has_yj = false;
                    for (int32_t v : s)
                        if (v == yj) {
                            has_yj = true;
                            break;
                        }
                    if (!has_yj) return true;

                    std::vector<int32_t> s_full(s.begin(), s.end());
                    std::vector<int32_t> s_minus;
                    s_minus.reserve(s_full.size() - 1);
                    for (int32_t v : s_full)
                        if (v != yj) s_minus.push_back(v);

                    // Both triplets travel as one request, as the retrieval
                    // round does.
                    TestRequest req = handle.make_request({CiQuery{x, label, s_full}, CiQuery{x, label, s_minus}});
                    const auto responses = handle.broadcast(req);
                    const AggregateResult with_yj = handle.aggregate(responses, 0);
                    const AggregateResult without_yj = handle.aggregate(responses, 1);

                    if (decide_independent(with_yj, alpha) && !decide_independent(without_yj, alpha)) {
                        pc.entries.push_back(CorrelationEntry{x, cand.c, cand.p});
                        if (witnesses)
                            witnesses->push_back(RetrievalWitness{label, x, s_full, with_yj.weighted_p,
                                                                  without_yj.weighted_p});
                        added = true;
                        return false;
                    }
                    return true;
                });
            }
        }

        pc.entries.erase(std::remove_if(pc.entries.begin(), pc.entries.end(),
                                        [&](const CorrelationEntry& e) { return e.variable == yj; }),
                         pc.entries.end());
    }
    return pc;
}

std::map<int32_t, CandidateSet> fedcfr(FederationHandle& handle, const std::map<int32_t, CandidateSet>& pc_map,
                                       const FedParams& params, std::vector<RetrievalWitness>* witnesses) {
    std::map<int32_t, CandidateSet> out;
    for (const auto& [label, pc] : pc_map) {
        if (labels_in(handle.data(), pc).empty()) {
            out.emplace(label, pc);
            continue;
        }
        const RetrievalCandidateSet candidates =
            identify_candidates(handle, label, pc, params.k1, params.alpha, params.fedcfr_pseudocode_phase1);
        out.emplace(label, retrieve_missed(handle, label, pc, candidates, params.max_cond, params.alpha, witnesses));
    }
    return out;
}

} // namespace fedcmfs
