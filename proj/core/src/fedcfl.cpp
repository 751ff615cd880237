#include "fedcmfs/fedcfl.hpp"

#include <algorithm>

#include "fedcmfs/subsets.hpp"
#include "fedcmfs/types.hpp"

namespace fedcmfs {

std::vector<CandidateSet> phase1_screen(FederationHandle& handle, const std::vector<int32_t>& targets,
                                        double alpha) {
    const int32_t nv = handle.data().n_variables();

    std::vector<CiQuery> queries;
    queries.reserve(targets.size() * static_cast<size_t>(nv - 1));
    for (int32_t t : targets) {
        for (int32_t v = 0; v < nv; ++v) {
            if (v == t) continue;
            queries.push_back(CiQuery{t, v, {}});
        }
    }

    const std::vector<AggregateResult> aggs = handle.query_all(queries);

    std::vector<CandidateSet> out;
    out.reserve(targets.size());
    size_t pos = 0;
    for (int32_t t : targets) {
        CandidateSet m_i;
        m_i.target = t;
        for (int32_t v = 0; v < nv; ++v) {
            if (v == t) continue;
            const AggregateResult& agg = aggs[pos++];
            if (!decide_independent(agg, alpha))
                m_i.entries.push_back(CorrelationEntry{v, agg.weighted_c, agg.weighted_p});
        }
        std::stable_sort(m_i.entries.begin(), m_i.entries.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
            if (a.c != b.c) return a.c > b.c;
            return a.variable < b.variable;
        });
        out.push_back(std::move(m_i));
    }
    return out;
}

CandidateSet phase2_forward_backward(FederationHandle& handle, const CandidateSet& m_i, int max_cond,
                                     double alpha) {
    if (max_cond < 1) throw_config("max_cond must be >= 1");
    CandidateSet cpc;
    cpc.target = m_i.target;

    for (const CorrelationEntry& incoming : m_i.entries) {
        cpc.entries.push_back(incoming);

        // Sweep every current member, including the newcomer, against
        // conditioning subsets of the current CPC state.
        const std::vector<int32_t> sweep = cpc.variables();
        for (int32_t vk : sweep) {
            if (!cpc.contains(vk)) continue; // removed earlier in this sweep

            std::vector<int32_t> pool = cpc.variables();
            pool.erase(std::remove(pool.begin(), pool.end(), vk), pool.end());
            std::sort(pool.begin(), pool.end());

            bool removed = false;
            for_each_subset_by_size(pool, max_cond, [&](std::span<const int32_t> cs) {
                CiQuery q{m_i.target, vk, {cs.begin(), cs.end()}};
                const AggregateResult agg = handle.round(q);
                if (decide_independent(agg, alpha)) {
                    removed = true;
                    return false; // Break: stop testing vk this round
                }
                return true;
            });
            if (removed) {
                cpc.entries.erase(std::remove_if(cpc.entries.begin(), cpc.entries.end(),
                                                 [&](const CorrelationEntry& e) { return e.variable == vk; }),
                                  cpc.entries.end());
            }
        }
    }
    return cpc;
}

std::map<int32_t, CandidateSet> fedcfl(FederationHandle& handle, const std::vector<int32_t>& targets,
                                       const FedParams& params) {
    std::map<int32_t, CandidateSet> out;
    const std::vector<CandidateSet> screened = phase1_screen(handle, targets, params.alpha);
    for (const CandidateSet& m_i : screened)
        out.emplace(m_i.target, phase2_forward_backward(handle, m_i, params.max_cond, params.alpha));
    return out;
}

} // namespace fedcmfs
