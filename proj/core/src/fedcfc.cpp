#include "fedcmfs/fedcfc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

SelectionResult fedcfc(FederationHandle& handle, const std::map<int32_t, CandidateSet>& pc_sr,
                       const FedParams& params) {
    if (!(params.k2 > 0.0) || params.k2 > 1.0) throw_config("k2 must lie in (0, 1]");
    const MultiLabelDataset& ds = handle.data();

    SelectionResult result;
    // The same feature can sit in several PC sets; its symmetric PC is
    // deterministic, so learn it once per run.
    std::map<int32_t, CandidateSet> symmetric_pc;

    for (const auto& [label, pc_in] : pc_sr) {
        CandidateSet pc = pc_in;
        for (const auto& e : pc.entries)
            if (ds.is_label(e.variable)) throw_internal("fedcfc expects label-free PC sets");

        // Audit the least-relevant slice: ascending weighted C, ties by index.
        std::vector<CorrelationEntry> order = pc.entries;
        std::stable_sort(order.begin(), order.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
            if (a.c != b.c) return a.c < b.c;
            return a.variable < b.variable;
        });
        const size_t canf_n =
            order.empty() ? 0 : static_cast<size_t>(std::ceil(params.k2 * static_cast<double>(order.size())));

        for (size_t i = 0; i < canf_n; ++i) {
            const int32_t fj = order[i].variable;
            auto it = symmetric_pc.find(fj);
            if (it == symmetric_pc.end()) {
                auto learned = fedcfl(handle, {fj}, params);
                it = symmetric_pc.emplace(fj, std::move(learned.at(fj))).first;
            }
            if (!it->second.contains(label)) {
                pc.entries.erase(std::remove_if(pc.entries.begin(), pc.entries.end(),
                                                [&](const CorrelationEntry& e) { return e.variable == fj; }),
                                 pc.entries.end());
            }
        }

        std::vector<int32_t> vars = pc.variables();
        std::sort(vars.begin(), vars.end());
        result.per_label_pc.emplace(label, std::move(vars));
    }

    for (const auto& [label, vars] : result.per_label_pc)
        result.selected.insert(result.selected.end(), vars.begin(), vars.end());
    std::sort(result.selected.begin(), result.selected.end());
    result.selected.erase(std::unique(result.selected.begin(), result.selected.end()), result.selected.end());
    return result;
}

SelectionResult run_fedcmfs(const MultiLabelDataset& train, const PartitionPlan& plan, const FedParams& params,
                            const FederationOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();

    FederationHandle handle(train, partition_clients(train, plan), options);

    std::vector<int32_t> labels;
    labels.reserve(static_cast<size_t>(train.n_labels()));
    for (int32_t j = 0; j < train.n_labels(); ++j) labels.push_back(train.label_var(j).index);

    const std::map<int32_t, CandidateSet> pc = fedcfl(handle, labels, params);
    std::vector<RetrievalWitness> witnesses;
    const std::map<int32_t, CandidateSet> pc_sr = fedcfr(handle, pc, params, &witnesses);
    SelectionResult result = fedcfc(handle, pc_sr, params);
    result.witnesses = std::move(witnesses);

    RunProvenance& prov = result.provenance;
    prov.seed = plan.seed;
    prov.alpha = params.alpha;
    prov.k1 = params.k1;
    prov.k2 = params.k2;
    prov.max_cond = params.max_cond;
    prov.n_clients = handle.n_clients();
    prov.batch_size = options.batch_size;
    prov.cache_enabled = options.cache_enabled;
    for (int32_t c = 0; c < handle.n_clients(); ++c) prov.tests_per_client.push_back(handle.tests_executed(c));
    prov.ci_tests_total = handle.total_tests_executed();
    prov.cache_hits = handle.cache_hits();
    prov.cache_misses = handle.cache_misses();
    prov.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace fedcmfs
