#include <benchmark/benchmark.h>

#include <vector>

#include "fedcmfs/citest.hpp"
#include "fedcmfs/federation.hpp"
#include "fedcmfs/rng.hpp"

using namespace fedcmfs;

namespace {

MultiLabelDataset make_continuous(int32_t m, int32_t q, int64_t rows, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> values(static_cast<size_t>(m + q) * static_cast<size_t>(rows));
    for (int32_t v = 0; v < m + q; ++v)
        for (int64_t r = 0; r < rows; ++r)
            values[static_cast<size_t>(v) * static_cast<size_t>(rows) + static_cast<size_t>(r)] =
                v < m ? rng.normal() : static_cast<double>(rng.below(2));
    std::vector<std::string> fn, ln;
    for (int32_t i = 0; i < m; ++i) fn.push_back("f" + std::to_string(i));
    for (int32_t j = 0; j < q; ++j) ln.push_back("y" + std::to_string(j));
    return MultiLabelDataset(DataKind::Continuous, fn, ln, std::move(values), rows);
}

MultiLabelDataset make_discrete(int32_t m, int32_t q, int64_t rows, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> values(static_cast<size_t>(m + q) * static_cast<size_t>(rows));
    for (int32_t v = 0; v < m + q; ++v)
        for (int64_t r = 0; r < rows; ++r)
            values[static_cast<size_t>(v) * static_cast<size_t>(rows) + static_cast<size_t>(r)] =
                static_cast<double>(rng.below(v < m ? 3 : 2));
    std::vector<std::string> fn, ln;
    for (int32_t i = 0; i < m; ++i) fn.push_back("f" + std::to_string(i));
    for (int32_t j = 0; j < q; ++j) ln.push_back("y" + std::to_string(j));
    return MultiLabelDataset(DataKind::Discrete, fn, ln, std::move(values), rows);
}

std::vector<CiQuery> screening_queries(const MultiLabelDataset& ds) {
    std::vector<CiQuery> queries;
    for (int32_t j = 0; j < ds.n_labels(); ++j) {
        const int32_t t = ds.label_var(j).index;
        for (int32_t v = 0; v < ds.n_variables(); ++v) {
            if (v == t) continue;
            queries.push_back(CiQuery{t, v, {}});
        }
    }
    return queries;
}

void BM_G2Test(benchmark::State& state) {
    const auto ds = make_discrete(8, 2, state.range(0), 1);
    const ShardView view = ShardView::whole(ds);
    const CiQuery q{0, 8, {1, 2}};
    for (auto _ : state) {
        auto r = g2_test(view, q);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_G2Test)->Arg(500)->Arg(5000);

void BM_FishersZ(benchmark::State& state) {
    const auto ds = make_continuous(8, 2, state.range(0), 2);
    const ShardView view = ShardView::whole(ds);
    const CiQuery q{0, 8, {1, 2}};
    for (auto _ : state) {
        auto r = fishers_z_test(view, q);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_FishersZ)->Arg(500)->Arg(5000);

// Screening round through the federation layer at different batch sizes; the
// numbers behind the acceleration acceptance criterion.
void BM_ScreeningBatch(benchmark::State& state) {
    const auto ds = make_continuous(200, 4, 1000, 3);
    const auto queries = screening_queries(ds);
    FederationOptions opt;
    opt.batch_size = static_cast<int32_t>(state.range(0));
    opt.cache_enabled = false;
    ClientShard shard;
    shard.client_id = 0;
    for (int64_t r = 0; r < ds.n_samples(); ++r) shard.row_indices.push_back(r);
    shard.weight = ds.n_samples();
    for (auto _ : state) {
        FederationHandle handle(ds, {shard}, opt);
        auto out = handle.query_all(queries);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(queries.size()));
}
BENCHMARK(BM_ScreeningBatch)->Arg(1)->Arg(10)->Arg(100);

void BM_CacheHit(benchmark::State& state) {
    const auto ds = make_continuous(16, 2, 1000, 4);
    const ShardView view = ShardView::whole(ds);
    CiCache cache;
    std::vector<CiQuery> queries;
    for (int32_t v = 1; v < 18; ++v) queries.push_back(CiQuery{0, v, {}});
    run_batch(view, queries, &cache);
    for (auto _ : state) {
        auto out = run_batch(view, queries, &cache);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_CacheHit);

} // namespace

BENCHMARK_MAIN();
