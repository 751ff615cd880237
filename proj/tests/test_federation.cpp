#include <doctest.h>

#include <cmath>
#include <string>

#include "fedcmfs/federation.hpp"
#include "fedcmfs/rng.hpp"
#include "synth.hpp"

using namespace fedcmfs;

namespace {

std::vector<ClientShard> full_copy_shards(const MultiLabelDataset& ds, int32_t n_clients) {
    std::vector<ClientShard> shards;
    for (int32_t c = 0; c < n_clients; ++c) {
        ClientShard s;
        s.client_id = c;
        for (int64_t r = 0; r < ds.n_samples(); ++r) s.row_indices.push_back(r);
        s.weight = ds.n_samples();
        shards.push_back(std::move(s));
    }
    return shards;
}

ClientShard rows_shard(int32_t id, int64_t from, int64_t to) {
    ClientShard s;
    s.client_id = id;
    for (int64_t r = from; r < to; ++r) s.row_indices.push_back(r);
    s.weight = to - from;
    return s;
}

} // namespace

TEST_CASE("aggregate: weighted mean of hand-crafted responses") {
    const auto ds = synth::null_continuous(2, 1, 400, 3);
    FederationHandle handle(ds, {rows_shard(0, 0, 100), rows_shard(1, 100, 400)}, {});

    TestRequest req = handle.make_request({CiQuery{0, 1, {}}});
    std::vector<TestResponse> responses(2);
    responses[0] = {req.request_id, 0, {CiResult{1.0, 0.1, 0.2, true, false}}};
    responses[1] = {req.request_id, 1, {CiResult{2.0, 0.5, 0.6, true, false}}};

    const AggregateResult agg = handle.aggregate(responses, 0);
    CHECK(agg.weighted_p == 0.5); // (0.2*100 + 0.6*300) / 400, exact in fp
    CHECK(agg.weighted_c == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(!agg.any_unreliable);

    responses[1].results[0].reliable = false;
    CHECK(handle.aggregate(responses, 0).any_unreliable);
}

TEST_CASE("aggregate: constant P across clients is returned unchanged") {
    const auto ds = synth::null_continuous(2, 1, 500, 5);
    FederationHandle handle(ds, {rows_shard(0, 0, 123), rows_shard(1, 123, 456), rows_shard(2, 456, 500)}, {});
    TestRequest req = handle.make_request({CiQuery{0, 1, {}}});
    std::vector<TestResponse> responses;
    for (int32_t c = 0; c < 3; ++c)
        responses.push_back({req.request_id, c, {CiResult{0.0, 0.25, 0.7310585, true, false}}});
    CHECK(handle.aggregate(responses, 0).weighted_p == doctest::Approx(0.7310585).epsilon(1e-15));
}

TEST_CASE("aggregate: N=1 is the identity") {
    const auto ds = synth::null_continuous(3, 1, 200, 7);
    FederationHandle handle(ds, {rows_shard(0, 0, 200)}, {});
    const AggregateResult agg = handle.round(CiQuery{0, 1, {}});
    const CiResult direct = fishers_z_test(ShardView::whole(ds), CiQuery{0, 1, {}});
    CHECK(agg.weighted_p == direct.p_value);
    CHECK(agg.weighted_c == direct.correlation);
}

TEST_CASE("aggregation linearity: scaling all weights leaves the means unchanged") {
    const auto ds = synth::null_continuous(2, 1, 900, 9);
    FederationHandle h1(ds, {rows_shard(0, 0, 100), rows_shard(1, 100, 300)}, {});
    FederationHandle h3(ds, {rows_shard(0, 0, 300), rows_shard(1, 300, 900)}, {});

    TestRequest r1 = h1.make_request({CiQuery{0, 1, {}}});
    TestRequest r3 = h3.make_request({CiQuery{0, 1, {}}});
    const CiResult a{0.5, 0.12, 0.34, true, false};
    const CiResult b{0.7, 0.56, 0.78, true, false};
    std::vector<TestResponse> resp1{{r1.request_id, 0, {a}}, {r1.request_id, 1, {b}}};
    std::vector<TestResponse> resp3{{r3.request_id, 0, {a}}, {r3.request_id, 1, {b}}};

    const AggregateResult g1 = h1.aggregate(resp1, 0);
    const AggregateResult g3 = h3.aggregate(resp3, 0);
    CHECK(g1.weighted_p == doctest::Approx(g3.weighted_p).epsilon(1e-15));
    CHECK(g1.weighted_c == doctest::Approx(g3.weighted_c).epsilon(1e-15));
}

TEST_CASE("broadcast: one response per client, aligned shapes") {
    const auto ds = synth::sample_discrete_network(5, 2, 300, 11);
    FederationHandle handle(ds, {rows_shard(0, 0, 100), rows_shard(1, 100, 200), rows_shard(2, 200, 300)}, {});
    TestRequest req = handle.make_request({CiQuery{0, 1, {}}});
    const auto responses = handle.broadcast(req);
    REQUIRE(responses.size() == 3);
    for (const auto& r : responses) {
        CHECK(r.request_id == req.request_id);
        CHECK(r.results.size() == 1);
    }
}

TEST_CASE("broadcast: per-client test counters exclude cache hits") {
    const auto ds = synth::sample_discrete_network(6, 2, 500, 13);
    const PartitionPlan plan{5, 0.3, 0.5, 21};
    FederationHandle handle(ds, partition_clients(ds, plan), {});

    Rng rng(99);
    std::vector<CiQuery> queries;
    for (int i = 0; i < 200; ++i) {
        CiQuery q;
        q.target = static_cast<int32_t>(rng.below(8));
        do {
            q.other = static_cast<int32_t>(rng.below(8));
        } while (q.other == q.target);
        queries.push_back(q);
    }
    handle.query_all(queries);
    for (int32_t c = 0; c < 5; ++c) {
        CHECK(handle.tests_executed(c) <= 200);
        CHECK(handle.tests_executed(c) > 0);
    }
    // All clients face identical query streams, so the counters agree.
    for (int32_t c = 1; c < 5; ++c) CHECK(handle.tests_executed(c) == handle.tests_executed(0));
}

TEST_CASE("replication invariance: identical full shards reproduce the single-client aggregate") {
    const auto ds = synth::sample_discrete_network(6, 2, 400, 17);
    FederationHandle one(ds, full_copy_shards(ds, 1), {});
    for (int32_t n : {3, 5, 10}) {
        FederationHandle many(ds, full_copy_shards(ds, n), {});
        for (const CiQuery q : {CiQuery{0, 6, {}}, CiQuery{1, 2, {0}}, CiQuery{3, 7, {1, 2}}}) {
            const AggregateResult a = one.round(q);
            const AggregateResult b = many.round(q);
            CHECK(b.weighted_p == doctest::Approx(a.weighted_p).epsilon(1e-14));
            CHECK(b.weighted_c == doctest::Approx(a.weighted_c).epsilon(1e-14));
            CHECK(a.any_unreliable == b.any_unreliable);
        }
    }
}

TEST_CASE("round determinism: scheduling and threads never change aggregates") {
    const auto ds = synth::null_continuous(8, 2, 600, 19);
    const auto shards = partition_clients(ds, PartitionPlan{3, 0.4, 0.6, 2});

    FederationOptions serial;
    serial.worker_threads = 1;
    FederationOptions threaded;
    threaded.worker_threads = 8;
    FederationHandle h1(ds, shards, serial);
    FederationHandle h2(ds, shards, threaded);

    std::vector<CiQuery> queries;
    for (int32_t v = 1; v < 10; ++v) queries.push_back(CiQuery{0, v, {}});
    const auto a = h1.query_all(queries);
    const auto b = h2.query_all(queries);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].weighted_p == b[i].weighted_p);
        CHECK(a[i].weighted_c == b[i].weighted_c);
    }
}

TEST_CASE("decide_independent: strict threshold and unreliable override") {
    AggregateResult agg;
    agg.weighted_p = 0.5;
    CHECK(decide_independent(agg, 0.05));
    agg.weighted_p = 0.01;
    CHECK(!decide_independent(agg, 0.05));
    agg.weighted_p = 0.05; // tie resolves to dependent
    CHECK(!decide_independent(agg, 0.05));
    agg.weighted_p = 0.5;
    agg.any_unreliable = true;
    CHECK(!decide_independent(agg, 0.05));
}

TEST_CASE("privacy: serialized traffic carries statistics, never sample rows") {
    // Plant magic values whose 17-digit decimal forms would betray raw rows.
    const int64_t n = 64;
    std::vector<double> values(3 * static_cast<size_t>(n));
    Rng rng(23);
    const double magic1 = 0.73105857863000487;
    const double magic2 = -41.512893748120349;
    for (int64_t i = 0; i < n; ++i) {
        values[static_cast<size_t>(i)] = magic1 + static_cast<double>(i) * 1e-9;
        values[static_cast<size_t>(n + i)] = magic2 - static_cast<double>(i) * 1e-7;
        values[static_cast<size_t>(2 * n + i)] = static_cast<double>(rng.below(2));
    }
    const MultiLabelDataset ds(DataKind::Continuous, {"f0", "f1"}, {"y0"}, values, n);

    FederationOptions opt;
    opt.trace_messages = true;
    FederationHandle handle(ds, {rows_shard(0, 0, 32), rows_shard(1, 32, 64)}, opt);
    handle.round(CiQuery{0, 1, {}});
    handle.round(CiQuery{0, 2, {1}});

    const auto lines = handle.trace().lines();
    REQUIRE(lines.size() == 4); // 2 rounds x 2 clients
    for (const std::string& line : lines) {
        CHECK(line.find("0.7310585786300048") == std::string::npos);
        CHECK(line.find("41.51289374812034") == std::string::npos);
        CHECK(line.find("request_id") != std::string::npos);
        CHECK(line.find("client_id") != std::string::npos);
        CHECK(line.find("\"P\"") != std::string::npos);
        CHECK(line.find("\"C\"") != std::string::npos);
        CHECK(line.find("reliable") != std::string::npos);
    }
}

TEST_CASE("degenerate shard answers degenerately instead of blocking the round") {
    // Client 1's shard holds a single row, so every column is constant there.
    const auto ds = synth::null_continuous(3, 1, 50, 29);
    ClientShard tiny;
    tiny.client_id = 1;
    tiny.row_indices = {0};
    tiny.weight = 1;
    FederationHandle handle(ds, {rows_shard(0, 0, 50), tiny}, {});
    TestRequest req = handle.make_request({CiQuery{0, 1, {}}});
    const auto responses = handle.broadcast(req);
    REQUIRE(responses.size() == 2);
    CHECK(responses[1].results[0].degenerate);
    CHECK(responses[1].results[0].p_value == 1.0);
}
