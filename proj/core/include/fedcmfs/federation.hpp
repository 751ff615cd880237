#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fedcmfs/citest.hpp"
#include "fedcmfs/dataset.hpp"
#include "fedcmfs/thread_pool.hpp"

namespace fedcmfs {

struct TestRequest {
    uint64_t request_id = 0;
    std::vector<CiQuery> queries;
};

struct TestResponse {
    uint64_t request_id = 0;
    int32_t client_id = -1;
    std::vector<CiResult> results; // positionally aligned with the request
};

struct AggregateResult {
    double weighted_p = 1.0; // Σ P_n·W_n / Σ W_n
    double weighted_c = 0.0; // Σ C_n·W_n / Σ W_n
    bool any_unreliable = false;
};

// Optional capture of every (request, client, query) exchange. Records carry
// only the query triplet and the returned statistics; raw sample rows never
// appear, which the privacy test checks by grepping serialized traffic.
class MessageTrace {
public:
    void enable() { enabled_ = true; }
    bool enabled() const { return enabled_; }

    void log(uint64_t request_id, int32_t client_id, const CiQuery& q, const CiResult& r);

    std::vector<std::string> lines() const {
        std::lock_guard<std::mutex> lk(mu_);
        return lines_;
    }
    void clear() {
        std::lock_guard<std::mutex> lk(mu_);
        lines_.clear();
    }

private:
    bool enabled_ = false;
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
};

struct FederationOptions {
    bool cache_enabled = true;
    int32_t batch_size = 100;   // citest batching granularity; never affects values
    unsigned worker_threads = 0; // 0 = hardware concurrency
    bool trace_messages = false;
};

// In-process client-server exchange: the server broadcasts CI-test requests,
// every client answers from its own shard and cache, and the server folds the
// responses into sample-count-weighted means.
class FederationHandle {
public:
    FederationHandle(const MultiLabelDataset& data, std::vector<ClientShard> shards, FederationOptions options);

    int32_t n_clients() const { return static_cast<int32_t>(clients_.size()); }
    int64_t total_weight() const { return total_weight_; }
    const MultiLabelDataset& data() const { return *data_; }
    const FederationOptions& options() const { return options_; }
    MessageTrace& trace() { return trace_; }

    TestRequest make_request(std::vector<CiQuery> queries);

    // Exactly one response per client, each computed with run_batch on that
    // client's shard and cache. Clients are independent; a degenerate shard
    // degrades to degenerate per-query results, never a missing response.
    std::vector<TestResponse> broadcast(const TestRequest& request);

    // Weighted fold of one query position across all responses.
    AggregateResult aggregate(std::span<const TestResponse> responses, size_t position) const;

    // Chunked broadcast+aggregate over an arbitrary query list: queries are
    // split into batches of at most options().batch_size, and the aggregated
    // results are returned positionally.
    std::vector<AggregateResult> query_all(const std::vector<CiQuery>& queries);

    // Single-query round.
    AggregateResult round(const CiQuery& query);

    uint64_t tests_executed(int32_t client) const { return clients_[static_cast<size_t>(client)].tests_executed; }
    uint64_t total_tests_executed() const;
    uint64_t cache_hits() const;
    uint64_t cache_misses() const;
    int64_t client_weight(int32_t client) const { return clients_[static_cast<size_t>(client)].shard.weight; }

private:
    struct FedClient {
        ClientShard shard;
        std::unique_ptr<CiCache> cache;
        uint64_t tests_executed = 0;
    };

    const MultiLabelDataset* data_;
    FederationOptions options_;
    std::vector<FedClient> clients_;
    int64_t total_weight_ = 0;
    uint64_t next_request_id_ = 1;
    std::unique_ptr<ThreadPool> pool_;
    MessageTrace trace_;
};

// True (independent) iff weighted_p exceeds alpha and every client's test was
// reliable; a tie at alpha and any unreliable round both resolve to dependent.
inline bool decide_independent(const AggregateResult& agg, double alpha) {
    return agg.weighted_p > alpha && !agg.any_unreliable;
}

} // namespace fedcmfs
