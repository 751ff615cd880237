#include "fedcmfs/federation.hpp"

#include <nlohmann/json.hpp>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

void MessageTrace::log(uint64_t request_id, int32_t client_id, const CiQuery& q, const CiResult& r) {
    if (!enabled_) return;
    nlohmann::json j{{"request_id", request_id},
                     {"client_id", client_id},
                     {"query", {{"target", q.target}, {"other", q.other}, {"cond", q.cond}}},
                     {"C", r.correlation},
                     {"P", r.p_value},
                     {"reliable", r.reliable}};
    std::lock_guard<std::mutex> lk(mu_);
    lines_.push_back(j.dump());
}

FederationHandle::FederationHandle(const MultiLabelDataset& data, std::vector<ClientShard> shards,
                                   FederationOptions options)
    : data_(&data), options_(options) {
    if (shards.empty()) throw_config("federation requires at least one client shard");
    if (options_.batch_size < 1) throw_config("batch_size must be >= 1");
    clients_.reserve(shards.size());
    for (auto& s : shards) {
        if (s.row_indices.empty()) throw_data("client shard " + std::to_string(s.client_id) + " is empty");
        if (s.weight != static_cast<int64_t>(s.row_indices.size()))
            throw_internal("shard weight does not match its row count");
        total_weight_ += s.weight;
        FedClient c;
        c.shard = std::move(s);
        c.cache = std::make_unique<CiCache>();
        clients_.push_back(std::move(c));
    }
    pool_ = std::make_unique<ThreadPool>(options_.worker_threads);
    if (options_.trace_messages) trace_.enable();
}

TestRequest FederationHandle::make_request(std::vector<CiQuery> queries) {
    TestRequest req;
    req.request_id = next_request_id_++;
    req.queries = std::move(queries);
    return req;
}

std::vector<TestResponse> FederationHandle::broadcast(const TestRequest& request) {
    std::vector<TestResponse> responses(clients_.size());
    for (size_t c = 0; c < clients_.size(); ++c) {
        FedClient& client = clients_[c];
        const ShardView view = ShardView::of(*data_, client.shard);
        uint64_t computed = 0;
        TestResponse resp;
        resp.request_id = request.request_id;
        resp.client_id = client.shard.client_id;
        resp.results = run_batch(view, request.queries, options_.cache_enabled ? client.cache.get() : nullptr,
                                 pool_.get(), &computed);
        client.tests_executed += computed;
        responses[c] = std::move(resp);
    }
    if (trace_.enabled()) {
        for (const auto& resp : responses)
            for (size_t i = 0; i < resp.results.size(); ++i)
                trace_.log(request.request_id, resp.client_id, request.queries[i], resp.results[i]);
    }
    return responses;
}

AggregateResult FederationHandle::aggregate(std::span<const TestResponse> responses, size_t position) const {
    if (responses.size() != clients_.size()) throw_internal("response count does not match client count");
    AggregateResult agg;
    if (responses.size() == 1) {
        // Weighted mean of one client is that client's result; returning it
        // directly keeps the N=1 federation bitwise equal to a local run.
        if (position >= responses[0].results.size()) throw_internal("aggregate position out of range");
        const CiResult& r = responses[0].results[position];
        agg.weighted_p = r.p_value;
        agg.weighted_c = r.correlation;
        agg.any_unreliable = !r.reliable;
        return agg;
    }
    double p_sum = 0.0;
    double c_sum = 0.0;
    for (size_t n = 0; n < responses.size(); ++n) {
        const TestResponse& resp = responses[n];
        if (resp.request_id != responses[0].request_id) throw_internal("responses span multiple requests");
        if (position >= resp.results.size()) throw_internal("aggregate position out of range");
        const double w = static_cast<double>(clients_[n].shard.weight);
        const CiResult& r = resp.results[position];
        p_sum += r.p_value * w;
        c_sum += r.correlation * w;
        agg.any_unreliable = agg.any_unreliable || !r.reliable;
    }
    const double total = static_cast<double>(total_weight_);
    agg.weighted_p = p_sum / total;
    agg.weighted_c = c_sum / total;
    return agg;
}

std::vector<AggregateResult> FederationHandle::query_all(const std::vector<CiQuery>& queries) {
    std::vector<AggregateResult> out;
    out.reserve(queries.size());
    const auto batch = static_cast<size_t>(options_.batch_size);
    for (size_t start = 0; start < queries.size(); start += batch) {
        const size_t end = std::min(queries.size(), start + batch);
        TestRequest req = make_request({queries.begin() + static_cast<ptrdiff_t>(start),
                                        queries.begin() + static_cast<ptrdiff_t>(end)});
        const auto responses = broadcast(req);
        for (size_t pos = 0; pos < req.queries.size(); ++pos) out.push_back(aggregate(responses, pos));
    }
    return out;
}

AggregateResult FederationHandle::round(const CiQuery& query) {
    TestRequest req = make_request({query});
    const auto responses = broadcast(req);
    return aggregate(responses, 0);
}

uint64_t FederationHandle::total_tests_executed() const {
    uint64_t total = 0;
    for (const auto& c : clients_) total += c.tests_executed;
    return total;
}

uint64_t FederationHandle::cache_hits() const {
    uint64_t total = 0;
    for (const auto& c : clients_) total += c.cache->hits();
    return total;
}

uint64_t FederationHandle::cache_misses() const {
    uint64_t total = 0;
    for (const auto& c : clients_) total += c.cache->misses();
    return total;
}

} // namespace fedcmfs
