#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "fedcmfs/dataset.hpp"
#include "fedcmfs/thread_pool.hpp"

namespace fedcmfs {

// Conditional-independence query (target ⊥ other | cond). Canonical form:
// target != other, neither in cond, cond sorted ascending by global index.
struct CiQuery {
    int32_t target = -1;
    int32_t other = -1;
    std::vector<int32_t> cond;

    bool is_canonical() const;

    friend bool operator==(const CiQuery& a, const CiQuery& b) {
        return a.target == b.target && a.other == b.other && a.cond == b.cond;
    }
};

struct CiResult {
    double statistic = 0.0;   // G² or Z
    double correlation = 0.0; // C value: normalized G² strength or partial correlation R
    double p_value = 1.0;
    bool reliable = true;    // false => callers treat the pair as dependent
    bool degenerate = false; // constant/singular input, forced independent

    friend bool operator==(const CiResult& a, const CiResult& b) {
        return a.statistic == b.statistic && a.correlation == b.correlation && a.p_value == b.p_value &&
               a.reliable == b.reliable && a.degenerate == b.degenerate;
    }
};

// Cache key: the unordered pair plus the conditioning set, so symmetric
// queries share one entry.
struct CiKey {
    int32_t a = 0; // min(target, other)
    int32_t b = 0; // max(target, other)
    std::vector<int32_t> cond;

    static CiKey of(const CiQuery& q);

    friend bool operator==(const CiKey& x, const CiKey& y) { return x.a == y.a && x.b == y.b && x.cond == y.cond; }
};

struct CiKeyHash {
    size_t operator()(const CiKey& k) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        mix(static_cast<uint64_t>(static_cast<uint32_t>(k.a)));
        mix(static_cast<uint64_t>(static_cast<uint32_t>(k.b)));
        for (int32_t c : k.cond) mix(static_cast<uint64_t>(static_cast<uint32_t>(c)));
        return static_cast<size_t>(h);
    }
};

// Per-shard CI-test record. Concurrent lookups/inserts are allowed; equal
// keys always map to equal results, so insert races are benign.
class CiCache {
public:
    std::optional<CiResult> lookup(const CiKey& key) const {
        std::shared_lock lk(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void insert(const CiKey& key, const CiResult& r) {
        std::unique_lock lk(mu_);
        map_.emplace(key, r);
    }

    void record_hit() { hits_.fetch_add(1, std::memory_order_relaxed); }
    void record_miss() { misses_.fetch_add(1, std::memory_order_relaxed); }

    uint64_t hits() const { return hits_.load(std::memory_order_relaxed); }
    uint64_t misses() const { return misses_.load(std::memory_order_relaxed); }
    size_t size() const {
        std::shared_lock lk(mu_);
        return map_.size();
    }

private:
    mutable std::shared_mutex mu_;
    std::unordered_map<CiKey, CiResult, CiKeyHash> map_;
    std::atomic<uint64_t> hits_{0};
    std::atomic<uint64_t> misses_{0};
};

// A client's local sample view: the dataset plus that client's row subset.
// rows == nullptr means "all rows".
struct ShardView {
    const MultiLabelDataset* data = nullptr;
    const int64_t* rows = nullptr;
    int64_t n = 0;

    static ShardView whole(const MultiLabelDataset& ds) { return {&ds, nullptr, ds.n_samples()}; }
    static ShardView of(const MultiLabelDataset& ds, const ClientShard& shard) {
        return {&ds, shard.row_indices.data(), static_cast<int64_t>(shard.row_indices.size())};
    }

    int64_t row(int64_t i) const { return rows ? rows[i] : i; }
};

// G² test on discrete columns. Degrees of freedom use the category counts
// observed within the shard; zero cells contribute nothing to the statistic.
CiResult g2_test(const ShardView& view, const CiQuery& q);

// Fisher's Z on continuous columns (binary labels admitted as 0/1 numerics).
CiResult fishers_z_test(const ShardView& view, const CiQuery& q);

// Partial correlation of columns i and j given cond, from the precision
// matrix of the sample correlation matrix over {i, j} ∪ cond. Singular
// matrices get one ridge retry; still singular => 0 with degenerate set.
double partial_correlation(const ShardView& view, int32_t i, int32_t j, std::span<const int32_t> cond,
                           bool* degenerate = nullptr);

// Batched execution per the shard's data kind. Results align positionally
// with queries and are bitwise identical to running each query alone. The
// cache, when given, is consulted first and updated after; duplicate queries
// within one batch count as hits. computed, when given, receives the number
// of tests actually executed (cache hits excluded).
std::vector<CiResult> run_batch(const ShardView& view, std::span<const CiQuery> queries, CiCache* cache,
                                ThreadPool* pool = nullptr, uint64_t* computed = nullptr);

} // namespace fedcmfs
