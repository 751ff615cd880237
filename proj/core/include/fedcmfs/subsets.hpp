#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fedcmfs {

// Visits size-k combinations of pool (ascending positions => lexicographic
// order when pool is sorted). Callback returns false to stop; the function
// returns false when stopped early.
template <typename Fn>
bool for_each_combination(std::span<const int32_t> pool, int k, Fn&& fn) {
    const int n = static_cast<int>(pool.size());
    if (k < 0 || k > n) return true;
    std::vector<int32_t> current(static_cast<size_t>(k));
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
    for (;;) {
        for (int i = 0; i < k; ++i) current[static_cast<size_t>(i)] = pool[static_cast<size_t>(idx[static_cast<size_t>(i)])];
        if (!fn(std::span<const int32_t>(current))) return false;
        int i = k - 1;
        while (i >= 0 && idx[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) return true;
        ++idx[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
}

// Visits subsets of pool by increasing cardinality (0..max_size), each
// cardinality in lexicographic order.
template <typename Fn>
bool for_each_subset_by_size(std::span<const int32_t> pool, int max_size, Fn&& fn) {
    const int limit = std::min<int>(max_size, static_cast<int>(pool.size()));
    for (int k = 0; k <= limit; ++k) {
        if (!for_each_combination(pool, k, fn)) return false;
    }
    return true;
}

} // namespace fedcmfs
