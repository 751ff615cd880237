#include "fedcmfs/citest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "fedcmfs/stats.hpp"
#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

constexpr double kClampEps = 1e-7;   // |R| clamp for Fisher's Z
constexpr double kRidgeEps = 1e-10;  // diagonal ridge for singular correlation matrices
constexpr int64_t kFlatCellLimit = 1 << 22;

CiResult degenerate_independent() {
    CiResult r;
    r.statistic = 0.0;
    r.correlation = 0.0;
    r.p_value = 1.0;
    r.reliable = true;
    r.degenerate = true;
    return r;
}

// Gathered per-column state shared by every query in one batch. Entries are
// built once in a serial prepare pass and are read-only afterwards, so the
// compute phase can fan out without synchronization.
struct ContColumn {
    std::vector<double> standardized; // (v - mean) / sqrt(sum of squared deviations)
    bool constant = false;
};

struct DiscColumn {
    std::vector<int32_t> codes; // dense codes, ordered by ascending original value
    int32_t n_cats = 0;
};

// Columns are registered once (sorted, deduplicated) in prepare(); lookups
// binary-search the compact index, so neither tiny single-query workspaces
// nor wide batch workspaces pay for the full variable universe.
class Workspace {
public:
    Workspace(const ShardView& view) : view_(view) {}

    void prepare(std::span<const int32_t> columns) {
        cols_.assign(columns.begin(), columns.end());
        std::sort(cols_.begin(), cols_.end());
        cols_.erase(std::unique(cols_.begin(), cols_.end()), cols_.end());
        const bool discrete = view_.data->data_kind() == DataKind::Discrete;
        if (discrete)
            disc_.resize(cols_.size());
        else
            cont_.resize(cols_.size());
        for (size_t i = 0; i < cols_.size(); ++i) {
            if (discrete)
                disc_[i] = build_disc(cols_[i]);
            else
                cont_[i] = build_cont(cols_[i]);
        }
    }

    const ContColumn& cont(int32_t col) const { return cont_[slot(col)]; }
    const DiscColumn& disc(int32_t col) const { return disc_[slot(col)]; }
    const ShardView& view() const { return view_; }

    double pearson(int32_t i, int32_t j) const {
        const auto& a = cont(i).standardized;
        const auto& b = cont(j).standardized;
        return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()))
            .dot(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    }

private:
    ContColumn build_cont(int32_t col) const {
        const double* src = view_.data->column(col);
        const int64_t n = view_.n;
        ContColumn out;
        out.standardized.resize(static_cast<size_t>(n));
        double* dst = out.standardized.data();

        // One pass gathers, accumulates the sum, and checks constancy.
        double sum = 0.0;
        bool constant = true;
        if (view_.rows) {
            const double first = src[view_.rows[0]];
            for (int64_t i = 0; i < n; ++i) {
                const double v = src[view_.rows[i]];
                dst[i] = v;
                sum += v;
                constant = constant && v == first;
            }
        } else {
            const double first = src[0];
            for (int64_t i = 0; i < n; ++i) {
                const double v = src[i];
                dst[i] = v;
                sum += v;
                constant = constant && v == first;
            }
        }
        if (constant) {
            out.constant = true;
            out.standardized.clear();
            return out;
        }
        const double mean = sum / static_cast<double>(n);
        double ssq = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            const double d = dst[i] - mean;
            dst[i] = d;
            ssq += d * d;
        }
        const double norm = std::sqrt(ssq);
        if (norm == 0.0) {
            out.constant = true;
            out.standardized.clear();
            return out;
        }
        for (int64_t i = 0; i < n; ++i) dst[i] /= norm;
        return out;
    }

    DiscColumn build_disc(int32_t col) const {
        const double* src = view_.data->column(col);
        const int64_t n = view_.n;
        std::vector<double> values(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) values[static_cast<size_t>(i)] = src[view_.row(i)];
        std::vector<double> uniq = values;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        DiscColumn out;
        out.n_cats = static_cast<int32_t>(uniq.size());
        out.codes.resize(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) {
            const auto it = std::lower_bound(uniq.begin(), uniq.end(), values[static_cast<size_t>(i)]);
            out.codes[static_cast<size_t>(i)] = static_cast<int32_t>(it - uniq.begin());
        }
        return out;
    }

    size_t slot(int32_t col) const {
        const auto it = std::lower_bound(cols_.begin(), cols_.end(), col);
        return static_cast<size_t>(it - cols_.begin());
    }

    const ShardView& view_;
    std::vector<int32_t> cols_;
    std::vector<ContColumn> cont_;
    std::vector<DiscColumn> disc_;
};

std::vector<int32_t> involved_columns(const CiQuery& q) {
    std::vector<int32_t> cols;
    cols.reserve(q.cond.size() + 2);
    cols.push_back(q.target);
    cols.push_back(q.other);
    cols.insert(cols.end(), q.cond.begin(), q.cond.end());
    return cols;
}

// G² over the canonical pair (a < b). The statistic sums cells in ascending
// composite index order on both the flat and sparse counting paths, so the
// floating-point result does not depend on which path ran.
CiResult g2_kernel(const Workspace& ws, int32_t a, int32_t b, std::span<const int32_t> cond) {
    const int64_t n = ws.view().n;
    const DiscColumn& ca = ws.disc(a);
    const DiscColumn& cb = ws.disc(b);
    const int64_t ra = ca.n_cats;
    const int64_t rb = cb.n_cats;

    double df = static_cast<double>(ra - 1) * static_cast<double>(rb - 1);
    int64_t rc = 1;
    bool rc_overflow = false;
    std::vector<const DiscColumn*> cond_cols;
    cond_cols.reserve(cond.size());
    for (int32_t c : cond) {
        const DiscColumn& cc = ws.disc(c);
        cond_cols.push_back(&cc);
        df *= static_cast<double>(cc.n_cats);
        if (!rc_overflow) {
            if (rc > (std::numeric_limits<int64_t>::max() / std::max<int64_t>(1, cc.n_cats)))
                rc_overflow = true;
            else
                rc *= cc.n_cats;
        }
    }
    if (df <= 0.0) return degenerate_independent();
    if (rc_overflow)
        throw_internal("conditioning-set cell space exceeds addressable range");

    // Composite cell index: ((a_code * rb) + b_code) * rc + cond_code.
    const int64_t cells = ra * rb > std::numeric_limits<int64_t>::max() / std::max<int64_t>(1, rc)
                              ? std::numeric_limits<int64_t>::max()
                              : ra * rb * rc;

    double stat_sum = 0.0;
    if (cells <= kFlatCellLimit) {
        std::vector<int64_t> abc(static_cast<size_t>(cells), 0);
        std::vector<int64_t> ac(static_cast<size_t>(ra * rc), 0);
        std::vector<int64_t> bc(static_cast<size_t>(rb * rc), 0);
        std::vector<int64_t> cc(static_cast<size_t>(rc), 0);
        for (int64_t i = 0; i < n; ++i) {
            int64_t ccomp = 0;
            for (const DiscColumn* col : cond_cols) ccomp = ccomp * col->n_cats + col->codes[static_cast<size_t>(i)];
            const int64_t av = ca.codes[static_cast<size_t>(i)];
            const int64_t bv = cb.codes[static_cast<size_t>(i)];
            ++abc[static_cast<size_t>((av * rb + bv) * rc + ccomp)];
            ++ac[static_cast<size_t>(av * rc + ccomp)];
            ++bc[static_cast<size_t>(bv * rc + ccomp)];
            ++cc[static_cast<size_t>(ccomp)];
        }
        for (int64_t idx = 0; idx < cells; ++idx) {
            const int64_t s_abc = abc[static_cast<size_t>(idx)];
            if (s_abc == 0) continue;
            const int64_t ccomp = idx % rc;
            const int64_t ab = idx / rc;
            const int64_t av = ab / rb;
            const int64_t bv = ab % rb;
            const double s_ac = static_cast<double>(ac[static_cast<size_t>(av * rc + ccomp)]);
            const double s_bc = static_cast<double>(bc[static_cast<size_t>(bv * rc + ccomp)]);
            const double s_c = static_cast<double>(cc[static_cast<size_t>(ccomp)]);
            stat_sum += static_cast<double>(s_abc) * std::log(static_cast<double>(s_abc) * s_c / (s_ac * s_bc));
        }
    } else {
        std::map<int64_t, int64_t> abc;
        std::unordered_map<int64_t, int64_t> ac, bc, cc;
        for (int64_t i = 0; i < n; ++i) {
            int64_t ccomp = 0;
            for (const DiscColumn* col : cond_cols) ccomp = ccomp * col->n_cats + col->codes[static_cast<size_t>(i)];
            const int64_t av = ca.codes[static_cast<size_t>(i)];
            const int64_t bv = cb.codes[static_cast<size_t>(i)];
            ++abc[(av * rb + bv) * rc + ccomp];
            ++ac[av * rc + ccomp];
            ++bc[bv * rc + ccomp];
            ++cc[ccomp];
        }
        for (const auto& [idx, s_abc] : abc) { // std::map iterates keys ascending
            const int64_t ccomp = idx % rc;
            const int64_t ab = idx / rc;
            const int64_t av = ab / rb;
            const int64_t bv = ab % rb;
            const double s_ac = static_cast<double>(ac[av * rc + ccomp]);
            const double s_bc = static_cast<double>(bc[bv * rc + ccomp]);
            const double s_c = static_cast<double>(cc[ccomp]);
            stat_sum += static_cast<double>(s_abc) * std::log(static_cast<double>(s_abc) * s_c / (s_ac * s_bc));
        }
    }

    CiResult r;
    r.statistic = std::max(0.0, 2.0 * stat_sum);
    r.p_value = stats::chi_square_sf(r.statistic, df);
    const double denom = 2.0 * static_cast<double>(n) * std::log(static_cast<double>(std::min(ra, rb)));
    r.correlation = std::clamp(r.statistic / denom, 0.0, 1.0);
    r.reliable = !(static_cast<double>(n) < 5.0 * df);
    r.degenerate = false;
    return r;
}

double partial_corr_kernel(const Workspace& ws, int32_t i, int32_t j, std::span<const int32_t> cond,
                           bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (cond.empty()) return ws.pearson(i, j); // 2x2 precision route reduces to the bivariate case

    const int p = static_cast<int>(cond.size()) + 2;
    Eigen::MatrixXd corr(p, p);
    std::vector<int32_t> cols;
    cols.reserve(static_cast<size_t>(p));
    cols.push_back(i);
    cols.push_back(j);
    cols.insert(cols.end(), cond.begin(), cond.end());
    for (int r = 0; r < p; ++r) {
        corr(r, r) = 1.0;
        for (int c = r + 1; c < p; ++c) {
            const double v = ws.pearson(cols[static_cast<size_t>(r)], cols[static_cast<size_t>(c)]);
            corr(r, c) = v;
            corr(c, r) = v;
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
    if (!lu.isInvertible()) {
        corr.diagonal().array() += kRidgeEps;
        lu.compute(corr);
        if (!lu.isInvertible()) {
            if (degenerate) *degenerate = true;
            return 0.0;
        }
    }
    const Eigen::MatrixXd omega = lu.inverse();
    const double d = omega(0, 0) * omega(1, 1);
    if (!(d > 0.0)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return -omega(0, 1) / std::sqrt(d);
}

CiResult fisher_kernel(const Workspace& ws, int32_t a, int32_t b, std::span<const int32_t> cond) {
    if (ws.cont(a).constant || ws.cont(b).constant) return degenerate_independent();
    for (int32_t c : cond)
        if (ws.cont(c).constant) return degenerate_independent();

    const double m = static_cast<double>(ws.view().n);
    const double dfz = m - static_cast<double>(cond.size()) - 3.0;
    if (dfz <= 0.0) {
        CiResult r;
        r.statistic = 0.0;
        r.correlation = 0.0;
        r.p_value = 1.0;
        r.reliable = false; // too few samples: callers must keep the pair
        r.degenerate = false;
        return r;
    }

    bool dg = false;
    double rho = partial_corr_kernel(ws, a, b, cond, &dg);
    if (dg) return degenerate_independent();
    rho = std::clamp(rho, -1.0 + kClampEps, 1.0 - kClampEps);

    CiResult r;
    r.statistic = 0.5 * std::sqrt(dfz) * std::log((1.0 + rho) / (1.0 - rho));
    r.correlation = rho;
    r.p_value = stats::two_sided_normal_p(r.statistic);
    r.reliable = true;
    r.degenerate = false;
    return r;
}

// All computation runs on the canonical (min, max) pair so that symmetric
// queries are bitwise identical.
CiResult compute_one(const Workspace& ws, const CiQuery& q) {
    const int32_t a = std::min(q.target, q.other);
    const int32_t b = std::max(q.target, q.other);
    if (ws.view().data->data_kind() == DataKind::Discrete) return g2_kernel(ws, a, b, q.cond);
    return fisher_kernel(ws, a, b, q.cond);
}

void check_canonical(const CiQuery& q, const ShardView& view) {
    if (!q.is_canonical()) throw_internal("CI query is not canonical");
    const int32_t nv = view.data->n_variables();
    if (q.target >= nv || q.other >= nv || q.target < 0 || q.other < 0)
        throw_internal("CI query addresses a variable outside the universe");
    for (int32_t c : q.cond)
        if (c < 0 || c >= nv) throw_internal("CI query conditioning set outside the universe");
}

} // namespace

bool CiQuery::is_canonical() const {
    if (target == other || target < 0 || other < 0) return false;
    for (size_t i = 0; i < cond.size(); ++i) {
        if (cond[i] == target || cond[i] == other) return false;
        if (i > 0 && cond[i] <= cond[i - 1]) return false;
    }
    return true;
}

CiKey CiKey::of(const CiQuery& q) {
    CiKey k;
    k.a = std::min(q.target, q.other);
    k.b = std::max(q.target, q.other);
    k.cond = q.cond;
    return k;
}

CiResult g2_test(const ShardView& view, const CiQuery& q) {
    check_canonical(q, view);
    if (view.data->data_kind() != DataKind::Discrete) throw_internal("g2_test requires discrete columns");
    Workspace ws(view);
    ws.prepare(involved_columns(q));
    return compute_one(ws, q);
}

CiResult fishers_z_test(const ShardView& view, const CiQuery& q) {
    check_canonical(q, view);
    if (view.data->data_kind() != DataKind::Continuous) throw_internal("fishers_z_test requires continuous columns");
    Workspace ws(view);
    ws.prepare(involved_columns(q));
    return compute_one(ws, q);
}

double partial_correlation(const ShardView& view, int32_t i, int32_t j, std::span<const int32_t> cond,
                           bool* degenerate) {
    Workspace ws(view);
    std::vector<int32_t> cols;
    cols.push_back(i);
    cols.push_back(j);
    cols.insert(cols.end(), cond.begin(), cond.end());
    ws.prepare(cols);
    if (ws.cont(i).constant || ws.cont(j).constant) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    for (int32_t c : cond) {
        if (ws.cont(c).constant) {
            if (degenerate) *degenerate = true;
            return 0.0;
        }
    }
    return partial_corr_kernel(ws, i, j, cond, degenerate);
}

std::vector<CiResult> run_batch(const ShardView& view, std::span<const CiQuery> queries, CiCache* cache,
                                ThreadPool* pool, uint64_t* computed) {
    std::vector<CiResult> results(queries.size());
    if (queries.empty()) return results;

    for (const CiQuery& q : queries) check_canonical(q, view);

    // Resolve against the cache in submission order so hit/miss counts are
    // deterministic; duplicates inside the batch alias the first occurrence.
    std::vector<size_t> scheduled;
    std::vector<std::pair<size_t, size_t>> aliases; // (slot, owner slot)
    if (cache) {
        std::unordered_map<CiKey, size_t, CiKeyHash> pending;
        pending.reserve(queries.size());
        for (size_t idx = 0; idx < queries.size(); ++idx) {
            const CiKey key = CiKey::of(queries[idx]);
            if (auto hit = cache->lookup(key)) {
                results[idx] = *hit;
                cache->record_hit();
                continue;
            }
            auto it = pending.find(key);
            if (it != pending.end()) {
                aliases.emplace_back(idx, it->second);
                cache->record_hit();
                continue;
            }
            pending.emplace(key, idx);
            scheduled.push_back(idx);
            cache->record_miss();
        }
    } else {
        scheduled.resize(queries.size());
        for (size_t i = 0; i < queries.size(); ++i) scheduled[i] = i;
    }

    if (!scheduled.empty()) {
        Workspace ws(view);
        {
            std::vector<int32_t> cols;
            for (size_t idx : scheduled) {
                const CiQuery& q = queries[idx];
                cols.push_back(q.target);
                cols.push_back(q.other);
                cols.insert(cols.end(), q.cond.begin(), q.cond.end());
            }
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            ws.prepare(cols);
        }

        auto compute_slot = [&](size_t k) {
            const size_t idx = scheduled[k];
            results[idx] = compute_one(ws, queries[idx]);
        };
        if (pool && scheduled.size() > 1) {
            pool->parallel_for(scheduled.size(), compute_slot);
        } else {
            for (size_t k = 0; k < scheduled.size(); ++k) compute_slot(k);
        }

        if (cache) {
            for (size_t idx : scheduled) cache->insert(CiKey::of(queries[idx]), results[idx]);
        }
    }

    for (const auto& [slot, owner] : aliases) results[slot] = results[owner];
    if (computed) *computed += scheduled.size();
    return results;
}

} // namespace fedcmfs
