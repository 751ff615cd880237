#include "fedcmfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

void check_shapes(const PredictionSet& pred, const LabelMatrix& truth) {
    if (pred.n != truth.n || pred.q != truth.q) throw_data("prediction/truth shape mismatch");
}

int32_t truth_count(const LabelMatrix& truth, int64_t i) {
    int32_t c = 0;
    for (int32_t l = 0; l < truth.q; ++l) c += truth.at(i, l);
    return c;
}

} // namespace

LabelMatrix LabelMatrix::from_dataset(const MultiLabelDataset& ds) {
    LabelMatrix m;
    m.n = ds.n_samples();
    m.q = ds.n_labels();
    m.y.resize(static_cast<size_t>(m.n) * static_cast<size_t>(m.q));
    for (int32_t l = 0; l < m.q; ++l) {
        const double* col = ds.column(ds.label_var(l).index);
        for (int64_t i = 0; i < m.n; ++i)
            m.y[static_cast<size_t>(i) * static_cast<size_t>(m.q) + static_cast<size_t>(l)] = col[i] != 0.0 ? 1 : 0;
    }
    return m;
}

std::vector<int32_t> label_ranks(const PredictionSet& pred, int64_t sample) {
    std::vector<int32_t> order(static_cast<size_t>(pred.q));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        const double ca = pred.confidence(sample, a);
        const double cb = pred.confidence(sample, b);
        if (ca != cb) return ca > cb;
        return a < b;
    });
    std::vector<int32_t> rank(static_cast<size_t>(pred.q));
    for (int32_t pos = 0; pos < pred.q; ++pos) rank[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos + 1;
    return rank;
}

double average_precision(const PredictionSet& pred, const LabelMatrix& truth) {
    check_shapes(pred, truth);
    double sum = 0.0;
    int64_t counted = 0;
    for (int64_t i = 0; i < pred.n; ++i) {
        const int32_t ny = truth_count(truth, i);
        if (ny == 0) continue;
        const std::vector<int32_t> rank = label_ranks(pred, i);
        double sample_sum = 0.0;
        for (int32_t y = 0; y < pred.q; ++y) {
            if (!truth.at(i, y)) continue;
            int32_t at_or_above = 0;
            for (int32_t y2 = 0; y2 < pred.q; ++y2)
                if (truth.at(i, y2) && rank[static_cast<size_t>(y2)] <= rank[static_cast<size_t>(y)]) ++at_or_above;
            sample_sum += static_cast<double>(at_or_above) / static_cast<double>(rank[static_cast<size_t>(y)]);
        }
        sum += sample_sum / static_cast<double>(ny);
        ++counted;
    }
    if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum / static_cast<double>(counted);
}

double coverage(const PredictionSet& pred, const LabelMatrix& truth, bool normalized) {
    check_shapes(pred, truth);
    double sum = 0.0;
    int64_t counted = 0;
    for (int64_t i = 0; i < pred.n; ++i) {
        if (truth_count(truth, i) == 0) continue;
        const std::vector<int32_t> rank = label_ranks(pred, i);
        int32_t max_rank = 0;
        for (int32_t y = 0; y < pred.q; ++y)
            if (truth.at(i, y)) max_rank = std::max(max_rank, rank[static_cast<size_t>(y)]);
        sum += static_cast<double>(max_rank - 1);
        ++counted;
    }
    if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sum / static_cast<double>(counted);
    return normalized ? mean / static_cast<double>(pred.q) : mean;
}

double hamming_loss(const PredictionSet& pred, const LabelMatrix& truth) {
    check_shapes(pred, truth);
    int64_t mismatches = 0;
    for (int64_t i = 0; i < pred.n; ++i)
        for (int32_t l = 0; l < pred.q; ++l)
            if (pred.decision(i, l) != truth.at(i, l)) ++mismatches;
    return static_cast<double>(mismatches) / (static_cast<double>(pred.n) * static_cast<double>(pred.q));
}

double ranking_loss(const PredictionSet& pred, const LabelMatrix& truth) {
    check_shapes(pred, truth);
    double sum = 0.0;
    int64_t counted = 0;
    for (int64_t i = 0; i < pred.n; ++i) {
        const int32_t ny = truth_count(truth, i);
        if (ny == 0 || ny == truth.q) continue;
        const std::vector<int32_t> rank = label_ranks(pred, i);
        int64_t wrong = 0;
        for (int32_t rel = 0; rel < pred.q; ++rel) {
            if (!truth.at(i, rel)) continue;
            for (int32_t irr = 0; irr < pred.q; ++irr) {
                if (truth.at(i, irr)) continue;
                if (rank[static_cast<size_t>(rel)] > rank[static_cast<size_t>(irr)]) ++wrong;
            }
        }
        sum += static_cast<double>(wrong) / (static_cast<double>(ny) * static_cast<double>(truth.q - ny));
        ++counted;
    }
    if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum / static_cast<double>(counted);
}

double macro_f1(const PredictionSet& pred, const LabelMatrix& truth) {
    check_shapes(pred, truth);
    double sum = 0.0;
    for (int32_t l = 0; l < pred.q; ++l) {
        int64_t tp = 0, fp = 0, fn = 0;
        for (int64_t i = 0; i < pred.n; ++i) {
            const bool p = pred.decision(i, l) != 0;
            const bool t = truth.at(i, l) != 0;
            tp += (p && t);
            fp += (p && !t);
            fn += (!p && t);
        }
        const double denom = static_cast<double>(2 * tp + fp + fn);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    }
    return sum / static_cast<double>(pred.q);
}

double micro_f1(const PredictionSet& pred, const LabelMatrix& truth) {
    check_shapes(pred, truth);
    int64_t tp = 0, fp = 0, fn = 0;
    for (int32_t l = 0; l < pred.q; ++l) {
        for (int64_t i = 0; i < pred.n; ++i) {
            const bool p = pred.decision(i, l) != 0;
            const bool t = truth.at(i, l) != 0;
            tp += (p && t);
            fp += (p && !t);
            fn += (!p && t);
        }
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

MetricReport compute_metrics(const PredictionSet& pred, const LabelMatrix& truth, bool raw_coverage) {
    MetricReport r;
    r.ap = average_precision(pred, truth);
    r.cv = coverage(pred, truth, !raw_coverage);
    r.hl = hamming_loss(pred, truth);
    r.rl = ranking_loss(pred, truth);
    r.fma = macro_f1(pred, truth);
    r.fmi = micro_f1(pred, truth);
    return r;
}

} // namespace fedcmfs
