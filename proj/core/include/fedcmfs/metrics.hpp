#pragma once

#include <cstdint>
#include <vector>

#include "fedcmfs/dataset.hpp"
#include "fedcmfs/mlknn.hpp"

namespace fedcmfs {

// Ground-truth label matrix, decoupled from the full dataset so metrics can
// be recomputed from serialized predictions alone.
struct LabelMatrix {
    int64_t n = 0;
    int32_t q = 0;
    std::vector<uint8_t> y; // n x q row-major

    uint8_t at(int64_t i, int32_t l) const { return y[static_cast<size_t>(i) * static_cast<size_t>(q) + static_cast<size_t>(l)]; }

    static LabelMatrix from_dataset(const MultiLabelDataset& ds);
};

// Predicted rank of every label for one sample: descending confidence, ties
// by ascending label index; best rank is 1.
std::vector<int32_t> label_ranks(const PredictionSet& pred, int64_t sample);

// Samples with empty truth sets are skipped; NaN when every sample is skipped.
double average_precision(const PredictionSet& pred, const LabelMatrix& truth);

// Mean (max rank among relevant labels - 1); divided by q when normalized.
double coverage(const PredictionSet& pred, const LabelMatrix& truth, bool normalized = true);

double hamming_loss(const PredictionSet& pred, const LabelMatrix& truth);

// Fraction of (relevant, irrelevant) pairs ranked wrongly; samples with empty
// or full truth sets are skipped; NaN when every sample is skipped.
double ranking_loss(const PredictionSet& pred, const LabelMatrix& truth);

// Per-label F1 averaged; labels with TP+FP+FN == 0 contribute 0.
double macro_f1(const PredictionSet& pred, const LabelMatrix& truth);

// F1 of counts pooled over labels.
double micro_f1(const PredictionSet& pred, const LabelMatrix& truth);

struct MetricReport {
    double ap = 0.0;
    double cv = 0.0;
    double hl = 0.0;
    double rl = 0.0;
    double fma = 0.0;
    double fmi = 0.0;
};

MetricReport compute_metrics(const PredictionSet& pred, const LabelMatrix& truth, bool raw_coverage = false);

} // namespace fedcmfs
