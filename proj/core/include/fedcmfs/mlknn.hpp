#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcmfs/dataset.hpp"

namespace fedcmfs {

// Multi-label k-nearest-neighbour classifier: per-label MAP posterior from
// neighbourhood label counts with Laplace smoothing.
struct MlKnnModel {
    int k = 10;
    double smoothing = 1.0;
    std::vector<int32_t> selected; // feature column ids used for distances

    int64_t n_train = 0;
    int32_t q = 0;
    std::vector<double> train_features; // n_train x selected.size(), row-major
    std::vector<uint8_t> train_labels;  // n_train x q, row-major

    std::vector<double> prior1;        // per label, P(H1)
    std::vector<double> cond1;         // q x (k+1), P(count=j | H1)
    std::vector<double> cond0;         // q x (k+1), P(count=j | H0)
};

MlKnnModel mlknn_train(const MultiLabelDataset& train, const std::vector<int32_t>& selected, int k,
                       double smoothing);

struct PredictionSet {
    int64_t n = 0;
    int32_t q = 0;
    std::vector<double> confidences; // n x q row-major, posterior P(H1 | evidence)
    std::vector<uint8_t> decisions;  // n x q row-major, MAP rule

    double confidence(int64_t i, int32_t l) const { return confidences[static_cast<size_t>(i) * static_cast<size_t>(q) + static_cast<size_t>(l)]; }
    uint8_t decision(int64_t i, int32_t l) const { return decisions[static_cast<size_t>(i) * static_cast<size_t>(q) + static_cast<size_t>(l)]; }

    std::string to_json() const;
    static PredictionSet from_json(const std::string& text);
};

PredictionSet mlknn_predict(const MlKnnModel& model, const MultiLabelDataset& test);

} // namespace fedcmfs
