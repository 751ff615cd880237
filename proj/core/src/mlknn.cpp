#include "fedcmfs/mlknn.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

// Indices of the k nearest stored rows to the query point, by squared
// Euclidean distance; ties broken by ascending training-row index.
void k_nearest(const MlKnnModel& model, const double* point, int64_t exclude_row, std::vector<int32_t>& out) {
    const auto d = model.selected.size();
    std::vector<std::pair<double, int32_t>> dist;
    dist.reserve(static_cast<size_t>(model.n_train));
    for (int64_t r = 0; r < model.n_train; ++r) {
        if (r == exclude_row) continue;
        const double* row = model.train_features.data() + static_cast<size_t>(r) * d;
        double acc = 0.0;
        for (size_t c = 0; c < d; ++c) {
            const double diff = row[c] - point[c];
            acc += diff * diff;
        }
        dist.emplace_back(acc, static_cast<int32_t>(r));
    }
    const auto k = static_cast<size_t>(model.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<ptrdiff_t>(k), dist.end());
    out.resize(k);
    for (size_t i = 0; i < k; ++i) out[i] = dist[i].second;
}

} // namespace

MlKnnModel mlknn_train(const MultiLabelDataset& train, const std::vector<int32_t>& selected, int k,
                       double smoothing) {
    if (selected.empty()) throw_data("mlknn_train: feature selection produced an empty set; nothing to train on");
    if (k < 1) throw_config("mlknn k must be >= 1");
    if (!(smoothing > 0.0)) throw_config("mlknn smoothing must be > 0");
    if (train.n_samples() <= k) throw_data("mlknn_train: need more than k training rows");
    for (int32_t f : selected)
        if (f < 0 || f >= train.n_features()) throw_internal("selected index is not a feature column");

    MlKnnModel model;
    model.k = k;
    model.smoothing = smoothing;
    model.selected = selected;
    model.n_train = train.n_samples();
    model.q = train.n_labels();

    const auto n = static_cast<size_t>(model.n_train);
    const auto d = selected.size();
    const auto q = static_cast<size_t>(model.q);
    model.train_features.resize(n * d);
    for (size_t c = 0; c < d; ++c) {
        const double* col = train.column(selected[c]);
        for (size_t r = 0; r < n; ++r) model.train_features[r * d + c] = col[r];
    }
    model.train_labels.resize(n * q);
    for (size_t l = 0; l < q; ++l) {
        const double* col = train.column(train.label_var(static_cast<int32_t>(l)).index);
        for (size_t r = 0; r < n; ++r) model.train_labels[r * q + l] = col[r] != 0.0 ? 1 : 0;
    }

    const double s = smoothing;
    model.prior1.resize(q);
    for (size_t l = 0; l < q; ++l) {
        int64_t pos = 0;
        for (size_t r = 0; r < n; ++r) pos += model.train_labels[r * q + l];
        model.prior1[l] = (s + static_cast<double>(pos)) / (2.0 * s + static_cast<double>(model.n_train));
    }

    // Count, per label, how often a relevant/irrelevant training sample sees
    // exactly j relevant neighbours among its k nearest (self excluded).
    std::vector<int64_t> c1(q * static_cast<size_t>(k + 1), 0);
    std::vector<int64_t> c0(q * static_cast<size_t>(k + 1), 0);
    std::vector<int32_t> nn;
    for (size_t r = 0; r < n; ++r) {
        k_nearest(model, model.train_features.data() + r * d, static_cast<int64_t>(r), nn);
        for (size_t l = 0; l < q; ++l) {
            int32_t delta = 0;
            for (int32_t nb : nn) delta += model.train_labels[static_cast<size_t>(nb) * q + l];
            if (model.train_labels[r * q + l])
                ++c1[l * static_cast<size_t>(k + 1) + static_cast<size_t>(delta)];
            else
                ++c0[l * static_cast<size_t>(k + 1) + static_cast<size_t>(delta)];
        }
    }

    model.cond1.resize(q * static_cast<size_t>(k + 1));
    model.cond0.resize(q * static_cast<size_t>(k + 1));
    for (size_t l = 0; l < q; ++l) {
        int64_t sum1 = 0, sum0 = 0;
        for (int j = 0; j <= k; ++j) {
            sum1 += c1[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)];
            sum0 += c0[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)];
        }
        for (int j = 0; j <= k; ++j) {
            model.cond1[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)] =
                (s + static_cast<double>(c1[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)])) /
                (s * static_cast<double>(k + 1) + static_cast<double>(sum1));
            model.cond0[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)] =
                (s + static_cast<double>(c0[l * static_cast<size_t>(k + 1) + static_cast<size_t>(j)])) /
                (s * static_cast<double>(k + 1) + static_cast<double>(sum0));
        }
    }
    return model;
}

PredictionSet mlknn_predict(const MlKnnModel& model, const MultiLabelDataset& test) {
    if (test.n_labels() != model.q) throw_data("mlknn_predict: label count mismatch");
    for (int32_t f : model.selected)
        if (f >= test.n_features()) throw_data("mlknn_predict: test set lacks a selected feature column");

    const auto n = static_cast<size_t>(test.n_samples());
    const auto d = model.selected.size();
    const auto q = static_cast<size_t>(model.q);

    PredictionSet pred;
    pred.n = test.n_samples();
    pred.q = model.q;
    pred.confidences.resize(n * q);
    pred.decisions.resize(n * q);

    std::vector<double> point(d);
    std::vector<int32_t> nn;
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < d; ++c) point[c] = test.column(model.selected[c])[static_cast<int64_t>(i)];
        k_nearest(model, point.data(), -1, nn);
        for (size_t l = 0; l < q; ++l) {
            int32_t delta = 0;
            for (int32_t nb : nn) delta += model.train_labels[static_cast<size_t>(nb) * q + l];
            const double p1 = model.prior1[l] * model.cond1[l * static_cast<size_t>(model.k + 1) + static_cast<size_t>(delta)];
            const double p0 = (1.0 - model.prior1[l]) * model.cond0[l * static_cast<size_t>(model.k + 1) + static_cast<size_t>(delta)];
            const double conf = p1 / (p1 + p0);
            pred.confidences[i * q + l] = conf;
            pred.decisions[i * q + l] = p1 > p0 ? 1 : 0;
        }
    }
    return pred;
}

std::string PredictionSet::to_json() const {
    nlohmann::json j{{"n", n}, {"q", q}, {"confidences", confidences}, {"decisions", decisions}};
    return j.dump();
}

PredictionSet PredictionSet::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    PredictionSet p;
    p.n = j.at("n").get<int64_t>();
    p.q = j.at("q").get<int32_t>();
    p.confidences = j.at("confidences").get<std::vector<double>>();
    p.decisions = j.at("decisions").get<std::vector<uint8_t>>();
    if (p.confidences.size() != static_cast<size_t>(p.n) * static_cast<size_t>(p.q) ||
        p.decisions.size() != p.confidences.size())
        throw_data("prediction set JSON has inconsistent dimensions");
    return p;
}

} // namespace fedcmfs
