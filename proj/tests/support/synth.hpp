#pragma once

#include <cstdint>
#include <vector>

#include "fedcmfs/dataset.hpp"

namespace fedcmfs::synth {

// Linear-Gaussian structural model over a DAG. Nodes listed in label_nodes
// become binary labels (thresholded at their latent median-ish zero point);
// the rest stay continuous features.
struct LinearDag {
    int32_t n_nodes = 0;
    std::vector<std::pair<int32_t, int32_t>> edges; // parent -> child, parent < child required
    std::vector<double> coefficients;               // per edge
    std::vector<double> noise_sd;                   // per node
    std::vector<int32_t> label_nodes;               // nodes emitted as binary labels

    // True PC (undirected neighbour set) of a node, feature nodes only.
    std::vector<int32_t> true_pc(int32_t node) const;
};

// Samples the DAG; label nodes binarized as 1[value > 0]. Column order:
// features first (ascending node id), then labels (ascending node id), so a
// node's dataset index differs from its DAG id; the returned map gives
// dataset variable index per DAG node.
struct SampledDataset {
    MultiLabelDataset data;
    std::vector<int32_t> var_of_node;
};
SampledDataset sample_linear_dag(const LinearDag& dag, int64_t n_rows, uint64_t seed);

// Random sparse linear-Gaussian DAG: each node picks parents uniformly from
// its predecessors with the given probability (at most max_parents).
LinearDag random_dag(int32_t n_nodes, int32_t n_labels, double edge_prob, int32_t max_parents, uint64_t seed);

// Discrete dataset from a random Bayesian network with small cardinalities;
// labels are binary nodes. Used for the discrete half of the oracle suite.
MultiLabelDataset sample_discrete_network(int32_t n_features, int32_t n_labels, int64_t n_rows, uint64_t seed);

// Independent uniform discrete columns (null calibration).
MultiLabelDataset null_discrete(int32_t n_features, int32_t n_labels, int32_t n_cats, int64_t n_rows,
                                uint64_t seed);

// Independent standard-normal columns with independent binary labels.
MultiLabelDataset null_continuous(int32_t n_features, int32_t n_labels, int64_t n_rows, uint64_t seed);

// The masking fixture: features A, B, E cause label C; D is a noisy copy of
// C. E has the largest effect, so retrieval screens it first.
struct MaskingFixture {
    MultiLabelDataset data;
    int32_t var_a, var_b, var_e; // feature variable indices
    int32_t var_c, var_d;        // label variable indices
};
MaskingFixture sample_masking_fixture(int64_t n_rows, uint64_t seed);

} // namespace fedcmfs::synth
