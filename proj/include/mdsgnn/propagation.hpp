#pragma once

#include "mdsgnn/matrix.hpp"
#include "mdsgnn/sparse.hpp"

namespace mdsgnn {

// Symmetric kNN graph over node representations plus its normalization.
struct AugmentedGraph {
    SparseMatrix knn_adjacency;  // binary, symmetric, zero diagonal
    SparseMatrix normalized;     // D^{-1/2} A D^{-1/2}
    int k = 0;
};

// Union of per-node top-k cosine-similarity sets; ties at the k-th
// similarity are all admitted, so every degree is >= k. Self-pairs are
// excluded. Inputs are plain values: graph construction is discrete, nothing
// differentiates through it.
AugmentedGraph knn_graph(const Matrix& x_tilde, int k);

// L steps of X <- (1 - alpha) * normalized * X + alpha * x_prime, starting
// from X = x_prime. A fixed linear transform: no gradient tracking.
Matrix ppr_propagate(const AugmentedGraph& aug, const Matrix& x_prime,
                     double alpha, int L);

}  // namespace mdsgnn
