#include "mdsgnn/propagation.hpp"

#include <algorithm>
#include <numeric>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

AugmentedGraph knn_graph(const Matrix& x_tilde, int k) {
    const int n = x_tilde.rows;
    if (k < 1 || k >= n)
        throw ConfigError("knn_graph: need 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");

    Matrix sim = cosine_similarity(x_tilde, x_tilde);

    std::vector<int> ri, ci;
    std::vector<double> v;
    std::vector<int> order(n - 1);
    for (int i = 0; i < n; ++i) {
        const double* srow = sim.row(i);
        int w = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) order[w++] = j;
        // k-th most similar other node under (-s, j) ordering
        std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                         [srow](int a, int b) {
                             if (srow[a] != srow[b]) return srow[a] > srow[b];
                             return a < b;
                         });
        double eps_i = srow[order[k - 1]];
        for (int j = 0; j < n; ++j) {
            if (j == i || srow[j] < eps_i) continue;
            // both directions; duplicates collapse below
            ri.push_back(i); ci.push_back(j); v.push_back(1.0);
            ri.push_back(j); ci.push_back(i); v.push_back(1.0);
        }
    }

    AugmentedGraph out;
    out.k = k;
    out.knn_adjacency = csr_from_coo(n, n, ri, ci, v);
    for (double& val : out.knn_adjacency.values) val = 1.0;  // re-binarize summed duplicates
    out.normalized = sym_normalize(out.knn_adjacency);
    return out;
}

Matrix ppr_propagate(const AugmentedGraph& aug, const Matrix& x_prime,
                     double alpha, int L) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("ppr_propagate: alpha must be in (0, 1]");
    if (L < 1) throw ConfigError("ppr_propagate: L must be >= 1");
    if (aug.normalized.cols != x_prime.rows)
        throw NumericError("ppr_propagate: node counts differ");

    Matrix x = x_prime;
    for (int l = 0; l < L; ++l) {
        Matrix next = spmm(aug.normalized, x);
        for (double& v : next.data) v *= 1.0 - alpha;
        axpy(alpha, x_prime, next);
        x = std::move(next);
    }
    return x;
}

}  // namespace mdsgnn
