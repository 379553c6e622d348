#include "mdsgnn/graph.hpp"

#include <algorithm>
#include <set>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

int Graph::undirected_edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& nb : adj) deg_sum += nb.size();
    return static_cast<int>(deg_sum / 2);
}

std::vector<std::pair<int, int>> Graph::edge_list() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(undirected_edge_count());
    for (int u = 0; u < n; ++u)
        for (int v : adj[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

void Graph::validate() const {
    if (n < 0 || f < 0 || c < 1) throw DataError("graph: bad dimensions");
    if (static_cast<int>(adj.size()) != n) throw DataError("graph: adjacency size != n");
    if (features.rows != n || features.cols != f)
        throw DataError("graph: feature matrix shape mismatch");
    if (static_cast<int>(labels.size()) != n) throw DataError("graph: labels size != n");
    for (int u = 0; u < n; ++u) {
        int prev = -1;
        for (int v : adj[u]) {
            if (v < 0 || v >= n) throw DataError("graph: neighbor index out of range");
            if (v == u) throw DataError("graph: self-loop stored");
            if (v <= prev) throw DataError("graph: neighbor list unsorted or duplicated");
            prev = v;
            if (!std::binary_search(adj[v].begin(), adj[v].end(), u))
                throw DataError("graph: asymmetric adjacency");
        }
    }
    for (int y : labels)
        if (y < 0 || y >= c) throw DataError("graph: label out of range");
    std::set<int> seen;
    for (const auto* split : {&train_idx, &val_idx, &test_idx}) {
        for (int i : *split) {
            if (i < 0 || i >= n) throw DataError("graph: split index out of range");
            if (!seen.insert(i).second) throw DataError("graph: splits overlap");
        }
    }
}

int MaskMatrix::known_count() const {
    int k = 0;
    for (std::uint8_t b : known) k += b ? 1 : 0;
    return k;
}

std::vector<std::vector<int>> adjacency_from_edges(
    int n, const std::vector<std::pair<int, int>>& edges, const std::string& context) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw DataError(context + ": index out of range: (" + std::to_string(u) +
                            ", " + std::to_string(v) + ")");
        if (u == v)
            throw DataError(context + ": self-loop: " + std::to_string(u));
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (int u = 0; u < n; ++u) {
        std::sort(adj[u].begin(), adj[u].end());
        if (std::adjacent_find(adj[u].begin(), adj[u].end()) != adj[u].end())
            throw DataError(context + ": duplicate edge at node " + std::to_string(u));
    }
    return adj;
}

SparseMatrix adjacency_csr(const Graph& g) {
    std::vector<int> ri, ci;
    std::vector<double> v;
    for (int u = 0; u < g.n; ++u)
        for (int w : g.adj[u]) {
            ri.push_back(u);
            ci.push_back(w);
            v.push_back(1.0);
        }
    return csr_from_coo(g.n, g.n, ri, ci, v);
}

std::shared_ptr<const SparseMatrix> adjacency_with_self_loops(const Graph& g) {
    return std::make_shared<const SparseMatrix>(add_identity(adjacency_csr(g)));
}

}  // namespace mdsgnn
