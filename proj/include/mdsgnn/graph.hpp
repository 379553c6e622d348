#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mdsgnn/matrix.hpp"
#include "mdsgnn/sparse.hpp"

namespace mdsgnn {

// Undirected attributed graph. Neighbor lists are sorted, symmetric, free of
// duplicates and self-loops; consumers add self-loops where they need them.
struct Graph {
    int n = 0;
    int f = 0;
    int c = 0;
    std::vector<std::vector<int>> adj;
    Matrix features;  // n x f
    std::vector<int> labels;
    std::vector<int> train_idx, val_idx, test_idx;

    int undirected_edge_count() const;
    std::vector<std::pair<int, int>> edge_list() const;  // u < v pairs, sorted
    void validate() const;  // throws DataError on any broken invariant
};

// Per-node all-known / all-missing indicator; the compressed form of the
// row mask matrix M.
struct MaskMatrix {
    std::vector<std::uint8_t> known;  // 1 = features known

    int known_count() const;
    int missing_count() const { return static_cast<int>(known.size()) - known_count(); }
    bool all_known() const { return known_count() == static_cast<int>(known.size()); }
};

// Graph whose features are already masked (missing rows all zero) and whose
// edge set may have been thinned.
struct IncompleteGraph {
    Graph graph;
    MaskMatrix mask;
};

// Builds adjacency lists from an undirected u<v edge list; validates range,
// duplicates, self-loops.
std::vector<std::vector<int>> adjacency_from_edges(
    int n, const std::vector<std::pair<int, int>>& edges, const std::string& context);

// Binary CSR of the stored adjacency (no self-loops), values 1.0.
SparseMatrix adjacency_csr(const Graph& g);

// A + I as CSR; the neighborhood structure used by attention layers.
std::shared_ptr<const SparseMatrix> adjacency_with_self_loops(const Graph& g);

// Dataset directory I/O. Layout:
//   meta.txt      n=<int> / f=<int> / c=<int>, one per line, '#' comments
//   edges.tsv     u<TAB>v per line, 0 <= u < v < n
//   features.tsv  n lines of f tab-separated decimals
//   labels.tsv    n lines, one integer in [0, c)
//   train.idx / val.idx / test.idx   one node index per line
//   mask.tsv      optional, n lines of 0/1 (1 = known); absent = all known
IncompleteGraph load_dataset(const std::string& dir);
void save_dataset(const IncompleteGraph& g, const std::string& dir,
                  const std::vector<std::string>& meta_comments = {});

// Corruption simulators. Deterministic per (seed, rate); feature masking and
// edge dropping consume independent RNG streams so one rate never perturbs
// the other's sample.
IncompleteGraph apply_feature_mask(const Graph& g, double rate, std::uint64_t seed);
Graph drop_edges(const Graph& g, double rate, std::uint64_t seed);

// Per-seed corruption used by multi-seed drivers: drop edges, mask features,
// then fold in any mask already present on the input.
IncompleteGraph corrupt_for_seed(const IncompleteGraph& g, double feature_missing,
                                 double edge_missing, std::uint64_t seed);

}  // namespace mdsgnn
