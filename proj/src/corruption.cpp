#include <algorithm>

#include "mdsgnn/errors.hpp"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/rng.hpp"

namespace mdsgnn {

IncompleteGraph apply_feature_mask(const Graph& g, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0)
        throw ConfigError("feature mask rate must be in [0, 1]");
    IncompleteGraph out;
    out.graph = g;
    out.mask.known.assign(g.n, 1);
    int count = static_cast<int>(rate * g.n);
    Rng rng(seed, "feature-mask");
    for (int i : rng.sample_without_replacement(g.n, count)) {
        out.mask.known[i] = 0;
        out.graph.features.zero_row(i);
    }
    return out;
}

Graph drop_edges(const Graph& g, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0)
        throw ConfigError("edge drop rate must be in [0, 1]");
    auto edges = g.edge_list();
    int m = static_cast<int>(edges.size());
    int count = static_cast<int>(rate * m);
    Rng rng(seed, "edge-drop");
    std::vector<std::uint8_t> dropped(m, 0);
    for (int e : rng.sample_without_replacement(m, count)) dropped[e] = 1;

    std::vector<std::pair<int, int>> kept;
    kept.reserve(m - count);
    for (int e = 0; e < m; ++e)
        if (!dropped[e]) kept.push_back(edges[e]);

    Graph out = g;
    out.adj = adjacency_from_edges(g.n, kept, "drop_edges");
    return out;
}

IncompleteGraph corrupt_for_seed(const IncompleteGraph& g, double feature_missing,
                                 double edge_missing, std::uint64_t seed) {
    if (feature_missing == 0.0 && edge_missing == 0.0) return g;
    Graph thinned = drop_edges(g.graph, edge_missing, seed);
    IncompleteGraph out = apply_feature_mask(thinned, feature_missing, seed);
    // fold in missingness the input already carried
    for (std::size_t i = 0; i < g.mask.known.size(); ++i) {
        if (g.mask.known[i] || !out.mask.known[i]) continue;
        out.mask.known[i] = 0;
        out.graph.features.zero_row(static_cast<int>(i));
    }
    return out;
}

}  // namespace mdsgnn
