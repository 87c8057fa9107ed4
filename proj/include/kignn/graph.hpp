#pragma once
#include <optional>
#include <string>
#include <vector>

#include "kignn/rational.hpp"

namespace kignn {

/* Finite labeled undirected graph. Nodes are 0..n-1, labels are bitmasks of
   width `props`. Edges are irreflexive and stored once as (u<v). */
struct Graph {
    int n = 0;
    int props = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<uint32_t> labels;           /* one bitmask per node */
    std::vector<std::vector<int>> adj;      /* built by finalize() */

    /* Canonicalizes edges, validates, builds adjacency. Throws on self-loops,
       duplicate edges, or out-of-range endpoints. */
    void finalize();
    bool has_edge(int u, int v) const;
    bool label_bit(int v, int p) const { return (labels[v] >> p) & 1u; }
    int degree(int v) const { return static_cast<int>(adj[v].size()); }
};

struct PointedGraph {
    Graph g;
    int point = 0;
};

/* Per-node rational values. `injective` marks a proper keying; transported
   (pulled-back) valuations may be non-injective. */
struct Keying {
    std::vector<Rat> values;
    bool injective = true;
};

struct PointedKeyedGraph {
    PointedGraph pg;
    std::optional<Keying> keying;
};

/* .pg line format. Errors carry 1-based line numbers. */
PointedKeyedGraph parse_graph(const std::string& text);
std::string write_graph(const PointedKeyedGraph& g);

/* Fixtures: cycle(n>=3), path(n>=1), star(k>=0), complete(n>=1),
   triangle_p, single_node. Point is node 0 (the star center / path end /
   triangle's non-p node). */
PointedKeyedGraph builtin_graph(const std::string& name, const std::vector<int>& params = {});

/* Every pointed labeled graph as raw (edge set, labeling, point) triples, in a
   fixed deterministic order. The plain variant yields sizes 1..max_nodes, the
   _exact variant a single size. connected_only keeps graphs whose point's
   component is the whole graph. Bounds: nodes <= 6, props <= 2. */
std::vector<PointedGraph> enumerate_pointed_graphs(int max_nodes, int prop_count, bool connected_only);
std::vector<PointedGraph> enumerate_pointed_graphs_exact(int nodes, int prop_count, bool connected_only);

/* Induced subgraph on nodes within distance r of the point, ids compacted in
   BFS order (point becomes 0). */
PointedGraph restrict_neighborhood(const PointedGraph& g, int r);

/* Tree of all walks of length <= L starting at the point (immediate
   backtracking allowed); labels copied from walk endpoints. */
PointedGraph unravel(const PointedGraph& g, int L);

/* Deterministic injective keying: i.i.d. integers in [-10^6,10^6] scaled by
   1/10^3, redrawn on collision. */
Keying random_keying(const Graph& g, uint64_t seed);

/* Pointed isomorphism witness (label+edge preserving bijection with
   f(point)=point), or nullopt. Backtracking search, intended for small graphs. */
std::optional<std::vector<int>> is_isomorphic(const PointedGraph& g, const PointedGraph& h);

/* Distance vector from a node (-1 = unreachable). */
std::vector<int> bfs_distances(const Graph& g, int from);

}  // namespace kignn
