#include "kignn/equivalence.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace kignn {

static Coloring canonicalize(const std::vector<long long>& raw) {
    std::map<long long, int> ids;
    Coloring out(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        auto it = ids.find(raw[i]);
        if (it == ids.end()) it = ids.emplace(raw[i], static_cast<int>(ids.size())).first;
        out[i] = it->second;
    }
    return out;
}

Coloring label_coloring(const Graph& g) {
    std::vector<long long> raw(g.n);
    for (int v = 0; v < g.n; ++v) raw[v] = g.labels[v];
    return canonicalize(raw);
}

static Coloring refine_once(const Graph& g, const Coloring& col) {
    /* intern (previous color, sorted multiset of neighbor colors) by first appearance */
    std::map<std::pair<int, std::vector<int>>, int> ids;
    Coloring out(g.n);
    for (int v = 0; v < g.n; ++v) {
        std::vector<int> nb;
        for (int w : g.adj[v]) nb.push_back(col[w]);
        std::sort(nb.begin(), nb.end());
        auto key = std::make_pair(col[v], std::move(nb));
        auto it = ids.find(key);
        if (it == ids.end()) it = ids.emplace(std::move(key), static_cast<int>(ids.size())).first;
        out[v] = it->second;
    }
    return out;
}

static Coloring canonical_coloring(const Coloring& c) {
    std::vector<long long> raw(c.begin(), c.end());
    return canonicalize(raw);
}

Coloring color_refine(const Graph& g, const Coloring& init, int rounds) {
    Coloring col = canonical_coloring(init);
    for (int i = 0; i < rounds; ++i) col = refine_once(g, col);
    return col;
}

/* per-round point colors on an arbitrary graph; used on disjoint unions too */
static std::vector<Coloring> refine_to_stability(const Graph& g, int max_rounds) {
    std::vector<Coloring> rounds{label_coloring(g)};
    while (max_rounds < 0 || static_cast<int>(rounds.size()) <= max_rounds) {
        Coloring next = refine_once(g, rounds.back());
        if (next == rounds.back()) break;  /* canonical, so equality = same partition */
        rounds.push_back(std::move(next));
    }
    return rounds;
}

CRSignature cr_signature(const PointedGraph& g, int max_rounds) {
    auto rounds = refine_to_stability(g.g, max_rounds);
    CRSignature sig;
    for (auto& c : rounds) sig.point_colors.push_back(c[g.point]);
    sig.stabilization_round = static_cast<int>(rounds.size()) - 1;
    return sig;
}

static Graph disjoint_union(const Graph& g, const Graph& h) {
    Graph u;
    u.n = g.n + h.n;
    u.props = std::max(g.props, h.props);
    u.labels = g.labels;
    u.labels.insert(u.labels.end(), h.labels.begin(), h.labels.end());
    u.edges = g.edges;
    for (auto [a, b] : h.edges) u.edges.push_back({a + g.n, b + g.n});
    u.finalize();
    return u;
}

bool cr_equivalent(const PointedGraph& g, const PointedGraph& h, int r) {
    Graph u = disjoint_union(g.g, h.g);
    auto rounds = refine_to_stability(u, r);
    if (r >= 0) {
        /* pad with the stable coloring when stabilization beat the budget */
        while (static_cast<int>(rounds.size()) <= r) rounds.push_back(rounds.back());
        rounds.resize(r + 1);
    }
    for (auto& c : rounds)
        if (c[g.point] != c[g.g.n + h.point]) return false;
    return true;
}

/* ---- bisimulation ---- */

std::optional<NodePairs> bisimilar(const PointedGraph& g, const PointedGraph& h) {
    Graph u = disjoint_union(g.g, h.g);
    /* set-based refinement: signature is (label, set of neighbor colors) */
    std::vector<long long> raw(u.n);
    for (int v = 0; v < u.n; ++v) raw[v] = u.labels[v];
    Coloring col = canonicalize(raw);
    while (true) {
        std::map<std::pair<int, std::vector<int>>, int> ids;
        Coloring next(u.n);
        for (int v = 0; v < u.n; ++v) {
            std::vector<int> nb;
            for (int w : u.adj[v]) nb.push_back(col[w]);
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
            auto key = std::make_pair(col[v], std::move(nb));
            auto it = ids.find(key);
            if (it == ids.end()) it = ids.emplace(std::move(key), static_cast<int>(ids.size())).first;
            next[v] = it->second;
        }
        if (next == col) break;
        col = std::move(next);
    }
    if (col[g.point] != col[g.g.n + h.point]) return std::nullopt;
    NodePairs rel;
    for (int a = 0; a < g.g.n; ++a)
        for (int b = 0; b < h.g.n; ++b)
            if (col[a] == col[g.g.n + b]) rel.insert({a, b});
    return rel;
}

bool r_bisimilar(const PointedGraph& g, const PointedGraph& h, int r) {
    int n = g.g.n, m = h.g.n;
    std::vector<std::vector<bool>> w(n, std::vector<bool>(m));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < m; ++b) w[a][b] = g.g.labels[a] == h.g.labels[b];
    for (int j = 0; j < r; ++j) {
        auto next = w;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < m; ++b) {
                if (!w[a][b]) { next[a][b] = false; continue; }
                bool ok = true;
                for (int a2 : g.g.adj[a]) {
                    bool found = false;
                    for (int b2 : h.g.adj[b]) found = found || w[a2][b2];
                    if (!found) { ok = false; break; }
                }
                if (ok)
                    for (int b2 : h.g.adj[b]) {
                        bool found = false;
                        for (int a2 : g.g.adj[a]) found = found || w[a2][b2];
                        if (!found) { ok = false; break; }
                    }
                next[a][b] = ok;
            }
        w = std::move(next);
    }
    return w[g.point][h.point];
}

/* ---- functional bisimulations ---- */

bool verify_functional_bisimulation(const PointedGraph& g, const PointedGraph& h,
                                    const std::vector<int>& f) {
    if (static_cast<int>(f.size()) != g.g.n) return false;
    for (int v : f)
        if (v < 0 || v >= h.g.n) return false;
    if (f[g.point] != h.point) return false;
    for (int u = 0; u < g.g.n; ++u) {
        if (g.g.labels[u] != h.g.labels[f[u]]) return false;
        /* forth: every g-edge maps to an h-edge */
        for (int u2 : g.g.adj[u])
            if (!h.g.has_edge(f[u], f[u2])) return false;
        /* back: every neighbor of f(u) is hit from some neighbor of u */
        for (int v2 : h.g.adj[f[u]]) {
            bool hit = false;
            for (int u2 : g.g.adj[u]) hit = hit || f[u2] == v2;
            if (!hit) return false;
        }
    }
    return true;
}

static bool search_map(const PointedGraph& g, const PointedGraph& h, std::vector<int>& f,
                       const std::vector<int>& order, size_t k, bool covering) {
    if (k == order.size())
        return covering ? verify_covering(g, h, f) : verify_functional_bisimulation(g, h, f);
    int u = order[k];
    for (int v = 0; v < h.g.n; ++v) {
        if (g.g.labels[u] != h.g.labels[v]) continue;
        if (covering && g.g.degree(u) != h.g.degree(v)) continue;
        /* edges to already-assigned nodes must map to edges */
        bool ok = true;
        for (int u2 : g.g.adj[u])
            if (f[u2] >= 0 && !h.g.has_edge(v, f[u2])) { ok = false; break; }
        if (!ok) continue;
        f[u] = v;
        if (search_map(g, h, f, order, k + 1, covering)) return true;
        f[u] = -1;
    }
    return false;
}

static std::optional<std::vector<int>> find_map(const PointedGraph& g, const PointedGraph& h,
                                                bool covering) {
    std::vector<int> f(g.g.n, -1);
    f[g.point] = h.point;
    if (g.g.labels[g.point] != h.g.labels[h.point]) return std::nullopt;
    /* assign in BFS order from the point so edge constraints bite early;
       unreachable nodes go last */
    auto dist = bfs_distances(g.g, g.point);
    std::vector<int> order;
    for (int v = 0; v < g.g.n; ++v)
        if (v != g.point) order.push_back(v);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        unsigned da = dist[a] < 0 ? 1u << 20 : dist[a];
        unsigned db = dist[b] < 0 ? 1u << 20 : dist[b];
        return da < db;
    });
    if (search_map(g, h, f, order, 0, covering)) return f;
    return std::nullopt;
}

std::optional<std::vector<int>> find_functional_bisimulation(const PointedGraph& g,
                                                             const PointedGraph& h) {
    return find_map(g, h, false);
}

/* ---- coverings ---- */

bool verify_covering(const PointedGraph& g, const PointedGraph& h, const std::vector<int>& f) {
    if (static_cast<int>(f.size()) != g.g.n) return false;
    for (int v : f)
        if (v < 0 || v >= h.g.n) return false;
    if (f[g.point] != h.point) return false;
    for (int u = 0; u < g.g.n; ++u) {
        if (g.g.labels[u] != h.g.labels[f[u]]) return false;
        /* f must map N(u) bijectively onto N(f(u)) */
        std::set<int> image;
        for (int u2 : g.g.adj[u]) {
            if (!h.g.has_edge(f[u], f[u2])) return false;
            if (!image.insert(f[u2]).second) return false;  /* not injective on N(u) */
        }
        if (image.size() != h.g.adj[f[u]].size()) return false;
    }
    return true;
}

std::optional<std::vector<int>> find_covering(const PointedGraph& g, const PointedGraph& h) {
    return find_map(g, h, true);
}

std::pair<PointedGraph, std::vector<int>> double_cycle_cover(const PointedGraph& g,
                                                             const std::vector<int>& cycle) {
    size_t k = cycle.size();
    if (k < 3) throw std::runtime_error("cycle must have length >= 3");
    std::set<int> distinct(cycle.begin(), cycle.end());
    if (distinct.size() != k) throw std::runtime_error("cycle nodes must be distinct");
    for (size_t i = 0; i < k; ++i) {
        int a = cycle[i], b = cycle[(i + 1) % k];
        if (a < 0 || a >= g.g.n || !g.g.has_edge(a, b))
            throw std::runtime_error("node list is not a cycle in the graph");
    }
    int c0 = cycle[0], c1 = cycle[1];
    Graph h;
    h.n = 2 * g.g.n;
    h.props = g.g.props;
    h.labels = g.g.labels;
    h.labels.insert(h.labels.end(), g.g.labels.begin(), g.g.labels.end());
    for (auto [a, b] : g.g.edges) {
        bool swapped = (a == std::min(c0, c1) && b == std::max(c0, c1));
        if (swapped) {
            h.edges.push_back({c0, c1 + g.g.n});
            h.edges.push_back({c0 + g.g.n, c1});
        } else {
            h.edges.push_back({a, b});
            h.edges.push_back({a + g.g.n, b + g.g.n});
        }
    }
    h.finalize();
    PointedGraph cover{h, g.point};
    std::vector<int> f(h.n);
    for (int v = 0; v < g.g.n; ++v) f[v] = f[v + g.g.n] = v;
    if (!verify_covering(cover, g, f)) throw std::runtime_error("covering construction failed");
    return {cover, f};
}

}  // namespace kignn
