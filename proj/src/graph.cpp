#include "kignn/graph.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <sstream>

namespace kignn {

void Graph::finalize() {
    if (n < 0 || props < 0) throw std::runtime_error("negative graph dimensions");
    labels.resize(n, 0u);
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges) {
        if (e.first == e.second) throw std::runtime_error("self-loop");
        if (e.first > e.second) std::swap(e.first, e.second);
        if (e.first < 0 || e.second >= n) throw std::runtime_error("edge endpoint out of range");
        if (!seen.insert(e).second) throw std::runtime_error("duplicate edge");
    }
    std::sort(edges.begin(), edges.end());
    adj.assign(n, {});
    for (auto& e : edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

std::vector<int> bfs_distances(const Graph& g, int from) {
    std::vector<int> dist(g.n, -1);
    std::deque<int> q{from};
    dist[from] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : g.adj[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return dist;
}

PointedKeyedGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_nodes = false, have_props = false;
    int point = -1, point_line = 0;
    Graph g;
    std::vector<std::pair<int, Rat>> keys;
    auto err = [&](const std::string& msg) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (!have_nodes && kw != "nodes") err("first directive must be 'nodes'");
        if (kw == "nodes") {
            if (have_nodes) err("duplicate 'nodes'");
            if (!(ls >> g.n) || g.n < 0) err("bad node count");
            have_nodes = true;
        } else if (kw == "props") {
            if (have_props) err("duplicate 'props'");
            if (!(ls >> g.props) || g.props < 0) err("bad prop count");
            have_props = true;
            g.labels.assign(g.n, 0u);
        } else if (kw == "edge") {
            int u, v;
            if (!(ls >> u >> v)) err("bad edge");
            if (u < 0 || u >= g.n || v < 0 || v >= g.n) err("edge endpoint out of range");
            if (u == v) err("self-loop at node " + std::to_string(u));
            g.edges.emplace_back(u, v);
        } else if (kw == "label") {
            if (!have_props) err("'label' before 'props'");
            int v;
            std::string bits;
            if (!(ls >> v >> bits)) err("bad label");
            if (v < 0 || v >= g.n) err("label node out of range");
            if (static_cast<int>(bits.size()) != g.props) err("label bit width mismatch");
            uint32_t m = 0;
            for (int p = 0; p < g.props; ++p) {
                if (bits[p] != '0' && bits[p] != '1') err("label bits must be 0/1");
                if (bits[p] == '1') m |= (1u << p);
            }
            g.labels[v] = m;
        } else if (kw == "point") {
            if (point >= 0) err("duplicate 'point'");
            if (!(ls >> point) || point < 0 || point >= g.n) err("bad point");
            point_line = lineno;
        } else if (kw == "key") {
            int v;
            std::string lit;
            if (!(ls >> v >> lit)) err("bad key");
            if (v < 0 || v >= g.n) err("key node out of range");
            Rat q;
            try {
                q = parse_rational(lit);
            } catch (const std::exception& e) {
                err(e.what());
            }
            keys.emplace_back(v, q);
        } else {
            err("unknown directive '" + kw + "'");
        }
        std::string extra;
        if (ls >> extra) err("trailing tokens");
    }
    ++lineno;
    if (!have_nodes) err("missing 'nodes'");
    if (!have_props) err("missing 'props'");
    if (point < 0) err("missing 'point'");
    (void)point_line;
    {
        std::set<std::pair<int, int>> es;
        for (auto e : g.edges) {
            if (e.first > e.second) std::swap(e.first, e.second);
            if (!es.insert(e).second) err("duplicate edge");
        }
    }
    g.finalize();
    PointedKeyedGraph out;
    out.pg = {g, point};
    if (!keys.empty()) {
        if (static_cast<int>(keys.size()) != g.n) err("'key' lines must cover every node or none");
        Keying k;
        k.values.resize(g.n);
        std::vector<bool> got(g.n, false);
        for (auto& [v, q] : keys) {
            if (got[v]) err("duplicate key for node " + std::to_string(v));
            got[v] = true;
            k.values[v] = q;
        }
        std::set<Rat> distinct(k.values.begin(), k.values.end());
        if (distinct.size() != k.values.size()) err("duplicate key value");
        out.keying = std::move(k);
    }
    return out;
}

std::string write_graph(const PointedKeyedGraph& g) {
    std::ostringstream out;
    const Graph& gr = g.pg.g;
    out << "nodes " << gr.n << "\n";
    out << "props " << gr.props << "\n";
    for (auto& e : gr.edges) out << "edge " << e.first << " " << e.second << "\n";
    for (int v = 0; v < gr.n; ++v) {
        if (gr.labels[v] == 0) continue;
        out << "label " << v << " ";
        for (int p = 0; p < gr.props; ++p) out << (gr.label_bit(v, p) ? '1' : '0');
        out << "\n";
    }
    out << "point " << g.pg.point << "\n";
    if (g.keying)
        for (int v = 0; v < gr.n; ++v)
            out << "key " << v << " " << rat_string(g.keying->values[v]) << "\n";
    return out.str();
}

PointedKeyedGraph builtin_graph(const std::string& name, const std::vector<int>& params) {
    auto need = [&](size_t k) {
        if (params.size() != k)
            throw std::runtime_error("fixture '" + name + "' wants " + std::to_string(k) + " parameter(s)");
    };
    Graph g;
    int point = 0;
    if (name == "cycle") {
        need(1);
        int n = params[0];
        if (n < 3) throw std::runtime_error("cycle needs n >= 3");
        g.n = n;
        for (int i = 0; i < n; ++i) g.edges.emplace_back(i, (i + 1) % n);
    } else if (name == "path") {
        need(1);
        int n = params[0];
        if (n < 1) throw std::runtime_error("path needs n >= 1");
        g.n = n;
        for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    } else if (name == "star") {
        need(1);
        int k = params[0];
        if (k < 0) throw std::runtime_error("star needs k >= 0");
        g.n = k + 1;
        for (int i = 1; i <= k; ++i) g.edges.emplace_back(0, i);
    } else if (name == "complete") {
        need(1);
        int n = params[0];
        if (n < 1) throw std::runtime_error("complete needs n >= 1");
        g.n = n;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
    } else if (name == "triangle_p") {
        need(0);
        g.n = 3;
        g.props = 1;
        g.edges = {{0, 1}, {1, 2}, {0, 2}};
        g.labels = {0u, 1u, 0u};
    } else if (name == "single_node") {
        need(0);
        g.n = 1;
    } else {
        throw std::runtime_error("unknown fixture '" + name + "'");
    }
    g.finalize();
    return {{g, point}, std::nullopt};
}

static bool point_component_is_all(const Graph& g, int point) {
    auto d = bfs_distances(g, point);
    for (int v = 0; v < g.n; ++v)
        if (d[v] < 0) return false;
    return true;
}

std::vector<PointedGraph> enumerate_pointed_graphs_exact(int nodes, int prop_count, bool connected_only) {
    if (nodes < 1 || nodes > 6 || prop_count < 0 || prop_count > 2)
        throw std::runtime_error("enumeration bound exceeded (nodes <= 6, props <= 2)");
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) slots.emplace_back(i, j);
    const uint64_t edge_masks = 1ull << slots.size();
    const uint64_t lab_masks = 1ull << (nodes * prop_count);
    std::vector<PointedGraph> out;
    for (uint64_t em = 0; em < edge_masks; ++em) {
        Graph base;
        base.n = nodes;
        base.props = prop_count;
        for (size_t s = 0; s < slots.size(); ++s)
            if ((em >> s) & 1) base.edges.push_back(slots[s]);
        base.finalize();
        for (uint64_t lm = 0; lm < lab_masks; ++lm) {
            Graph g = base;
            for (int v = 0; v < nodes; ++v)
                g.labels[v] = static_cast<uint32_t>((lm >> (v * prop_count)) & ((1u << prop_count) - 1));
            for (int p = 0; p < nodes; ++p) {
                if (connected_only && !point_component_is_all(g, p)) continue;
                out.push_back({g, p});
            }
        }
    }
    return out;
}

std::vector<PointedGraph> enumerate_pointed_graphs(int max_nodes, int prop_count, bool connected_only) {
    std::vector<PointedGraph> out;
    for (int n = 1; n <= max_nodes; ++n) {
        auto part = enumerate_pointed_graphs_exact(n, prop_count, connected_only);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

PointedGraph restrict_neighborhood(const PointedGraph& g, int r) {
    if (r < 0) throw std::runtime_error("radius must be >= 0");
    auto dist = bfs_distances(g.g, g.point);
    std::vector<int> keep;  /* BFS order: sort by (distance, id); matches layer-by-layer BFS */
    for (int v = 0; v < g.g.n; ++v)
        if (dist[v] >= 0 && dist[v] <= r) keep.push_back(v);
    std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) { return dist[a] < dist[b]; });
    std::vector<int> newid(g.g.n, -1);
    for (size_t i = 0; i < keep.size(); ++i) newid[keep[i]] = static_cast<int>(i);
    Graph h;
    h.n = static_cast<int>(keep.size());
    h.props = g.g.props;
    h.labels.resize(h.n);
    for (int v : keep) h.labels[newid[v]] = g.g.labels[v];
    for (auto& e : g.g.edges)
        if (newid[e.first] >= 0 && newid[e.second] >= 0)
            h.edges.emplace_back(newid[e.first], newid[e.second]);
    h.finalize();
    return {h, newid[g.point]};
}

PointedGraph unravel(const PointedGraph& g, int L) {
    if (L < 0) throw std::runtime_error("depth must be >= 0");
    Graph t;
    t.props = g.g.props;
    std::vector<int> endpoint{g.point};
    std::vector<int> depth{0};
    t.n = 1;
    for (int i = 0; i < t.n; ++i) {
        if (depth[i] == L) continue;
        for (int nb : g.g.adj[endpoint[i]]) {
            endpoint.push_back(nb);
            depth.push_back(depth[i] + 1);
            t.edges.emplace_back(i, t.n);
            ++t.n;
        }
    }
    t.labels.resize(t.n);
    for (int i = 0; i < t.n; ++i) t.labels[i] = g.g.labels[endpoint[i]];
    t.finalize();
    return {t, 0};
}

Keying random_keying(const Graph& g, uint64_t seed) {
    std::mt19937 rng(static_cast<uint32_t>(seed ^ (seed >> 32)));
    std::uniform_int_distribution<int> dist(-1000000, 1000000);
    Keying k;
    std::set<int> used;
    for (int v = 0; v < g.n; ++v) {
        int x = dist(rng);
        while (!used.insert(x).second) x = dist(rng);
        k.values.emplace_back(Rat(x, 1000));
        k.values.back().canonicalize();
    }
    return k;
}

namespace {
struct IsoSearch {
    const Graph& g;
    const Graph& h;
    std::vector<int> map;   /* g node -> h node or -1 */
    std::vector<bool> used; /* h node taken */

    bool consistent(int u, int v) const {
        if (g.labels[u] != h.labels[v]) return false;
        if (g.degree(u) != h.degree(v)) return false;
        for (int w = 0; w < g.n; ++w) {
            if (map[w] < 0) continue;
            if (g.has_edge(u, w) != h.has_edge(v, map[w])) return false;
        }
        return true;
    }
    bool extend(const std::vector<int>& order, size_t idx) {
        if (idx == order.size()) return true;
        int u = order[idx];
        for (int v = 0; v < h.n; ++v) {
            if (used[v] || !consistent(u, v)) continue;
            map[u] = v;
            used[v] = true;
            if (extend(order, idx + 1)) return true;
            map[u] = -1;
            used[v] = false;
        }
        return false;
    }
};
}  // namespace

std::optional<std::vector<int>> is_isomorphic(const PointedGraph& g, const PointedGraph& h) {
    if (g.g.n != h.g.n || g.g.props != h.g.props) return std::nullopt;
    IsoSearch s{g.g, h.g, std::vector<int>(g.g.n, -1), std::vector<bool>(h.g.n, false)};
    if (!s.consistent(g.point, h.point)) return std::nullopt;
    s.map[g.point] = h.point;
    s.used[h.point] = true;
    /* order remaining nodes by BFS from the point so adjacency constraints bind early */
    auto dist = bfs_distances(g.g, g.point);
    std::vector<int> order;
    for (int v = 0; v < g.g.n; ++v)
        if (v != g.point) order.push_back(v);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        int da = dist[a] < 0 ? g.g.n + 1 : dist[a];
        int db = dist[b] < 0 ? g.g.n + 1 : dist[b];
        return da < db;
    });
    if (s.extend(order, 0)) return s.map;
    return std::nullopt;
}

}  // namespace kignn
