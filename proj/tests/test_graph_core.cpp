#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kignn/graph.hpp"

#include <set>

using namespace kignn;

TEST_CASE("rational literals") {
    CHECK(rat_string(parse_rational("0.125")) == "1/8");
    CHECK(rat_string(parse_rational("-3/2")) == "-3/2");
    CHECK(rat_string(parse_rational("6/4")) == "3/2");
    CHECK(parse_rational("7") == Rat(7));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("1.2.3"));
    CHECK_THROWS(parse_rational(""));
}

TEST_CASE("parse_graph basics") {
    auto g = parse_graph("nodes 2\nprops 1\nedge 0 1\nlabel 1 1\npoint 0");
    CHECK(g.pg.g.n == 2);
    CHECK(g.pg.g.props == 1);
    CHECK(g.pg.g.has_edge(0, 1));
    CHECK(g.pg.g.label_bit(1, 0));
    CHECK_FALSE(g.pg.g.label_bit(0, 0));
    CHECK(g.pg.point == 0);
    CHECK_FALSE(g.keying.has_value());

    auto single = parse_graph("nodes 1\nprops 0\npoint 0");
    CHECK(single.pg.g.n == 1);
    CHECK(single.pg.g.edges.empty());
}

TEST_CASE("parse_graph errors carry line numbers") {
    try {
        parse_graph("nodes 2\nprops 0\nedge 0 0\npoint 0");
        FAIL("self-loop accepted");
    } catch (const std::exception& ex) {
        CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS(parse_graph("nodes 2\nprops 0\nedge 0 1\nedge 1 0\npoint 0"));  // duplicate
    CHECK_THROWS(parse_graph("nodes 2\nprops 0\nedge 0 2\npoint 0"));            // range
    CHECK_THROWS(parse_graph("nodes 2\nprops 0"));                               // no point
    CHECK_THROWS(parse_graph("nodes 2\nprops 0\npoint 0\nkey 0 1\nkey 1 1"));    // dup key value
    CHECK_THROWS(parse_graph("nodes 2\nprops 0\npoint 0\nkey 0 1"));             // partial keying
}

TEST_CASE("parse_graph comments and keys") {
    auto g = parse_graph("# a comment\nnodes 2\nprops 0\nedge 0 1\npoint 1\nkey 0 1/2\nkey 1 0.75");
    REQUIRE(g.keying.has_value());
    CHECK(g.keying->values[0] == Rat(1, 2));
    CHECK(g.keying->values[1] == Rat(3, 4));
    CHECK(g.pg.point == 1);
}

TEST_CASE("write_graph round trips") {
    CHECK(write_graph(parse_graph("nodes 1\nprops 0\npoint 0")) == "nodes 1\nprops 0\npoint 0\n");
    std::vector<std::string> cases = {
        "nodes 2\nprops 1\nedge 0 1\nlabel 1 1\npoint 0",
        "nodes 2\nprops 0\nedge 0 1\npoint 1\nkey 0 1/2\nkey 1 3/4",
    };
    for (auto& c : cases) {
        auto g = parse_graph(c);
        auto g2 = parse_graph(write_graph(g));
        CHECK(write_graph(g2) == write_graph(g));
        CHECK(g2.pg.g.edges == g.pg.g.edges);
        CHECK(g2.pg.g.labels == g.pg.g.labels);
        CHECK(g2.pg.point == g.pg.point);
        CHECK((g2.keying.has_value() == g.keying.has_value()));
    }
    auto keyed = parse_graph("nodes 2\nprops 0\nedge 0 1\npoint 0\nkey 0 1/2\nkey 1 3/4");
    auto text = write_graph(keyed);
    CHECK(text.find("key 0 1/2") != std::string::npos);
    CHECK(text.find("key 1 3/4") != std::string::npos);
}

TEST_CASE("builtin fixtures") {
    auto c3 = builtin_graph("cycle", {3});
    CHECK(c3.pg.g.n == 3);
    CHECK(c3.pg.g.edges.size() == 3);
    CHECK(c3.pg.g.props == 0);
    CHECK(c3.pg.point == 0);

    auto tp = builtin_graph("triangle_p");
    CHECK(tp.pg.g.n == 3);
    CHECK(tp.pg.g.props == 1);
    CHECK(tp.pg.g.edges.size() == 3);
    CHECK_FALSE(tp.pg.g.label_bit(0, 0));
    CHECK(tp.pg.g.label_bit(1, 0));
    CHECK_FALSE(tp.pg.g.label_bit(2, 0));
    CHECK(tp.pg.point == 0);

    auto s2 = builtin_graph("star", {2});
    CHECK(s2.pg.g.n == 3);
    CHECK(s2.pg.g.degree(0) == 2);
    CHECK(s2.pg.point == 0);

    CHECK(builtin_graph("path", {3}).pg.g.edges.size() == 2);
    CHECK(builtin_graph("complete", {4}).pg.g.edges.size() == 6);
    CHECK(builtin_graph("single_node").pg.g.n == 1);
    CHECK_THROWS(builtin_graph("cycle", {2}));
    CHECK_THROWS(builtin_graph("moebius"));
}

TEST_CASE("enumeration counts") {
    CHECK(enumerate_pointed_graphs(1, 0, false).size() == 1);
    CHECK(enumerate_pointed_graphs_exact(2, 0, false).size() == 4);
    CHECK(enumerate_pointed_graphs_exact(3, 1, false).size() == 192);
    CHECK(enumerate_pointed_graphs(2, 0, false).size() == 5);  // sizes 1 and 2
    CHECK_THROWS(enumerate_pointed_graphs(7, 0, false));
    CHECK_THROWS(enumerate_pointed_graphs(3, 3, false));
}

TEST_CASE("enumeration validity and determinism") {
    auto all = enumerate_pointed_graphs(3, 1, false);
    auto again = enumerate_pointed_graphs(3, 1, false);
    REQUIRE(all.size() == again.size());
    for (size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].g.edges == again[i].g.edges);
        CHECK(all[i].g.labels == again[i].g.labels);
        CHECK(all[i].point == again[i].point);
        CHECK(all[i].point < all[i].g.n);
        for (auto [u, v] : all[i].g.edges) {
            CHECK(u < v);
            CHECK(all[i].g.has_edge(v, u));
        }
    }
    // no duplicate triples
    std::set<std::string> seen;
    for (auto& pg : all) seen.insert(write_graph({pg, std::nullopt}));
    CHECK(seen.size() == all.size());
}

TEST_CASE("connected_only keeps point components that cover the graph") {
    for (auto& pg : enumerate_pointed_graphs(4, 0, true)) {
        auto d = bfs_distances(pg.g, pg.point);
        for (int x : d) CHECK(x >= 0);
    }
    // two isolated nodes never appear
    auto c = enumerate_pointed_graphs_exact(2, 0, true);
    CHECK(c.size() == 2);  // only the edge graph, either point
}

TEST_CASE("restrict_neighborhood") {
    auto p3 = builtin_graph("path", {3}).pg;
    auto r1 = restrict_neighborhood(p3, 1);
    CHECK(r1.g.n == 2);
    CHECK(r1.g.edges.size() == 1);
    CHECK(r1.point == 0);

    auto c6 = builtin_graph("cycle", {6}).pg;
    auto r2 = restrict_neighborhood(c6, 2);
    CHECK(r2.g.n == 5);
    CHECK(r2.g.edges.size() == 4);  // path of 5 nodes
    CHECK(is_isomorphic(r2, PointedGraph{[] {
                            auto p = builtin_graph("path", {5}).pg;
                            return p.g;
                        }(), 2})
              .has_value());

    // saturation gives the whole component
    auto r3 = restrict_neighborhood(c6, 10);
    CHECK(r3.g.n == 6);

    // matches an independent BFS
    for (auto& pg : enumerate_pointed_graphs(4, 0, false)) {
        for (int r = 0; r <= 3; ++r) {
            auto d = bfs_distances(pg.g, pg.point);
            int want = 0;
            for (int x : d)
                if (x >= 0 && x <= r) ++want;
            CHECK(restrict_neighborhood(pg, r).g.n == want);
        }
    }
}

TEST_CASE("unravel") {
    auto c3 = builtin_graph("cycle", {3}).pg;
    auto u0 = unravel(c3, 0);
    CHECK(u0.g.n == 1);
    auto u2 = unravel(c3, 2);
    CHECK(u2.g.n == 7);  // 1 + 2 + 4 walks
    CHECK(u2.g.edges.size() == 6);

    auto edge = builtin_graph("path", {2}).pg;
    auto u3 = unravel(edge, 3);
    CHECK(u3.g.n == 4);  // walks alternate endpoints
    CHECK(is_isomorphic(u3, builtin_graph("path", {4}).pg).has_value());

    // always a tree
    for (auto& pg : enumerate_pointed_graphs(3, 1, false)) {
        for (int L = 0; L <= 3; ++L) {
            auto t = unravel(pg, L);
            CHECK(t.g.edges.size() == static_cast<size_t>(t.g.n) - 1);
            for (int x : bfs_distances(t.g, t.point)) CHECK(x >= 0);
        }
    }

    // labels copied from walk endpoints
    auto tp = builtin_graph("triangle_p").pg;
    auto ut = unravel(tp, 1);
    CHECK(ut.g.n == 3);
    int plabels = 0;
    for (int v = 0; v < 3; ++v) plabels += ut.g.label_bit(v, 0) ? 1 : 0;
    CHECK(plabels == 1);
    CHECK_FALSE(ut.g.label_bit(ut.point, 0));
}

TEST_CASE("random_keying") {
    auto g = builtin_graph("cycle", {3}).pg.g;
    auto k1 = random_keying(g, 1);
    auto k1b = random_keying(g, 1);
    CHECK(k1.values == k1b.values);
    CHECK(k1.values != random_keying(g, 2).values);
    CHECK(k1.injective);
    std::set<Rat> vals(k1.values.begin(), k1.values.end());
    CHECK(vals.size() == k1.values.size());
    for (auto& v : k1.values) {
        CHECK(v >= Rat(-1000));
        CHECK(v <= Rat(1000));
        CHECK(v.get_den() <= 1000);
    }
}

TEST_CASE("isomorphism oracle") {
    auto c3 = builtin_graph("cycle", {3}).pg;
    auto wit = is_isomorphic(c3, c3);
    REQUIRE(wit.has_value());
    CHECK((*wit)[c3.point] == c3.point);

    CHECK_FALSE(is_isomorphic(c3, builtin_graph("cycle", {4}).pg).has_value());

    PointedGraph c3p1{c3.g, 1};
    CHECK(is_isomorphic(c3, c3p1).has_value());

    // labels matter
    auto tp = builtin_graph("triangle_p").pg;
    PointedGraph tp_at_p{tp.g, 1};
    CHECK_FALSE(is_isomorphic(tp, tp_at_p).has_value());

    // symmetry over small enumerated pairs
    auto all = enumerate_pointed_graphs(3, 0, false);
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i; j < all.size(); ++j)
            CHECK(is_isomorphic(all[i], all[j]).has_value() ==
                  is_isomorphic(all[j], all[i]).has_value());
}
