#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kignn/compilers.hpp"
#include "kignn/equivalence.hpp"

#include <vector>

using namespace kignn;

static PointedKeyedGraph keyed(const PointedGraph& pg, uint64_t seed) {
    return {pg, random_keying(pg.g, seed)};
}

static bool decide(const GnnClassifier& c, const PointedGraph& pg, uint64_t seed) {
    return classify(c, keyed(pg, seed)).decision;
}

static bool decide_plain(const GnnClassifier& c, const PointedGraph& pg) {
    return classify(c, {pg, std::nullopt}).decision;
}

static std::vector<PointedGraph> corpus(int max_nodes, int props, bool connected, size_t stride) {
    auto all = enumerate_pointed_graphs(max_nodes, props, connected);
    std::vector<PointedGraph> out;
    for (size_t i = 0; i < all.size(); i += stride) out.push_back(all[i]);
    return out;
}

static int modal_depth(const GmlPtr& f) {
    switch (f->kind) {
        case GmlKind::Top:
        case GmlKind::Prop: return 0;
        case GmlKind::Not: return modal_depth(f->a);
        case GmlKind::And:
        case GmlKind::Or: return std::max(modal_depth(f->a), modal_depth(f->b));
        case GmlKind::DiamondGeq: return 1 + modal_depth(f->a);
    }
    return 0;
}

/* point's component as a standalone graph */
static bool component_iso(const PointedGraph& host, const PointedGraph& g) {
    return is_isomorphic(restrict_neighborhood(host, host.g.n), g).has_value();
}

TEST_CASE("gml localsum examples") {
    auto leafp = parse_graph("nodes 2\nprops 1\nedge 0 1\nlabel 1 1\npoint 0").pg;
    auto leafq = parse_graph("nodes 2\nprops 1\nedge 0 1\npoint 0").pg;
    auto c = compile_gml_localsum(parse_gml("<>p0"));
    CHECK(decide_plain(c, leafp));
    CHECK_FALSE(decide_plain(c, leafq));
    CHECK(classify(c, {leafp, std::nullopt}).raw.q == 1);
    CHECK(classify(c, {leafq, std::nullopt}).raw.q == 0);

    auto top = compile_gml_localsum(parse_gml("top"));
    CHECK(aggregation_depth(top.expr) == 0);
    CHECK(decide_plain(top, builtin_graph("single_node").pg));

    auto two = compile_gml_localsum(parse_gml("<>{>=2}top"));
    CHECK(decide_plain(two, builtin_graph("star", {3}).pg));
    CHECK_FALSE(decide_plain(two, builtin_graph("star", {1}).pg));

    CHECK(two.policy == Policy::ONE_ZERO);
    CHECK(two.mode == Mode::EXACT);
    CHECK(audit_primitives(two, CompileTarget::GML_LOCALSUM_RELU));
    CHECK_FALSE(ops_used(two.expr).count(Op::Val));
}

TEST_CASE("gml localsum matches the model checker, outputs in {0,1}") {
    auto graphs = corpus(4, 1, false, 5);
    for (int s = 0; s < 40; ++s) {
        GmlPtr f = random_gml(7000 + s, 3, 1, 3);
        auto c = compile_gml_localsum(f);
        CHECK(aggregation_depth(c.expr) == modal_depth(f));
        CHECK(audit_primitives(c, CompileTarget::GML_LOCALSUM_RELU));
        for (auto& g : graphs) {
            auto r = classify(c, {g, std::nullopt});
            CHECK((r.raw.q == 0 || r.raw.q == 1));
            CHECK(r.decision == modelcheck_gml(g, f));
        }
    }
}

TEST_CASE("ml localmax") {
    auto c = compile_ml_localmax(parse_gml("<>p0", Logic::ML));
    CHECK(c.expr->op == Op::LocalMax);
    CHECK(c.expr->kids[0]->op == Op::Prop);

    auto never = compile_ml_localmax(parse_gml("~top", Logic::ML));
    CHECK_FALSE(decide_plain(never, builtin_graph("star", {2}).pg));

    auto box = compile_ml_localmax(parse_gml("[]p0", Logic::ML));
    auto one = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 0 2\nlabel 1 1\npoint 0").pg;
    auto both = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 0 2\nlabel 1 1\nlabel 2 1\npoint 0").pg;
    CHECK_FALSE(decide_plain(box, one));
    CHECK(decide_plain(box, both));

    CHECK_THROWS(compile_ml_localmax(parse_gml("<>{>=2}top")));

    auto graphs = corpus(4, 1, false, 5);
    for (int s = 0; s < 30; ++s) {
        GmlPtr f = random_gml(9100 + s, 3, 1, 1);
        auto cc = compile_ml_localmax(f);
        CHECK(audit_primitives(cc, CompileTarget::ML_LOCALMAX_RELU));
        for (auto& g : graphs) {
            auto r = classify(cc, {g, std::nullopt});
            CHECK((r.raw.q == 0 || r.raw.q == 1));
            CHECK(r.decision == modelcheck_gml(g, f));
        }
    }
}

TEST_CASE("wgml top-argument fragment") {
    auto two = compile_wgml_top(parse_gml("<>{>=2}top"));
    CHECK(two.mode == Mode::EXACT);
    CHECK(audit_primitives(two, CompileTarget::WGML_TOP_LOCALMAX_RELU));
    for (uint64_t s = 0; s < 10; ++s) {
        CHECK(classify(two, keyed(builtin_graph("star", {1}).pg, s)).raw.q == 0);
        CHECK(decide(two, builtin_graph("star", {3}).pg, s));
    }

    CHECK_THROWS(compile_wgml_top(parse_gml("~<>{>=2}top")));
    CHECK_THROWS(compile_wgml_top(parse_gml("<>{>=3}top")));

    GmlPtr f = parse_gml("<>(p0 & <>{>=2}top)");
    auto c = compile_wgml_top(f);
    for (auto& g : corpus(4, 1, true, 3)) {
        bool want = modelcheck_gml(g, f);
        for (uint64_t s = 0; s < 10; ++s) CHECK(decide(c, g, 40 + s) == want);
    }
}

TEST_CASE("wgml modal fragment") {
    GmlPtr f = parse_gml("<>{>=2}p0");
    auto c = compile_wgml_modal(f);
    CHECK(c.mode == Mode::FLOAT);
    CHECK(audit_primitives(c, CompileTarget::WGML_MODAL_LOCALMAX_SIGMOID));

    auto both = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 0 2\nlabel 1 1\nlabel 2 1\npoint 0\nkey 0 0\nkey 1 1\nkey 2 2").pg;
    auto bothk = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 0 2\nlabel 1 1\nlabel 2 1\npoint 0\nkey 0 0\nkey 1 1\nkey 2 2");
    auto r = classify(c, bothk);
    CHECK(r.decision);
    CHECK(r.raw.d > 1e-6);

    auto onek = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 0 2\nlabel 1 1\npoint 0\nkey 0 0\nkey 1 1\nkey 2 2");
    CHECK_FALSE(classify(c, onek).decision);
    CHECK_FALSE(decide(c, parse_graph("nodes 1\nprops 1\npoint 0").pg, 3));

    std::vector<GmlPtr> fs = {f, parse_gml("<>{>=2}(p0 | <>p0)"), parse_gml("<><>{>=2}~p0"),
                              parse_gml("<>{>=2}top & ~p0"), parse_gml("<>{>=2}p0 | <>{>=2}~p0")};
    for (auto& ff : fs) {
        auto cc = compile_wgml_modal(ff);
        for (auto& g : corpus(4, 1, true, 4)) {
            bool want = modelcheck_gml(g, ff);
            for (uint64_t s = 0; s < 6; ++s) {
                auto res = classify(cc, keyed(g, 700 + s));
                CHECK(res.decision == want);
                if (res.decision) CHECK(res.raw.d > 1e-6);
            }
        }
    }
}

TEST_CASE("lddl semilinear") {
    auto uniq = compile_lddl_semilinear(parse_lddl("<step>=1 top"));
    CHECK(uniq.mode == Mode::EXACT);
    CHECK(audit_primitives(uniq, CompileTarget::LDDL_LOCALMAX_SEMILINEAR));
    for (uint64_t s = 0; s < 10; ++s) {
        CHECK(decide(uniq, builtin_graph("star", {1}).pg, s));
        CHECK_FALSE(decide(uniq, builtin_graph("star", {2}).pg, s));
    }

    auto stay = compile_lddl_semilinear(parse_lddl("<stay>top"));
    for (auto& g : corpus(3, 0, false, 1)) CHECK(decide(stay, g, 5));

    auto farp = parse_graph("nodes 3\nprops 1\nedge 0 1\nedge 1 2\nlabel 2 1\npoint 0").pg;
    auto two = compile_lddl_semilinear(parse_lddl("<step;step>=1 p0"));
    for (uint64_t s = 0; s < 10; ++s) CHECK(decide(two, farp, 100 + s));

    for (int s = 0; s < 25; ++s) {
        LddlPtr f = random_lddl(5200 + s, 2, 1);
        auto c = compile_lddl_semilinear(f);
        CHECK(audit_primitives(c, CompileTarget::LDDL_LOCALMAX_SEMILINEAR));
        for (auto& g : corpus(4, 1, true, 6)) {
            bool want = modelcheck_lddl(g, f);
            for (uint64_t k = 0; k < 3; ++k) CHECK(decide(c, g, 300 + k) == want);
        }
    }
}

TEST_CASE("isotype via localmax") {
    auto single = compile_isotype_localmax(builtin_graph("single_node").pg);
    CHECK(audit_primitives(single, CompileTarget::ISOTYPE_LOCALMAX_SEMILINEAR));
    for (auto& g : corpus(3, 0, false, 1)) {
        bool want = component_iso(g, builtin_graph("single_node").pg);
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(single, g, s) == want);
    }

    auto c3 = compile_isotype_localmax(builtin_graph("cycle", {3}).pg);
    for (uint64_t s = 0; s < 5; ++s) {
        CHECK(decide(c3, builtin_graph("cycle", {3}).pg, s));
        CHECK_FALSE(decide(c3, builtin_graph("cycle", {6}).pg, s));
    }

    auto p3 = compile_isotype_localmax(builtin_graph("path", {3}).pg);
    for (auto& g : corpus(4, 0, true, 1)) {
        bool want = component_iso(g, builtin_graph("path", {3}).pg);
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(p3, g, 20 + s) == want);
    }

    CHECK_THROWS(compile_isotype_localmax(parse_graph("nodes 2\nprops 0\npoint 0").pg));
    CHECK_THROWS(compile_isotype_localmax(builtin_graph("path", {5}).pg));
}

TEST_CASE("unique addressing") {
    std::vector<GmlPtr> a1 = {parse_gml("p0")};
    std::vector<GmlPtr> a2 = {parse_gml("top"), parse_gml("p0")};

    auto c6 = parse_graph(
        "nodes 6\nprops 1\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\nedge 5 0\n"
        "label 1 1\nlabel 4 1\npoint 0").pg;
    auto tp = builtin_graph("triangle_p").pg;

    CHECK(unique_address_target(c6, a1) == 1);
    CHECK(unique_address_target(c6, a2) == 4);
    CHECK(unique_address_target(tp, a1) == 1);
    CHECK(unique_address_target(tp, a2) == 1);

    for (auto mode : {UniqAddrMode::SIGMOID, UniqAddrMode::SEMILINEAR}) {
        auto c = compile_unique_address(a1, a2, mode);
        auto same = compile_unique_address(a1, a1, mode);
        for (uint64_t s = 0; s < 10; ++s) {
            CHECK(decide(c, c6, s));
            CHECK_FALSE(decide(c, tp, s));
            CHECK_FALSE(decide(same, c6, s));
            CHECK_FALSE(decide(same, tp, s));
        }
    }
    CHECK(audit_primitives(compile_unique_address(a1, a2, UniqAddrMode::SIGMOID),
                           CompileTarget::UNIQADDR_LOCALSUM_SIGMOID));
    CHECK(audit_primitives(compile_unique_address(a1, a2, UniqAddrMode::SEMILINEAR),
                           CompileTarget::UNIQADDR_LOCALSUM_SEMILINEAR));

    /* both modes = the walk oracle on a swept corpus */
    auto csig = compile_unique_address(a1, a2, UniqAddrMode::SIGMOID);
    auto csem = compile_unique_address(a1, a2, UniqAddrMode::SEMILINEAR);
    for (auto& g : corpus(4, 1, true, 3)) {
        auto t1 = unique_address_target(g, a1);
        auto t2 = unique_address_target(g, a2);
        bool want = t1.has_value() && t2.has_value() && *t1 != *t2;
        for (uint64_t s = 0; s < 3; ++s) {
            CHECK(decide(csig, g, 60 + s) == want);
            CHECK(decide(csem, g, 60 + s) == want);
        }
    }
}

TEST_CASE("cauchy-schwarz distinct detector") {
    auto det = cs_distinct_detector(4);
    auto run = [&](std::vector<long> xs) {
        Scalar a{Mode::EXACT, 0}, b{Mode::EXACT, 0}, c{Mode::EXACT, 0};
        for (long x : xs) {
            if (x != 0) a.q += 1;
            b.q += x;
            c.q += Rat(x) * Rat(x);
        }
        return eval_scalar_fn(det, {a, b, c}, Mode::EXACT).q;
    };
    CHECK(run({5}) == 0);
    CHECK(run({5, 5}) == 0);
    CHECK(run({5, 7}) == 1);
    CHECK(run({0, 0, 3}) == 0);
    CHECK(run({0, -2, 3}) == 1);
}

TEST_CASE("isotype via localsum and squaring") {
    auto tp = compile_isotype_localsum_square(builtin_graph("triangle_p").pg);
    CHECK(audit_primitives(tp, CompileTarget::ISOTYPE_LOCALSUM_SQUARE));
    CHECK_FALSE(ops_used(tp.expr).count(Op::LocalMax));
    for (uint64_t s = 0; s < 10; ++s) CHECK(decide(tp, builtin_graph("triangle_p").pg, s));
    for (auto& g : corpus(3, 1, true, 2)) {
        bool want = component_iso(g, builtin_graph("triangle_p").pg);
        for (uint64_t s = 0; s < 2; ++s) CHECK(decide(tp, g, 11 + s) == want);
    }

    auto edge = compile_isotype_localsum_square(builtin_graph("path", {2}).pg);
    for (auto& g : corpus(4, 0, true, 1)) {
        bool want = component_iso(g, builtin_graph("path", {2}).pg);
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(edge, g, 31 + s) == want);
    }

    auto single = compile_isotype_localsum_square(builtin_graph("single_node").pg);
    for (auto& g : corpus(3, 0, false, 1)) {
        bool want = component_iso(g, builtin_graph("single_node").pg);
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(single, g, s) == want);
    }

    CHECK_THROWS(compile_isotype_localsum_square(builtin_graph("cycle", {4}).pg));
    CHECK_THROWS(compile_isotype_localsum_square(parse_graph("nodes 2\nprops 0\npoint 0").pg));
}

TEST_CASE("isotype via globalsum") {
    auto pair2 = parse_graph("nodes 2\nprops 0\npoint 0").pg;
    auto c = compile_isotype_globalsum(pair2);
    CHECK(audit_primitives(c, CompileTarget::ISOTYPE_GLOBALSUM_SEMILINEAR));
    for (auto& g : corpus(4, 0, false, 2)) {
        bool want = is_isomorphic(g, pair2).has_value();
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(c, g, s) == want);
    }

    auto single = compile_isotype_globalsum(builtin_graph("single_node").pg);
    for (auto& g : corpus(3, 0, false, 1)) {
        bool want = g.g.n == 1;
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(single, g, 7 + s) == want);
    }

    auto gs = compile_isotype_globalsum(builtin_graph("cycle", {3}).pg);
    auto lm = compile_isotype_localmax(builtin_graph("cycle", {3}).pg);
    for (auto& g : corpus(4, 0, true, 1))
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(gs, g, 90 + s) == decide(lm, g, 90 + s));

    CHECK_THROWS(compile_isotype_globalsum(builtin_graph("path", {5}).pg));
}

TEST_CASE("fixtures") {
    auto d2 = fixture_classifier("diamond2top");
    auto w2 = compile_wgml_top(parse_gml("<>{>=2}top"));
    for (auto& g : corpus(4, 0, false, 1))
        for (uint64_t s = 0; s < 5; ++s) {
            bool want = g.g.degree(g.point) >= 2;
            CHECK(decide(d2, g, s) == want);
            CHECK(decide(w2, g, s) == want);
        }

    auto qe = fixture_classifier("q_even");
    CHECK(decide_plain(qe, builtin_graph("star", {4}).pg));
    CHECK_FALSE(decide_plain(qe, builtin_graph("star", {3}).pg));

    auto tc = fixture_classifier("triangle_complement");
    CHECK(tc.mode == Mode::FLOAT);
    for (auto& g : corpus(4, 1, true, 2)) {
        bool want = !is_isomorphic(g, builtin_graph("triangle_p").pg).has_value();
        for (uint64_t s = 0; s < 3; ++s) CHECK(decide(tc, g, 500 + s) == want);
    }
    for (uint64_t s = 0; s < 10; ++s)
        CHECK_FALSE(decide(tc, builtin_graph("triangle_p").pg, s));

    CHECK_THROWS(fixture_classifier("nope"));
}

TEST_CASE("compiled classifiers serialize round-trip") {
    auto c = compile_isotype_localmax(builtin_graph("cycle", {3}).pg);
    auto back = parse_model(write_model(c));
    CHECK(back.policy == c.policy);
    CHECK(back.mode == c.mode);
    CHECK(back.metadata == c.metadata);
    auto g = keyed(builtin_graph("cycle", {3}).pg, 77);
    CHECK(classify(back, g).decision == classify(c, g).decision);

    auto u = compile_unique_address({parse_gml("p0")}, {parse_gml("top"), parse_gml("p0")},
                                    UniqAddrMode::SIGMOID);
    auto ub = parse_model(write_model(u));
    CHECK(ub.metadata == u.metadata);
    CHECK(ub.mode == Mode::FLOAT);
}
