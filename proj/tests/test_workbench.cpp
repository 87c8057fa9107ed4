#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kignn/workbench.hpp"

using namespace kignn;

static int cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "kignn");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream os;
    int rc = run_cli(static_cast<int>(argv.size()), argv.data(), os);
    if (out) *out = os.str();
    return rc;
}

static std::string tmp_file(const std::string& name, const std::string& content) {
    std::string path = "/tmp/kignn_test_" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

TEST_CASE("invariance falsifier catches a key-dependent classifier") {
    GnnClassifier leak;
    leak.expr = val();
    leak.metadata = "raw key output";
    auto rep = test_key_invariance(leak, 1, 0, 20, 42);
    CHECK(rep.violation_found);
    CHECK(rep.graphs_tested >= 1);

    // the counterexample must replay: same graph, recorded seeds, differing decisions
    PointedKeyedGraph a{rep.graph, random_keying(rep.graph.g, rep.seed_a)};
    PointedKeyedGraph b{rep.graph, random_keying(rep.graph.g, rep.seed_b)};
    CHECK(classify(leak, a).decision == rep.decision_a);
    CHECK(classify(leak, b).decision == rep.decision_b);
    CHECK(rep.decision_a != rep.decision_b);

    auto text = format_invariance(rep, false);
    CHECK(text.find("COUNTEREXAMPLE") != std::string::npos);
    auto j = nlohmann::json::parse(format_invariance(rep, true));
    CHECK(j["verdict"] == "COUNTEREXAMPLE");
    CHECK(j["counterexample"]["decision_a"] != j["counterexample"]["decision_b"]);
}

TEST_CASE("invariance falsifier clears key-invariant classifiers") {
    auto rep1 = test_key_invariance(fixture_classifier("q_even"), 4, 0, 8, 5);
    CHECK(!rep1.violation_found);
    CHECK(format_invariance(rep1, false).find("NO_VIOLATION_FOUND") != std::string::npos);

    auto rep2 = test_key_invariance(fixture_classifier("diamond2top"), 4, 0, 8, 5);
    CHECK(!rep2.violation_found);
}

TEST_CASE("oracle agreement across targets on small corpora") {
    struct Run {
        CompileTarget t;
        int max_nodes, count, keyings;
    };
    for (Run r : {Run{CompileTarget::GML_LOCALSUM_RELU, 3, 8, 1},
                  Run{CompileTarget::ML_LOCALMAX_RELU, 3, 8, 1},
                  Run{CompileTarget::WGML_TOP_LOCALMAX_RELU, 3, 6, 3},
                  Run{CompileTarget::WGML_MODAL_LOCALMAX_SIGMOID, 3, 4, 3},
                  Run{CompileTarget::LDDL_LOCALMAX_SEMILINEAR, 3, 6, 3},
                  Run{CompileTarget::ISOTYPE_LOCALMAX_SEMILINEAR, 3, 0, 3},
                  Run{CompileTarget::ISOTYPE_LOCALSUM_SQUARE, 3, 0, 3},
                  Run{CompileTarget::ISOTYPE_GLOBALSUM_SEMILINEAR, 3, 0, 3},
                  Run{CompileTarget::UNIQADDR_LOCALSUM_SIGMOID, 3, 0, 2},
                  Run{CompileTarget::UNIQADDR_LOCALSUM_SEMILINEAR, 3, 0, 2}}) {
        auto rep = oracle_agreement(r.t, r.max_nodes, r.count, r.keyings, 1234);
        INFO(target_name(r.t), ": ", format_oracle(rep, false));
        CHECK(rep.pass());
        CHECK(rep.instances > 0);
        CHECK(rep.wall_seconds >= 0);
    }
}

TEST_CASE("oracle report formatting includes mismatches") {
    OracleReport rep;
    rep.target = CompileTarget::GML_LOCALSUM_RELU;
    rep.corpus = "synthetic";
    rep.instances = 1;
    rep.mismatches.push_back({0, "<>p0", 3, 77, true, false});
    CHECK(!rep.pass());
    auto text = format_oracle(rep, false);
    CHECK(text.find("FAIL") != std::string::npos);
    CHECK(text.find("<>p0") != std::string::npos);
    auto j = nlohmann::json::parse(format_oracle(rep, true));
    CHECK(j["verdict"] == "FAIL");
    CHECK(j["mismatches"].size() == 1);
}

TEST_CASE("separation reports") {
    for (const char* name : {"covering_obstruction_c3", "q_even_positive",
                             "triangle_complement", "policy_collapse_demo"}) {
        auto rep = separation_report(name);
        INFO(rep.text);
        CHECK(rep.pass);
        CHECK(!rep.text.empty());
    }
    CHECK_THROWS(separation_report("no_such_report"));
}

TEST_CASE("wgml sampler stays in fragment") {
    for (uint64_t s = 0; s < 30; ++s) {
        auto top = random_wgml(s, 3, 1, true);
        CHECK(wgml_membership(top).cls == WgmlClass::InWgmlTop);
        auto modal = random_wgml(s, 3, 1, false);
        CHECK(wgml_membership(modal).cls != WgmlClass::NotWgml);
    }
}

TEST_CASE("feature sampler is exact-capable and continuous-only") {
    for (uint64_t s = 0; s < 40; ++s) {
        auto e = random_feature_expr(s, 3, 1);
        CHECK(exact_capable(e));
        auto ops = ops_used(e);
        CHECK(!ops.count(Op::Heaviside));
        CHECK(!ops.count(Op::TriWave));
        CHECK(!ops.count(Op::IfPos));
        CHECK(!ops.count(Op::Sigmoid));
    }
}

TEST_CASE("cli round trips") {
    std::string out;

    CHECK(cli({"parse", "--logic", "gml", "<>{=2}p0"}, &out) == 0);
    CHECK(out == "<>{>=2}p0 & ~<>{>=3}p0\n");
    CHECK(cli({"parse", "--logic", "lddl", "<step;step>=1 p0"}, &out) == 0);
    CHECK(out.find("step") != std::string::npos);
    CHECK(cli({"parse", "--logic", "ml", "<>{>=2}p0"}, &out) == 2);  // graded, not ML

    auto star2 = tmp_file("star2.pg", "nodes 3\nprops 1\npoint 0\nedge 0 1\nedge 0 2\nlabel 1 1\n");
    auto star1 = tmp_file("star1.pg", "nodes 2\nprops 1\npoint 0\nedge 0 1\n");
    CHECK(cli({"check", "--graph", star2, "<>p0"}, &out) == 0);
    CHECK(out == "accept\n");
    CHECK(cli({"check", "--graph", star1, "<>p0"}, &out) == 0);
    CHECK(out == "reject\n");
    CHECK(cli({"check", "--logic", "lddl", "--graph", star2, "<stay>p0"}, &out) == 0);
    CHECK(out == "reject\n");

    std::string model = "/tmp/kignn_test_m.kir";
    CHECK(cli({"compile", "--target", "gml_localsum_relu", "--formula", "<>{>=2}top", "-o",
               model}) == 0);
    CHECK(cli({"eval", "--model", model, "--graph", star2}, &out) == 0);
    CHECK(out == "raw 1\naccept\n");
    CHECK(cli({"--json", "eval", "--model", model, "--graph", star1}, &out) == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j["decision"] == false);

    // keyed targets get a fresh keying when the .pg file has no keys
    CHECK(cli({"compile", "--target", "wgml_top_localmax_relu", "--formula", "<>{>=2}top",
               "-o", model}) == 0);
    CHECK(cli({"eval", "--model", model, "--graph", star2, "--keying-seed", "9"}, &out) == 0);
    CHECK(out.find("accept") != std::string::npos);

    CHECK(cli({"compile", "--target", "uniqaddr_localsum_semilinear", "--formula",
               "p0 || top,p0", "-o", model}) == 0);
    CHECK(cli({"eval", "--model", model, "--graph", star2, "--keying-seed", "3"}, &out) == 0);
    CHECK(out.find("reject") != std::string::npos);  // two p0 leaves, no unique address

    auto tri = tmp_file("tri.pg", write_graph(builtin_graph("triangle_p")));
    CHECK(cli({"compile", "--target", "isotype_localmax_semilinear", "--graph", tri, "-o",
               model}) == 0);
    auto keyed_tri = tmp_file("ktri.pg", write_graph({builtin_graph("triangle_p").pg,
                                                      random_keying(builtin_graph("triangle_p").pg.g, 6)}));
    CHECK(cli({"eval", "--model", model, "--graph", keyed_tri}, &out) == 0);
    CHECK(out.find("accept") != std::string::npos);

    CHECK(cli({"compile", "--target", "fixture", "--formula", "q_even", "-o", model}) == 0);
    auto star4 = tmp_file("star4.pg", write_graph(builtin_graph("star", {4})));
    CHECK(cli({"eval", "--model", model, "--graph", star4}, &out) == 0);
    CHECK(out.find("accept") != std::string::npos);
}

TEST_CASE("cli structure commands") {
    std::string out;
    auto c3 = tmp_file("c3.pg", write_graph(builtin_graph("cycle", {3})));
    auto c6 = tmp_file("c6.pg", write_graph(builtin_graph("cycle", {6})));

    CHECK(cli({"cr", "--graph", c3}, &out) == 0);
    CHECK(out.find("stabilized") != std::string::npos);
    CHECK(cli({"--json", "cr", "--graph", c6}, &out) == 0);
    CHECK(nlohmann::json::parse(out).contains("point_colors"));

    CHECK(cli({"bisim", c3, c6}, &out) == 0);
    CHECK(out == "bisimilar\n");
    auto lone = tmp_file("b1.pg", write_graph(builtin_graph("single_node")));
    CHECK(cli({"bisim", c3, lone}, &out) == 0);
    CHECK(out == "not bisimilar\n");
    CHECK(cli({"bisim", "--rounds", "2", c3, c6}, &out) == 0);
    CHECK(out == "bisimilar\n");

    CHECK(cli({"cover", c6, c3}, &out) == 0);
    CHECK(out.find("covering found") != std::string::npos);
    CHECK(cli({"cover", c3, c6}, &out) == 0);
    CHECK(out == "no covering found\n");
    CHECK(cli({"--json", "cover", c6, c3}, &out) == 0);
    CHECK(nlohmann::json::parse(out)["found"] == true);
}

TEST_CASE("cli workbench commands and exit codes") {
    std::string out;
    std::string model = "/tmp/kignn_test_inv.kir";

    GnnClassifier leak;
    leak.expr = val();
    leak.metadata = "raw key output";
    tmp_file("inv.kir", write_model(leak));
    CHECK(cli({"invariance", "--model", "/tmp/kignn_test_inv.kir", "--max-nodes", "1",
               "--keyings", "20", "--seed", "42"}, &out) == 1);
    CHECK(out.find("COUNTEREXAMPLE") != std::string::npos);

    CHECK(cli({"compile", "--target", "gml_localsum_relu", "--formula", "<>p0", "-o", model}) == 0);
    CHECK(cli({"invariance", "--model", model, "--max-nodes", "3", "--props", "1",
               "--keyings", "4"}, &out) == 0);
    CHECK(out.find("NO_VIOLATION_FOUND") != std::string::npos);

    CHECK(cli({"oracle", "--target", "ml_localmax_relu", "--max-nodes", "3", "--count", "4",
               "--seed", "9"}, &out) == 0);
    CHECK(out.find("PASS") != std::string::npos);
    CHECK(cli({"--json", "oracle", "--target", "isotype_localsum_square", "--max-nodes", "3",
               "--keyings", "2"}, &out) == 0);
    CHECK(nlohmann::json::parse(out)["verdict"] == "PASS");

    CHECK(cli({"report", "q_even_positive"}, &out) == 0);
    CHECK(out.find("PASS") != std::string::npos);

    // usage and runtime failures exit 2
    CHECK(cli({"nonsense"}, &out) == 2);
    CHECK(cli({"check", "--graph", "/tmp/does_not_exist.pg", "top"}, &out) == 2);
    CHECK(out.find("error:") != std::string::npos);
    CHECK(cli({"parse", "<>{bad"}, &out) == 2);
    CHECK(cli({"compile", "--target", "no_such_target", "--formula", "top", "-o", model},
              &out) == 2);
    CHECK(cli({"report", "no_such_report"}, &out) == 2);
    CHECK(cli({"eval", "--model", model}, &out) == 2);  // missing --graph
}

TEST_CASE("exact and float evaluation stay close on continuous features") {
    auto graphs = enumerate_pointed_graphs(3, 1, false);
    int checked = 0;
    for (uint64_t s = 0; s < 60; ++s) {
        auto e = random_feature_expr(s, 3, 1);
        auto& g = graphs[s % graphs.size()];
        PointedKeyedGraph kg{g, random_keying(g.g, s + 1)};
        Rat ex = eval_feature(e, kg, Mode::EXACT).q;
        double fl = eval_feature(e, kg, Mode::FLOAT).d;
        double ref = rat_double(ex);
        CHECK(std::abs(ref - fl) <= 1e-9 * std::max(1.0, std::abs(ref)));
        ++checked;
    }
    CHECK(checked == 60);
}
