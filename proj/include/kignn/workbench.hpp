#pragma once
#include <iostream>
#include <string>
#include <vector>

#include "kignn/compilers.hpp"
#include "kignn/equivalence.hpp"

namespace kignn {

/* key-invariance falsifier result; NO_VIOLATION_FOUND is not a proof */
struct InvarianceReport {
    std::string classifier_id;
    int graphs_tested = 0;
    int keyings = 0;
    uint64_t seed = 0;
    bool violation_found = false;
    /* counterexample replay data, valid when violation_found */
    size_t graph_index = 0;
    PointedGraph graph;
    uint64_t seed_a = 0, seed_b = 0;
    bool decision_a = false, decision_b = false;
};

InvarianceReport test_key_invariance(const GnnClassifier& c, int max_nodes, int props,
                                     int keyings, uint64_t seed);
std::string format_invariance(const InvarianceReport& r, bool json);

struct OracleMismatch {
    size_t source_index = 0;
    std::string source;
    size_t graph_index = 0;
    uint64_t keying_seed = 0;
    bool compiled_decision = false;
    bool oracle_decision = false;
};

struct OracleReport {
    CompileTarget target;
    std::string corpus;
    long instances = 0;
    uint64_t seed = 0;
    std::vector<OracleMismatch> mismatches;
    double wall_seconds = 0;
    bool pass() const { return mismatches.empty(); }
};

OracleReport oracle_agreement(CompileTarget target, int max_nodes, int count, int keyings,
                              uint64_t seed);
std::string format_oracle(const OracleReport& r, bool json);

struct SeparationReport {
    std::string name;
    bool pass = false;
    std::string text;
};

/* name in {covering_obstruction_c3, q_even_positive, triangle_complement,
   policy_collapse_demo} */
SeparationReport separation_report(const std::string& name);

/* seeded samplers for the weighted fragments and for plain feature trees */
GmlPtr random_wgml(uint64_t seed, int max_depth, int prop_count, bool top_only);
FeatureExpr random_feature_expr(uint64_t seed, int max_depth, int prop_count);

/* exit codes: 0 ok, 1 mismatch or counterexample, 2 usage error */
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout);

}  // namespace kignn
