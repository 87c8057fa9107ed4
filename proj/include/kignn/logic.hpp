#pragma once
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kignn/graph.hpp"

namespace kignn {

/* graded modal formulas; derived forms (bot, box, <>{=k}, <>{<=k}) are
   expanded at parse time */
struct GmlFormula;
using GmlPtr = std::shared_ptr<const GmlFormula>;

enum class GmlKind { Top, Prop, Not, And, Or, DiamondGeq };

struct GmlFormula {
    GmlKind kind;
    int index = 0;  /* Prop */
    int grade = 1;  /* DiamondGeq, >= 1 */
    GmlPtr a, b;
};

GmlPtr g_top();
GmlPtr g_prop(int i);
GmlPtr g_not(GmlPtr a);
GmlPtr g_and(GmlPtr a, GmlPtr b);
GmlPtr g_or(GmlPtr a, GmlPtr b);
GmlPtr g_diamond(int grade, GmlPtr a);

bool gml_equal(const GmlPtr& a, const GmlPtr& b);
bool is_ml(const GmlPtr& f);  /* every grade is 1 */
std::string print_gml(const GmlPtr& f);

/* dynamic-logic formulas over programs */
struct LddlFormula;
struct LddlProgram;
using LddlPtr = std::shared_ptr<const LddlFormula>;
using ProgPtr = std::shared_ptr<const LddlProgram>;

enum class LddlKind { Top, Prop, Not, And, Or, Diamond, Box, Unique };
enum class ProgKind { Step, Test, Seq, Union };

struct LddlFormula {
    LddlKind kind;
    int index = 0;
    ProgPtr prog;
    LddlPtr a, b;
};
struct LddlProgram {
    ProgKind kind;
    LddlPtr test;   /* Test */
    ProgPtr a, b;   /* Seq / Union */
};

LddlPtr l_top();
LddlPtr l_prop(int i);
LddlPtr l_not(LddlPtr a);
LddlPtr l_and(LddlPtr a, LddlPtr b);
LddlPtr l_or(LddlPtr a, LddlPtr b);
LddlPtr l_diamond(ProgPtr p, LddlPtr a);
LddlPtr l_box(ProgPtr p, LddlPtr a);
LddlPtr l_unique(ProgPtr p, LddlPtr a);
ProgPtr p_step();
ProgPtr p_stay();  /* Test(Top) */
ProgPtr p_test(LddlPtr f);
ProgPtr p_seq(ProgPtr a, ProgPtr b);
ProgPtr p_union(ProgPtr a, ProgPtr b);

bool lddl_equal(const LddlPtr& a, const LddlPtr& b);
bool prog_equal(const ProgPtr& a, const ProgPtr& b);
std::string print_lddl(const LddlPtr& f);
std::string print_prog(const ProgPtr& p);

enum class Logic { ML, GML, LDDL };
GmlPtr parse_gml(const std::string& text, Logic logic = Logic::GML);  /* ML rejects grades != 1 */
LddlPtr parse_lddl(const std::string& text);

bool modelcheck_gml(const PointedGraph& g, const GmlPtr& f);
std::vector<bool> gml_sat_set(const Graph& g, const GmlPtr& f);

std::set<std::pair<int, int>> program_relation(const Graph& g, const ProgPtr& p);
bool modelcheck_lddl(const PointedGraph& g, const LddlPtr& f);
std::vector<bool> lddl_sat_set(const Graph& g, const LddlPtr& f);

/* normal form: no Box, all Diamond/Unique arguments are Top, every program a
   union of Step/Test sequences ending in stay */
LddlPtr normalize_lddl(const LddlPtr& f);

enum class WgmlClass { InWgmlTop, InWgmlModal, NotWgml };
struct WgmlMembership {
    WgmlClass cls;
    GmlPtr witness;  /* failing subterm when NotWgml; also set when counting atoms bar Top class */
};
WgmlMembership wgml_membership(const GmlPtr& f);

/* seeded random formulas for property tests */
GmlPtr random_gml(uint64_t seed, int max_depth, int prop_count, int max_grade);
LddlPtr random_lddl(uint64_t seed, int max_depth, int prop_count);

}  // namespace kignn
