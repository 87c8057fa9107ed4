#pragma once
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kignn/graph.hpp"
#include "kignn/rational.hpp"

namespace kignn {

/* One shared node type backs both scalar function trees (Arg leaves, no graph
   atoms) and feature expressions (Prop/Val/aggregation nodes, no Arg leaves).
   Applying a scalar function to features substitutes the argument subtrees for
   the Arg leaves, so everything downstream works on a single DAG. */
enum class Op {
    Prop, Val, Arg, Const,
    Affine, IfPos, ReLU, Heaviside, Square, TriWave, Sigmoid,
    LocalMax, LocalSum, GlobalSum,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using ScalarFn = ExprPtr;     /* tree over Arg/Const + scalar primitives */
using FeatureExpr = ExprPtr;  /* tree over Prop/Val/Const + primitives + aggregations */

struct Expr {
    Op op;
    int index = 0;            /* Prop / Arg */
    Rat value;                /* Const value, Affine bias */
    std::vector<Rat> coef;    /* Affine coefficients, one per child */
    std::vector<ExprPtr> kids;
};

/* constructors */
ExprPtr prop(int i);
ExprPtr val();
ExprPtr arg(int i);
ExprPtr cst(const Rat& q);
ExprPtr cst(long q);
ExprPtr affine(std::vector<Rat> coef, const Rat& bias, std::vector<ExprPtr> kids);
ExprPtr ifpos(ExprPtr c, ExprPtr t, ExprPtr e);
ExprPtr relu(ExprPtr e);
ExprPtr heaviside(ExprPtr e);
ExprPtr square(ExprPtr e);
ExprPtr triwave(ExprPtr e);
ExprPtr sigmoid(ExprPtr e);
ExprPtr localmax(ExprPtr e);
ExprPtr localsum(ExprPtr e);
ExprPtr globalsum(ExprPtr e);

/* affine conveniences */
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);
ExprPtr scale(const Rat& q, ExprPtr a);
ExprPtr add_const(ExprPtr a, const Rat& q);
ExprPtr sum(const std::vector<ExprPtr>& xs, const Rat& bias = 0);

/* macro expansions: min(x,y)=x-ReLU(x-y), max, abs=ReLU(x)+ReLU(-x),
   ifZero(x,a,b)=IfPos(|x|,b,a), clip01(x)=ReLU(x)-ReLU(x-1) */
ExprPtr build_macro(const std::string& name, const std::vector<ExprPtr>& inputs);
ExprPtr emin(ExprPtr a, ExprPtr b);
ExprPtr emax(ExprPtr a, ExprPtr b);
ExprPtr eabs(ExprPtr a);
ExprPtr ifzero(ExprPtr x, ExprPtr a, ExprPtr b);
ExprPtr clip01(ExprPtr x);
/* product via squaring: xy = ((x+y)^2 - x^2 - y^2)/2 */
ExprPtr mul_sq(ExprPtr a, ExprPtr b);

/* substitutes args[i] for Arg(i); kignn's Apply */
ExprPtr apply(const ScalarFn& fn, const std::vector<ExprPtr>& args);

/* tagged scalar */
enum class Mode { EXACT, FLOAT };
struct Scalar {
    Mode mode = Mode::EXACT;
    Rat q;
    double d = 0;
    double as_double() const { return mode == Mode::EXACT ? rat_double(q) : d; }
};

int fn_arity(const ExprPtr& e);         /* 1 + max Arg index, 0 if none */
bool exact_capable(const ExprPtr& e);   /* no Sigmoid anywhere */
int aggregation_depth(const ExprPtr& e);
std::set<Op> ops_used(const ExprPtr& e);

Scalar eval_scalar_fn(const ScalarFn& fn, const std::vector<Scalar>& args, Mode mode);

/* full per-node vectors; evaluation is memoized over shared subtrees */
std::vector<Rat> eval_feature_exact(const FeatureExpr& e, const PointedKeyedGraph& g);
std::vector<double> eval_feature_float(const FeatureExpr& e, const PointedKeyedGraph& g);
Scalar eval_feature(const FeatureExpr& e, const PointedKeyedGraph& g, Mode mode); /* at the point */

/* pieces of a unary piecewise-affine function; piece i is a*x+b on
   [break[i-1], break[i]) with break[-1]=-inf, break[last]=+inf (each finite
   breakpoint belongs to the piece on its right) */
struct AffinePiece {
    std::optional<Rat> lo, hi;  /* nullopt = unbounded */
    Rat a, b;
};
ScalarFn compile_unary_piecewise_to_ffn(const std::vector<AffinePiece>& pieces);

constexpr double FLOAT_DECISION_EPS = 1e-9;

enum class Policy { POS_NONPOS, POS_NEG, ONE_ZERO };
std::string policy_band(Policy p);
Policy parse_policy_band(const std::string& s);

struct GnnClassifier {
    FeatureExpr expr;
    Policy policy = Policy::POS_NONPOS;
    Mode mode = Mode::EXACT;
    std::string metadata;
};

struct Classification {
    bool decision;
    Scalar raw;
};
Classification classify(const GnnClassifier& c, const PointedKeyedGraph& g);

struct PolicyViolation {
    size_t graph_index;
    uint64_t keying_seed;
    Scalar output;
};
std::vector<PolicyViolation> check_policy_conformance(const GnnClassifier& c,
                                                      const std::vector<PointedGraph>& graphs,
                                                      int keyings_per_graph, uint64_t seed);

/* layered view: stage j aggregates features whose nesting depth is j */
struct LayerStage {
    std::string agg_kind;
    int width;
};
struct LayerView {
    std::vector<LayerStage> stages;
};
LayerView layerize(const FeatureExpr& e);  /* throws on mixed LocalMax vs Sum kinds */
std::vector<Rat> staged_eval_exact(const FeatureExpr& e, const PointedKeyedGraph& g);

/* .kir serialization */
std::string write_model(const GnnClassifier& c);
GnnClassifier parse_model(const std::string& text);

}  // namespace kignn
