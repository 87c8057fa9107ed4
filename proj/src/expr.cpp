#include "kignn/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace kignn {

static ExprPtr make(Op op) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    return e;
}

ExprPtr prop(int i) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Prop;
    e->index = i;
    return e;
}
ExprPtr val() { return make(Op::Val); }
ExprPtr arg(int i) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Arg;
    e->index = i;
    return e;
}
ExprPtr cst(const Rat& q) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const;
    e->value = q;
    e->value.canonicalize();
    return e;
}
ExprPtr cst(long q) { return cst(Rat(q)); }
ExprPtr affine(std::vector<Rat> coef, const Rat& bias, std::vector<ExprPtr> kids) {
    if (coef.size() != kids.size()) throw std::runtime_error("affine coefficient/child count mismatch");
    auto e = std::make_shared<Expr>();
    e->op = Op::Affine;
    e->coef = std::move(coef);
    for (auto& c : e->coef) c.canonicalize();
    e->value = bias;
    e->value.canonicalize();
    e->kids = std::move(kids);
    return e;
}
static ExprPtr unary(Op op, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->kids = {std::move(a)};
    return e;
}
ExprPtr ifpos(ExprPtr c, ExprPtr t, ExprPtr e2) {
    auto e = std::make_shared<Expr>();
    e->op = Op::IfPos;
    e->kids = {std::move(c), std::move(t), std::move(e2)};
    return e;
}
ExprPtr relu(ExprPtr e) { return unary(Op::ReLU, std::move(e)); }
ExprPtr heaviside(ExprPtr e) { return unary(Op::Heaviside, std::move(e)); }
ExprPtr square(ExprPtr e) { return unary(Op::Square, std::move(e)); }
ExprPtr triwave(ExprPtr e) { return unary(Op::TriWave, std::move(e)); }
ExprPtr sigmoid(ExprPtr e) { return unary(Op::Sigmoid, std::move(e)); }
ExprPtr localmax(ExprPtr e) { return unary(Op::LocalMax, std::move(e)); }
ExprPtr localsum(ExprPtr e) { return unary(Op::LocalSum, std::move(e)); }
ExprPtr globalsum(ExprPtr e) { return unary(Op::GlobalSum, std::move(e)); }

ExprPtr add(ExprPtr a, ExprPtr b) { return affine({1, 1}, 0, {std::move(a), std::move(b)}); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return affine({1, -1}, 0, {std::move(a), std::move(b)}); }
ExprPtr neg(ExprPtr a) { return affine({-1}, 0, {std::move(a)}); }
ExprPtr scale(const Rat& q, ExprPtr a) { return affine({q}, 0, {std::move(a)}); }
ExprPtr add_const(ExprPtr a, const Rat& q) { return affine({1}, q, {std::move(a)}); }
ExprPtr sum(const std::vector<ExprPtr>& xs, const Rat& bias) {
    if (xs.empty()) return cst(bias);
    return affine(std::vector<Rat>(xs.size(), Rat(1)), bias, xs);
}

ExprPtr emin(ExprPtr a, ExprPtr b) { return sub(a, relu(sub(a, b))); }
ExprPtr emax(ExprPtr a, ExprPtr b) { return neg(emin(neg(a), neg(b))); }
ExprPtr eabs(ExprPtr a) { return add(relu(a), relu(neg(a))); }
ExprPtr ifzero(ExprPtr x, ExprPtr a, ExprPtr b) { return ifpos(eabs(std::move(x)), std::move(b), std::move(a)); }
ExprPtr clip01(ExprPtr x) { return sub(relu(x), relu(add_const(x, -1))); }
ExprPtr mul_sq(ExprPtr a, ExprPtr b) {
    return affine({Rat(1, 2), Rat(-1, 2), Rat(-1, 2)}, 0,
                  {square(add(a, b)), square(a), square(b)});
}

ExprPtr build_macro(const std::string& name, const std::vector<ExprPtr>& in) {
    auto need = [&](size_t k) {
        if (in.size() != k) throw std::runtime_error("macro '" + name + "' wants " + std::to_string(k) + " inputs");
    };
    if (name == "min") { need(2); return emin(in[0], in[1]); }
    if (name == "max") { need(2); return emax(in[0], in[1]); }
    if (name == "abs") { need(1); return eabs(in[0]); }
    if (name == "ifZero") { need(3); return ifzero(in[0], in[1], in[2]); }
    if (name == "clip01") { need(1); return clip01(in[0]); }
    throw std::runtime_error("unknown macro '" + name + "'");
}

ExprPtr apply(const ScalarFn& fn, const std::vector<ExprPtr>& args) {
    int ar = fn_arity(fn);
    if (static_cast<int>(args.size()) < ar) throw std::runtime_error("apply: arity mismatch");
    std::unordered_map<const Expr*, ExprPtr> memo;
    std::function<ExprPtr(const ExprPtr&)> go = [&](const ExprPtr& e) -> ExprPtr {
        if (e->op == Op::Arg) return args.at(e->index);
        auto it = memo.find(e.get());
        if (it != memo.end()) return it->second;
        auto copy = std::make_shared<Expr>(*e);
        for (auto& k : copy->kids) k = go(k);
        ExprPtr r = copy;
        memo.emplace(e.get(), r);
        return r;
    };
    return go(fn);
}

template <class F>
static void walk(const ExprPtr& root, F&& visit) {
    std::unordered_map<const Expr*, bool> seen;
    std::vector<ExprPtr> stack{root};
    while (!stack.empty()) {
        ExprPtr e = stack.back();
        stack.pop_back();
        if (seen[e.get()]) continue;
        seen[e.get()] = true;
        visit(e);
        for (auto& k : e->kids) stack.push_back(k);
    }
}

int fn_arity(const ExprPtr& e) {
    int ar = 0;
    walk(e, [&](const ExprPtr& n) {
        if (n->op == Op::Arg) ar = std::max(ar, n->index + 1);
    });
    return ar;
}

bool exact_capable(const ExprPtr& e) {
    bool ok = true;
    walk(e, [&](const ExprPtr& n) {
        if (n->op == Op::Sigmoid) ok = false;
    });
    return ok;
}

static bool is_agg(Op op) { return op == Op::LocalMax || op == Op::LocalSum || op == Op::GlobalSum; }

int aggregation_depth(const ExprPtr& e) {
    std::unordered_map<const Expr*, int> memo;
    std::function<int(const ExprPtr&)> go = [&](const ExprPtr& n) -> int {
        auto it = memo.find(n.get());
        if (it != memo.end()) return it->second;
        int d = 0;
        for (auto& k : n->kids) d = std::max(d, go(k));
        if (is_agg(n->op)) ++d;
        memo[n.get()] = d;
        return d;
    };
    return go(e);
}

std::set<Op> ops_used(const ExprPtr& e) {
    std::set<Op> out;
    walk(e, [&](const ExprPtr& n) { out.insert(n->op); });
    return out;
}

/* ---- evaluation ---- */

static Rat rat_mod2(const Rat& x) {
    mpz_class fl;
    Rat half = x / 2;
    mpz_fdiv_q(fl.get_mpz_t(), half.get_num().get_mpz_t(), half.get_den().get_mpz_t());
    Rat r = x - Rat(2) * Rat(fl);
    r.canonicalize();
    return r;
}

/* triangle wave: 1 at even integers, 0 at odd, linear in between, period 2 */
static Rat triwave_num(const Rat& x) {
    Rat m = rat_mod2(x) - 1;
    if (m < 0) m = -m;
    return m;
}
static double triwave_num(double x) {
    double m = std::fmod(x, 2.0);
    if (m < 0) m += 2.0;
    return std::fabs(m - 1.0);
}

static Rat sq(const Rat& x) { return x * x; }
static double sq(double x) { return x * x; }
static bool pos(const Rat& x) { return x > 0; }
static bool pos(double x) { return x > 0; }
static bool nonneg(const Rat& x) { return x >= 0; }
static bool nonneg(double x) { return x >= 0; }
static Rat conv(const Rat& q, const Rat*) { return q; }
static double conv(const Rat& q, const double*) { return rat_double(q); }
static double sigmoid_num(double x) { return 1.0 / (1.0 + std::exp(-x)); }
static Rat sigmoid_num(const Rat&) { throw std::runtime_error("sigmoid in exact mode"); }

template <class T>
static std::vector<T> eval_vec(const FeatureExpr& root, const PointedKeyedGraph& g) {
    const Graph& gr = g.pg.g;
    const int n = gr.n;
    std::unordered_map<const Expr*, std::vector<T>> memo;
    std::function<const std::vector<T>&(const ExprPtr&)> go =
        [&](const ExprPtr& e) -> const std::vector<T>& {
        auto it = memo.find(e.get());
        if (it != memo.end()) return it->second;
        std::vector<T> v(n, T());
        switch (e->op) {
            case Op::Prop:
                if (e->index < 0 || e->index >= gr.props)
                    throw std::runtime_error("prop index out of range");
                for (int u = 0; u < n; ++u) v[u] = conv(Rat(gr.label_bit(u, e->index) ? 1 : 0), (T*)nullptr);
                break;
            case Op::Val: {
                if (!g.keying) throw std::runtime_error("expression reads keys but graph carries none");
                for (int u = 0; u < n; ++u) v[u] = conv(g.keying->values[u], (T*)nullptr);
                break;
            }
            case Op::Arg:
                throw std::runtime_error("unbound Arg in feature expression");
            case Op::Const:
                for (int u = 0; u < n; ++u) v[u] = conv(e->value, (T*)nullptr);
                break;
            case Op::Affine: {
                std::vector<const std::vector<T>*> ks;
                for (auto& k : e->kids) ks.push_back(&go(k));
                T bias = conv(e->value, (T*)nullptr);
                for (int u = 0; u < n; ++u) {
                    T acc = bias;
                    for (size_t i = 0; i < ks.size(); ++i) acc += conv(e->coef[i], (T*)nullptr) * (*ks[i])[u];
                    v[u] = acc;
                }
                break;
            }
            case Op::IfPos: {
                const auto& c = go(e->kids[0]);
                const auto& t = go(e->kids[1]);
                const auto& f = go(e->kids[2]);
                for (int u = 0; u < n; ++u) v[u] = pos(c[u]) ? t[u] : f[u];
                break;
            }
            case Op::ReLU: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) v[u] = pos(a[u]) ? a[u] : T();
                break;
            }
            case Op::Heaviside: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) v[u] = conv(Rat(nonneg(a[u]) ? 1 : 0), (T*)nullptr);
                break;
            }
            case Op::Square: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) v[u] = sq(a[u]);
                break;
            }
            case Op::TriWave: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) v[u] = triwave_num(a[u]);
                break;
            }
            case Op::Sigmoid: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) v[u] = sigmoid_num(a[u]);
                break;
            }
            case Op::LocalMax: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) {
                    T best = T();  /* max over empty set = 0 */
                    bool first = true;
                    for (int w : gr.adj[u]) {
                        if (first || a[w] > best) best = a[w];
                        first = false;
                    }
                    v[u] = first ? T() : best;
                }
                break;
            }
            case Op::LocalSum: {
                const auto& a = go(e->kids[0]);
                for (int u = 0; u < n; ++u) {
                    T acc = T();
                    for (int w : gr.adj[u]) acc += a[w];
                    v[u] = acc;
                }
                break;
            }
            case Op::GlobalSum: {
                const auto& a = go(e->kids[0]);
                T acc = T();
                for (int u = 0; u < n; ++u) acc += a[u];
                for (int u = 0; u < n; ++u) v[u] = acc;
                break;
            }
        }
        if constexpr (std::is_same_v<T, Rat>)
            for (auto& x : v) x.canonicalize();
        auto [pos2, ok] = memo.emplace(e.get(), std::move(v));
        (void)ok;
        return pos2->second;
    };
    return go(root);
}

std::vector<Rat> eval_feature_exact(const FeatureExpr& e, const PointedKeyedGraph& g) {
    if (!exact_capable(e)) throw std::runtime_error("exact evaluation of a sigmoid-bearing expression");
    return eval_vec<Rat>(e, g);
}
std::vector<double> eval_feature_float(const FeatureExpr& e, const PointedKeyedGraph& g) {
    return eval_vec<double>(e, g);
}
Scalar eval_feature(const FeatureExpr& e, const PointedKeyedGraph& g, Mode mode) {
    Scalar s;
    s.mode = mode;
    if (mode == Mode::EXACT)
        s.q = eval_feature_exact(e, g)[g.pg.point];
    else
        s.d = eval_feature_float(e, g)[g.pg.point];
    return s;
}

Scalar eval_scalar_fn(const ScalarFn& fn, const std::vector<Scalar>& args, Mode mode) {
    if (static_cast<int>(args.size()) < fn_arity(fn)) throw std::runtime_error("arity mismatch");
    walk(fn, [](const ExprPtr& n) {
        if (n->op == Op::Prop || n->op == Op::Val || is_agg(n->op))
            throw std::runtime_error("graph atom inside scalar function");
    });
    /* reuse the graph evaluator: bind args as keys on a 1-node graph? simpler: direct recursion */
    if (mode == Mode::EXACT) {
        if (!exact_capable(fn)) throw std::runtime_error("sigmoid in exact mode");
        std::function<Rat(const ExprPtr&)> go = [&](const ExprPtr& e) -> Rat {
            switch (e->op) {
                case Op::Arg: {
                    const Scalar& a = args.at(e->index);
                    if (a.mode != Mode::EXACT) throw std::runtime_error("float argument in exact mode");
                    return a.q;
                }
                case Op::Const: return e->value;
                case Op::Affine: {
                    Rat acc = e->value;
                    for (size_t i = 0; i < e->kids.size(); ++i) acc += e->coef[i] * go(e->kids[i]);
                    return acc;
                }
                case Op::IfPos: return pos(go(e->kids[0])) ? go(e->kids[1]) : go(e->kids[2]);
                case Op::ReLU: { Rat x = go(e->kids[0]); return pos(x) ? x : Rat(0); }
                case Op::Heaviside: return Rat(nonneg(go(e->kids[0])) ? 1 : 0);
                case Op::Square: return sq(go(e->kids[0]));
                case Op::TriWave: return triwave_num(go(e->kids[0]));
                default: throw std::runtime_error("bad scalar node");
            }
        };
        Scalar out;
        out.mode = Mode::EXACT;
        out.q = go(fn);
        out.q.canonicalize();
        return out;
    }
    std::function<double(const ExprPtr&)> go = [&](const ExprPtr& e) -> double {
        switch (e->op) {
            case Op::Arg: return args.at(e->index).as_double();
            case Op::Const: return rat_double(e->value);
            case Op::Affine: {
                double acc = rat_double(e->value);
                for (size_t i = 0; i < e->kids.size(); ++i) acc += rat_double(e->coef[i]) * go(e->kids[i]);
                return acc;
            }
            case Op::IfPos: return go(e->kids[0]) > 0 ? go(e->kids[1]) : go(e->kids[2]);
            case Op::ReLU: { double x = go(e->kids[0]); return x > 0 ? x : 0.0; }
            case Op::Heaviside: return go(e->kids[0]) >= 0 ? 1.0 : 0.0;
            case Op::Square: return sq(go(e->kids[0]));
            case Op::TriWave: return triwave_num(go(e->kids[0]));
            case Op::Sigmoid: return sigmoid_num(go(e->kids[0]));
            default: throw std::runtime_error("bad scalar node");
        }
    };
    Scalar out;
    out.mode = Mode::FLOAT;
    out.d = go(fn);
    return out;
}

ScalarFn compile_unary_piecewise_to_ffn(const std::vector<AffinePiece>& pieces) {
    if (pieces.empty()) throw std::runtime_error("empty piece list");
    if (pieces.front().lo || pieces.back().hi)
        throw std::runtime_error("pieces must cover all of the line");
    for (size_t i = 0; i + 1 < pieces.size(); ++i) {
        if (!pieces[i].hi || !pieces[i + 1].lo || *pieces[i].hi != *pieces[i + 1].lo)
            throw std::runtime_error("gapped or overlapping intervals");
        if (i > 0 && *pieces[i].lo >= *pieces[i].hi)
            throw std::runtime_error("intervals out of order");
    }
    ExprPtr x = arg(0);
    /* f0 + sum_i [ da*ReLU(x-t) + (da*t+db)*H(x-t) ] with t owned by the right piece */
    ExprPtr out = affine({pieces[0].a}, pieces[0].b, {x});
    for (size_t i = 1; i < pieces.size(); ++i) {
        Rat t = *pieces[i].lo;
        Rat da = pieces[i].a - pieces[i - 1].a;
        Rat db = pieces[i].b - pieces[i - 1].b;
        Rat c = da * t + db;
        ExprPtr shifted = add_const(x, -t);
        out = affine({1, da, c}, 0, {out, relu(shifted), heaviside(shifted)});
    }
    return out;
}

std::string policy_band(Policy p) {
    switch (p) {
        case Policy::POS_NONPOS: return ">0/<=0";
        case Policy::POS_NEG: return ">0/<0";
        case Policy::ONE_ZERO: return ">=1/<=0";
    }
    return "";
}
Policy parse_policy_band(const std::string& s) {
    if (s == ">0/<=0") return Policy::POS_NONPOS;
    if (s == ">0/<0") return Policy::POS_NEG;
    if (s == ">=1/<=0") return Policy::ONE_ZERO;
    throw std::runtime_error("unknown policy band '" + s + "'");
}

Classification classify(const GnnClassifier& c, const PointedKeyedGraph& g) {
    Scalar s = eval_feature(c.expr, g, c.mode);
    bool dec = (c.mode == Mode::EXACT) ? (s.q > 0) : (s.d > FLOAT_DECISION_EPS);
    return {dec, s};
}

std::vector<PolicyViolation> check_policy_conformance(const GnnClassifier& c,
                                                      const std::vector<PointedGraph>& graphs,
                                                      int keyings_per_graph, uint64_t seed) {
    std::vector<PolicyViolation> out;
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        for (int ki = 0; ki < keyings_per_graph; ++ki) {
            uint64_t ks = seed + 1000003ull * gi + ki;
            PointedKeyedGraph pkg{graphs[gi], random_keying(graphs[gi].g, ks)};
            Scalar s = eval_feature(c.expr, pkg, c.mode);
            bool bad = false;
            if (c.mode == Mode::EXACT) {
                if (c.policy == Policy::POS_NEG) bad = (s.q == 0);
                if (c.policy == Policy::ONE_ZERO) bad = (s.q > 0 && s.q < 1);
            } else {
                if (c.policy == Policy::POS_NEG) bad = std::fabs(s.d) <= FLOAT_DECISION_EPS;
                if (c.policy == Policy::ONE_ZERO)
                    bad = (s.d > FLOAT_DECISION_EPS && s.d < 1 - FLOAT_DECISION_EPS);
            }
            if (bad) out.push_back({gi, ks, s});
        }
    }
    return out;
}

/* ---- layered view ---- */

struct AggInfo {
    std::vector<std::pair<const Expr*, int>> nodes_by_first_visit;  /* (agg node, depth) */
    std::unordered_map<const Expr*, ExprPtr> ptrs;
    bool has_max = false, has_sum = false;
};

static AggInfo collect_aggs(const FeatureExpr& root) {
    AggInfo info;
    std::unordered_map<const Expr*, int> depth;
    std::function<int(const ExprPtr&)> go = [&](const ExprPtr& e) -> int {
        auto it = depth.find(e.get());
        if (it != depth.end()) return it->second;
        int d = 0;
        for (auto& k : e->kids) d = std::max(d, go(k));
        if (is_agg(e->op)) {
            ++d;
            info.nodes_by_first_visit.emplace_back(e.get(), d);
            info.ptrs[e.get()] = e;
            if (e->op == Op::LocalMax) info.has_max = true;
            else info.has_sum = true;
        }
        depth[e.get()] = d;
        return d;
    };
    go(root);
    return info;
}

LayerView layerize(const FeatureExpr& e) {
    AggInfo info = collect_aggs(e);
    if (info.has_max && info.has_sum) throw std::runtime_error("mixed aggregation kinds");
    int d = aggregation_depth(e);
    LayerView lv;
    for (int j = 1; j <= d; ++j) {
        int width = 0;
        for (auto& [node, nd] : info.nodes_by_first_visit)
            if (nd == j) ++width;
        lv.stages.push_back({info.has_max ? "localmax" : "sum", width});
    }
    return lv;
}

std::vector<Rat> staged_eval_exact(const FeatureExpr& e, const PointedKeyedGraph& g) {
    AggInfo info = collect_aggs(e);
    if (info.has_max && info.has_sum) throw std::runtime_error("mixed aggregation kinds");
    const Graph& gr = g.pg.g;
    std::unordered_map<const Expr*, std::vector<Rat>> agg_out;
    std::function<std::vector<Rat>(const ExprPtr&)> combo = [&](const ExprPtr& n) -> std::vector<Rat> {
        if (is_agg(n->op)) {
            auto it = agg_out.find(n.get());
            if (it == agg_out.end()) throw std::runtime_error("stage ordering broken");
            return it->second;
        }
        std::vector<std::vector<Rat>> ks;
        for (auto& k : n->kids) ks.push_back(combo(k));
        std::vector<Rat> v(gr.n);
        for (int u = 0; u < gr.n; ++u) {
            std::vector<Scalar> args;
            switch (n->op) {
                case Op::Prop: v[u] = Rat(gr.label_bit(u, n->index) ? 1 : 0); break;
                case Op::Val:
                    if (!g.keying) throw std::runtime_error("expression reads keys but graph carries none");
                    v[u] = g.keying->values[u];
                    break;
                case Op::Const: v[u] = n->value; break;
                case Op::Affine: {
                    Rat acc = n->value;
                    for (size_t i = 0; i < ks.size(); ++i) acc += n->coef[i] * ks[i][u];
                    v[u] = acc;
                    break;
                }
                case Op::IfPos: v[u] = ks[0][u] > 0 ? ks[1][u] : ks[2][u]; break;
                case Op::ReLU: v[u] = ks[0][u] > 0 ? ks[0][u] : Rat(0); break;
                case Op::Heaviside: v[u] = Rat(ks[0][u] >= 0 ? 1 : 0); break;
                case Op::Square: v[u] = ks[0][u] * ks[0][u]; break;
                case Op::TriWave: v[u] = triwave_num(ks[0][u]); break;
                default: throw std::runtime_error("bad node in staged eval");
            }
            v[u].canonicalize();
        }
        return v;
    };
    int d = aggregation_depth(e);
    for (int j = 1; j <= d; ++j) {
        for (auto& [node, nd] : info.nodes_by_first_visit) {
            if (nd != j) continue;
            const ExprPtr& np = info.ptrs[node];
            auto child = combo(np->kids[0]);
            std::vector<Rat> v(gr.n, Rat(0));
            if (np->op == Op::LocalMax) {
                for (int u = 0; u < gr.n; ++u) {
                    bool first = true;
                    for (int w : gr.adj[u]) {
                        if (first || child[w] > v[u]) v[u] = child[w];
                        first = false;
                    }
                    if (first) v[u] = 0;
                }
            } else if (np->op == Op::LocalSum) {
                for (int u = 0; u < gr.n; ++u)
                    for (int w : gr.adj[u]) v[u] += child[w];
            } else {
                Rat acc = 0;
                for (int u = 0; u < gr.n; ++u) acc += child[u];
                for (int u = 0; u < gr.n; ++u) v[u] = acc;
            }
            agg_out[node] = std::move(v);
        }
    }
    return combo(e);
}

/* ---- .kir serialization ---- */

namespace {

void escape_into(std::ostream& os, const std::string& s) {
    for (char c : s) {
        if (c == '"' || c == '\\') os << '\\';
        os << c;
    }
}

struct Writer {
    std::unordered_map<const Expr*, int> refcount;
    std::unordered_map<const Expr*, std::string> names;
    std::vector<std::pair<std::string, ExprPtr>> bindings;

    static bool inlineable(const ExprPtr& e) {
        return e->op == Op::Prop || e->op == Op::Val || e->op == Op::Const || e->op == Op::Arg;
    }

    void count(const FeatureExpr& root) {
        walk(root, [&](const ExprPtr& e) {
            for (auto& k : e->kids) ++refcount[k.get()];
        });
    }
    /* assign names in dependency (post) order */
    void assign(const ExprPtr& e, std::unordered_map<const Expr*, bool>& done) {
        if (done[e.get()]) return;
        done[e.get()] = true;
        for (auto& k : e->kids) assign(k, done);
        if (refcount[e.get()] >= 2 && !inlineable(e)) {
            std::string nm = "x" + std::to_string(bindings.size());
            names[e.get()] = nm;
            bindings.emplace_back(nm, e);
        }
    }
    void emit(std::ostream& os, const ExprPtr& e, const Expr* defining = nullptr) {
        auto it = names.find(e.get());
        if (it != names.end() && e.get() != defining) {
            os << it->second;
            return;
        }
        switch (e->op) {
            case Op::Prop: os << "(prop " << e->index << ")"; return;
            case Op::Val: os << "(val)"; return;
            case Op::Arg: os << "(arg " << e->index << ")"; return;
            case Op::Const: os << "(const " << rat_string(e->value) << ")"; return;
            case Op::Affine: {
                os << "(affine (";
                for (size_t i = 0; i < e->coef.size(); ++i) os << (i ? " " : "") << rat_string(e->coef[i]);
                os << ") " << rat_string(e->value);
                for (auto& k : e->kids) { os << " "; emit(os, k); }
                os << ")";
                return;
            }
            default: break;
        }
        static const std::unordered_map<int, const char*> tag = {
            {(int)Op::IfPos, "ifpos"}, {(int)Op::ReLU, "relu"}, {(int)Op::Heaviside, "heaviside"},
            {(int)Op::Square, "square"}, {(int)Op::TriWave, "triwave"}, {(int)Op::Sigmoid, "sigmoid"},
            {(int)Op::LocalMax, "localmax"}, {(int)Op::LocalSum, "localsum"}, {(int)Op::GlobalSum, "globalsum"}};
        os << "(" << tag.at((int)e->op);
        for (auto& k : e->kids) { os << " "; emit(os, k); }
        os << ")";
    }
};

}  // namespace

std::string write_model(const GnnClassifier& c) {
    std::ostringstream os;
    os << "(classifier policy=\"" << policy_band(c.policy) << "\" mode="
       << (c.mode == Mode::EXACT ? "exact" : "float");
    if (!c.metadata.empty()) {
        os << " meta=\"";
        escape_into(os, c.metadata);
        os << "\"";
    }
    os << " ";
    Writer w;
    w.count(c.expr);
    std::unordered_map<const Expr*, bool> done;
    w.assign(c.expr, done);
    /* a let-bound root would shadow itself; emit root inline */
    if (!w.bindings.empty()) {
        os << "(let (";
        bool first = true;
        for (auto& [nm, node] : w.bindings) {
            if (!first) os << "\n      ";
            first = false;
            os << "(" << nm << " ";
            w.emit(os, node, node.get());
            os << ")";
        }
        os << ")\n  ";
        w.emit(os, c.expr, c.expr.get());
        os << ")";
    } else {
        w.emit(os, c.expr);
    }
    os << ")";
    return os.str();
}

namespace {

struct Token {
    enum Kind { LPAREN, RPAREN, ATOM, END } kind;
    std::string text;
    size_t pos;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '(') { out.push_back({Token::LPAREN, "(", i}); ++i; continue; }
        if (c == ')') { out.push_back({Token::RPAREN, ")", i}); ++i; continue; }
        size_t start = i;
        std::string atom;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') {
            if (s[i] == '"') {
                ++i;
                atom += '"';
                while (i < s.size() && s[i] != '"') {
                    if (s[i] == '\\' && i + 1 < s.size()) ++i;
                    atom += s[i++];
                }
                if (i >= s.size()) throw std::runtime_error("unterminated string at offset " + std::to_string(start));
                atom += '"';
                ++i;
            } else {
                atom += s[i++];
            }
        }
        out.push_back({Token::ATOM, atom, start});
    }
    out.push_back({Token::END, "", s.size()});
    return out;
}

struct Parser {
    std::vector<Token> toks;
    size_t i = 0;
    std::unordered_map<std::string, ExprPtr> env;

    [[noreturn]] void fail(const std::string& msg) {
        throw std::runtime_error(msg + " at offset " + std::to_string(toks[i].pos));
    }
    const Token& peek() { return toks[i]; }
    Token next() { return toks[i++]; }
    void expect(Token::Kind k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        ++i;
    }
    std::string atom() {
        if (peek().kind != Token::ATOM) fail("expected atom");
        return next().text;
    }

    ExprPtr expr() {
        if (peek().kind == Token::ATOM) {
            auto it = env.find(peek().text);
            if (it == env.end()) fail("unknown symbol '" + peek().text + "'");
            ++i;
            return it->second;
        }
        expect(Token::LPAREN, "'('");
        std::string head = atom();
        ExprPtr out;
        auto one = [&]() { ExprPtr e = expr(); return e; };
        if (head == "prop") out = prop(std::stoi(atom()));
        else if (head == "val") out = val();
        else if (head == "arg") out = arg(std::stoi(atom()));
        else if (head == "const") out = cst(parse_rational(atom()));
        else if (head == "affine") {
            expect(Token::LPAREN, "'('");
            std::vector<Rat> coef;
            while (peek().kind == Token::ATOM) coef.push_back(parse_rational(atom()));
            expect(Token::RPAREN, "')'");
            Rat bias = parse_rational(atom());
            std::vector<ExprPtr> kids;
            while (peek().kind != Token::RPAREN) kids.push_back(one());
            out = affine(coef, bias, kids);
        } else if (head == "ifpos") {
            ExprPtr a = one(), b = one(), c = one();
            out = ifpos(a, b, c);
        } else if (head == "relu") out = relu(one());
        else if (head == "heaviside") out = heaviside(one());
        else if (head == "square") out = square(one());
        else if (head == "triwave") out = triwave(one());
        else if (head == "sigmoid") out = sigmoid(one());
        else if (head == "localmax") out = localmax(one());
        else if (head == "localsum") out = localsum(one());
        else if (head == "globalsum") out = globalsum(one());
        else if (head == "let") {
            expect(Token::LPAREN, "'('");
            std::vector<std::string> bound;
            while (peek().kind == Token::LPAREN) {
                expect(Token::LPAREN, "'('");
                std::string nm = atom();
                ExprPtr e = expr();
                env[nm] = e;
                bound.push_back(nm);
                expect(Token::RPAREN, "')'");
            }
            expect(Token::RPAREN, "')'");
            out = expr();
        } else {
            fail("unknown form '" + head + "'");
        }
        expect(Token::RPAREN, "')'");
        return out;
    }
};

}  // namespace

GnnClassifier parse_model(const std::string& text) {
    Parser p;
    p.toks = lex(text);
    p.expect(Token::LPAREN, "'('");
    if (p.atom() != "classifier") throw std::runtime_error("expected (classifier ...)");
    GnnClassifier c;
    bool have_policy = false, have_mode = false;
    while (p.peek().kind == Token::ATOM && p.peek().text.find('=') != std::string::npos) {
        std::string a = p.atom();
        auto eq = a.find('=');
        std::string key = a.substr(0, eq), value = a.substr(eq + 1);
        if (!value.empty() && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key == "policy") { c.policy = parse_policy_band(value); have_policy = true; }
        else if (key == "mode") {
            if (value == "exact") c.mode = Mode::EXACT;
            else if (value == "float") c.mode = Mode::FLOAT;
            else throw std::runtime_error("unknown mode '" + value + "'");
            have_mode = true;
        } else if (key == "meta") c.metadata = value;
        else throw std::runtime_error("unknown attribute '" + key + "'");
    }
    if (!have_policy || !have_mode) throw std::runtime_error("classifier needs policy= and mode=");
    c.expr = p.expr();
    p.expect(Token::RPAREN, "')'");
    if (p.peek().kind != Token::END) throw std::runtime_error("trailing input after classifier");
    if (c.mode == Mode::EXACT && !exact_capable(c.expr))
        throw std::runtime_error("sigmoid in exact mode");
    return c;
}

}  // namespace kignn
