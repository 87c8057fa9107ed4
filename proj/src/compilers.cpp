#include "kignn/compilers.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kignn {

std::string target_name(CompileTarget t) {
    switch (t) {
        case CompileTarget::GML_LOCALSUM_RELU: return "gml_localsum_relu";
        case CompileTarget::ML_LOCALMAX_RELU: return "ml_localmax_relu";
        case CompileTarget::WGML_TOP_LOCALMAX_RELU: return "wgml_top_localmax_relu";
        case CompileTarget::WGML_MODAL_LOCALMAX_SIGMOID: return "wgml_modal_localmax_sigmoid";
        case CompileTarget::LDDL_LOCALMAX_SEMILINEAR: return "lddl_localmax_semilinear";
        case CompileTarget::ISOTYPE_LOCALMAX_SEMILINEAR: return "isotype_localmax_semilinear";
        case CompileTarget::UNIQADDR_LOCALSUM_SIGMOID: return "uniqaddr_localsum_sigmoid";
        case CompileTarget::UNIQADDR_LOCALSUM_SEMILINEAR: return "uniqaddr_localsum_semilinear";
        case CompileTarget::ISOTYPE_LOCALSUM_SQUARE: return "isotype_localsum_square";
        case CompileTarget::ISOTYPE_GLOBALSUM_SEMILINEAR: return "isotype_globalsum_semilinear";
    }
    throw std::runtime_error("bad target");
}

bool audit_primitives(const GnnClassifier& c, CompileTarget t) {
    std::set<Op> allowed{Op::Prop, Op::Const, Op::Affine, Op::ReLU};
    switch (t) {
        case CompileTarget::GML_LOCALSUM_RELU:
            allowed.insert(Op::LocalSum);
            break;
        case CompileTarget::ML_LOCALMAX_RELU:
            allowed.insert(Op::LocalMax);
            break;
        case CompileTarget::WGML_TOP_LOCALMAX_RELU:
            allowed.insert({Op::Val, Op::LocalMax});
            break;
        case CompileTarget::WGML_MODAL_LOCALMAX_SIGMOID:
            allowed.insert({Op::Val, Op::LocalMax, Op::Sigmoid});
            break;
        case CompileTarget::LDDL_LOCALMAX_SEMILINEAR:
        case CompileTarget::ISOTYPE_LOCALMAX_SEMILINEAR:
            allowed.insert({Op::Val, Op::LocalMax, Op::IfPos});
            break;
        case CompileTarget::UNIQADDR_LOCALSUM_SIGMOID:
            allowed.insert({Op::Val, Op::LocalSum, Op::Sigmoid});
            break;
        case CompileTarget::UNIQADDR_LOCALSUM_SEMILINEAR:
            allowed.insert({Op::Val, Op::LocalSum, Op::IfPos});
            break;
        case CompileTarget::ISOTYPE_LOCALSUM_SQUARE:
            allowed.insert({Op::Val, Op::LocalSum, Op::IfPos, Op::Square});
            break;
        case CompileTarget::ISOTYPE_GLOBALSUM_SEMILINEAR:
            allowed.insert({Op::Val, Op::LocalSum, Op::GlobalSum, Op::IfPos});
            break;
    }
    for (Op op : ops_used(c.expr))
        if (!allowed.count(op)) return false;
    return true;
}

/* ---- boolean formula translations ---- */

/* {0,1}-valued feature for a GML formula; use_max swaps the aggregator to
   LocalMax and restricts grades to 1 */
static ExprPtr gml_feature(const GmlPtr& f, bool use_max,
                           std::map<const GmlFormula*, ExprPtr>& memo) {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    ExprPtr r;
    switch (f->kind) {
        case GmlKind::Top: r = cst(1); break;
        case GmlKind::Prop: r = prop(f->index); break;
        case GmlKind::Not: r = sub(cst(1), gml_feature(f->a, use_max, memo)); break;
        case GmlKind::And:
            r = clip01(add_const(add(gml_feature(f->a, use_max, memo),
                                     gml_feature(f->b, use_max, memo)), -1));
            break;
        case GmlKind::Or:
            r = clip01(add(gml_feature(f->a, use_max, memo), gml_feature(f->b, use_max, memo)));
            break;
        case GmlKind::DiamondGeq:
            if (use_max) {
                if (f->grade != 1) throw std::runtime_error("formula is not in ML");
                r = localmax(gml_feature(f->a, use_max, memo));
            } else {
                r = clip01(add_const(localsum(gml_feature(f->a, use_max, memo)),
                                     Rat(1 - f->grade)));
            }
            break;
    }
    memo[f.get()] = r;
    return r;
}

GnnClassifier compile_gml_localsum(const GmlPtr& f) {
    std::map<const GmlFormula*, ExprPtr> memo;
    GnnClassifier c;
    c.expr = gml_feature(f, false, memo);
    c.policy = Policy::ONE_ZERO;
    c.mode = Mode::EXACT;
    c.metadata = "target=gml_localsum_relu formula=" + print_gml(f);
    return c;
}

GnnClassifier compile_ml_localmax(const GmlPtr& f) {
    if (!is_ml(f)) throw std::runtime_error("formula is not in ML");
    std::map<const GmlFormula*, ExprPtr> memo;
    GnnClassifier c;
    c.expr = gml_feature(f, true, memo);
    c.policy = Policy::ONE_ZERO;
    c.mode = Mode::EXACT;
    c.metadata = "target=ml_localmax_relu formula=" + print_gml(f);
    return c;
}

/* ---- weighted graded fragments ---- */

static ExprPtr wgml_expr(const GmlPtr& f, bool modal, const ExprPtr& sigma,
                         std::map<const GmlFormula*, ExprPtr>& ml_memo,
                         std::map<const GmlFormula*, ExprPtr>& memo) {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    ExprPtr r;
    if (is_ml(f)) {
        r = gml_feature(f, true, ml_memo);
    } else switch (f->kind) {
        case GmlKind::Or:
            r = add(relu(wgml_expr(f->a, modal, sigma, ml_memo, memo)),
                    relu(wgml_expr(f->b, modal, sigma, ml_memo, memo)));
            break;
        case GmlKind::And:
            r = emin(wgml_expr(f->a, modal, sigma, ml_memo, memo),
                     wgml_expr(f->b, modal, sigma, ml_memo, memo));
            break;
        case GmlKind::DiamondGeq:
            if (f->grade == 1) {
                r = localmax(wgml_expr(f->a, modal, sigma, ml_memo, memo));
            } else if (f->grade == 2 && !modal) {
                if (f->a->kind != GmlKind::Top)
                    throw std::runtime_error("counting atom argument must be top here");
                /* spread of neighbor keys: positive iff two neighbors exist */
                r = add(localmax(val()), localmax(neg(val())));
            } else if (f->grade == 2) {
                ExprPtr fx = gml_feature(f->a, true, ml_memo);
                /* max sigma over satisfying neighbors minus min sigma over
                   them; -1 when no satisfying neighbor but some neighbor */
                ExprPtr hi = localmax(relu(add_const(add(sigma, fx), -1)));
                ExprPtr lo = localmax(add_const(relu(add(neg(sigma), fx)), -1));
                r = scale(10000, add(hi, lo));
            } else {
                throw std::runtime_error("grade above 2 is outside the weighted fragment");
            }
            break;
        default:
            throw std::runtime_error("formula is outside the weighted fragment");
    }
    memo[f.get()] = r;
    return r;
}

GnnClassifier compile_wgml_top(const GmlPtr& f) {
    auto m = wgml_membership(f);
    if (m.cls != WgmlClass::InWgmlTop)
        throw std::runtime_error("formula is not in the top-argument weighted fragment");
    std::map<const GmlFormula*, ExprPtr> ml_memo, memo;
    GnnClassifier c;
    c.expr = wgml_expr(f, false, nullptr, ml_memo, memo);
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::EXACT;
    c.metadata = "target=wgml_top_localmax_relu formula=" + print_gml(f);
    return c;
}

GnnClassifier compile_wgml_modal(const GmlPtr& f) {
    auto m = wgml_membership(f);
    if (m.cls == WgmlClass::NotWgml)
        throw std::runtime_error("formula is not in the weighted fragment");
    std::map<const GmlFormula*, ExprPtr> ml_memo, memo;
    ExprPtr sigma = sigmoid(scale(Rat(1, 1000), val()));
    GnnClassifier c;
    c.expr = wgml_expr(f, true, sigma, ml_memo, memo);
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::FLOAT;
    c.metadata = "target=wgml_modal_localmax_sigmoid formula=" + print_gml(f);
    return c;
}

/* ---- dynamic logic ---- */

static void flat_union(const ProgPtr& p, std::vector<ProgPtr>& out) {
    if (p->kind == ProgKind::Union) {
        flat_union(p->a, out);
        flat_union(p->b, out);
    } else out.push_back(p);
}

static void flat_seq(const ProgPtr& p, std::vector<ProgPtr>& out) {
    if (p->kind == ProgKind::Seq) {
        flat_seq(p->a, out);
        flat_seq(p->b, out);
    } else out.push_back(p);
}

namespace {
struct SeqFeat {
    ExprPtr dom;  /* 1 iff some program successor exists */
    ExprPtr mn;   /* min key over successors, garbage when dom = 0 */
    ExprPtr mx;
};
}  // namespace

static ExprPtr localmin(const ExprPtr& e) { return neg(localmax(neg(e))); }

static ExprPtr lddl_expr(const LddlPtr& f, std::map<const LddlFormula*, ExprPtr>& memo);

static SeqFeat seq_features(const ProgPtr& seq, std::map<const LddlFormula*, ExprPtr>& memo) {
    std::vector<ProgPtr> atoms;
    flat_seq(seq, atoms);
    SeqFeat s{cst(1), val(), val()};
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
        const ProgPtr& a = *it;
        if (a->kind == ProgKind::Test) {
            ExprPtr t = lddl_expr(a->test, memo);
            s.dom = ifzero(t, cst(0), s.dom);
            s.mn = ifzero(t, cst(0), s.mn);
            s.mx = ifzero(t, cst(0), s.mx);
        } else if (a->kind == ProgKind::Step) {
            /* non-domain neighbors get a value that cannot win: the two-hop
               max (resp. min) seen from the neighbor covers all our neighbors */
            ExprPtr big = localmax(localmax(s.mn));
            ExprPtr small = localmin(localmin(s.mx));
            ExprPtr mn2 = localmin(ifzero(s.dom, big, s.mn));
            ExprPtr mx2 = localmax(ifzero(s.dom, small, s.mx));
            s.dom = localmax(s.dom);
            s.mn = mn2;
            s.mx = mx2;
        } else throw std::runtime_error("program is not in normal form");
    }
    return s;
}

static ExprPtr lddl_expr(const LddlPtr& f, std::map<const LddlFormula*, ExprPtr>& memo) {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    ExprPtr r;
    switch (f->kind) {
        case LddlKind::Top: r = cst(1); break;
        case LddlKind::Prop: r = prop(f->index); break;
        case LddlKind::Not: r = sub(cst(1), lddl_expr(f->a, memo)); break;
        case LddlKind::And:
            r = relu(add_const(add(lddl_expr(f->a, memo), lddl_expr(f->b, memo)), -1));
            break;
        case LddlKind::Or:
            r = emax(lddl_expr(f->a, memo), lddl_expr(f->b, memo));
            break;
        case LddlKind::Diamond: {
            if (f->a->kind != LddlKind::Top)
                throw std::runtime_error("formula is not in normal form");
            std::vector<ProgPtr> seqs;
            flat_union(f->prog, seqs);
            r = seq_features(seqs[0], memo).dom;
            for (size_t i = 1; i < seqs.size(); ++i)
                r = emax(r, seq_features(seqs[i], memo).dom);
            break;
        }
        case LddlKind::Unique: {
            if (f->a->kind != LddlKind::Top)
                throw std::runtime_error("formula is not in normal form");
            std::vector<ProgPtr> seqs;
            flat_union(f->prog, seqs);
            SeqFeat acc = seq_features(seqs[0], memo);
            for (size_t i = 1; i < seqs.size(); ++i) {
                SeqFeat s = seq_features(seqs[i], memo);
                SeqFeat nx;
                nx.dom = emax(acc.dom, s.dom);
                nx.mn = ifzero(acc.dom, s.mn, ifzero(s.dom, acc.mn, emin(acc.mn, s.mn)));
                nx.mx = ifzero(acc.dom, s.mx, ifzero(s.dom, acc.mx, emax(acc.mx, s.mx)));
                acc = nx;
            }
            /* exactly one successor iff the successor set is nonempty and its
               min and max keys agree; needs an injective keying */
            r = ifzero(acc.dom, cst(0), ifzero(sub(acc.mx, acc.mn), cst(1), cst(0)));
            break;
        }
        case LddlKind::Box: throw std::runtime_error("formula is not in normal form");
    }
    memo[f.get()] = r;
    return r;
}

GnnClassifier compile_lddl_semilinear(const LddlPtr& f) {
    LddlPtr nf = normalize_lddl(f);
    std::map<const LddlFormula*, ExprPtr> memo;
    GnnClassifier c;
    c.expr = lddl_expr(nf, memo);
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::EXACT;
    c.metadata = "target=lddl_localmax_semilinear formula=" + print_lddl(f);
    return c;
}

/* ---- shared isotype helpers ---- */

static void require_connected(const PointedGraph& g, const char* who) {
    auto d = bfs_distances(g.g, g.point);
    for (int v = 0; v < g.g.n; ++v)
        if (d[v] < 0) throw std::runtime_error(std::string(who) + " needs a connected graph");
}

static std::string graph_sig(const PointedGraph& g) {
    std::ostringstream os;
    os << "n=" << g.g.n << " point=" << g.point << " labels=";
    for (int v = 0; v < g.g.n; ++v) os << (v ? "," : "") << g.g.labels[v];
    os << " edges=";
    for (size_t i = 0; i < g.g.edges.size(); ++i)
        os << (i ? "," : "") << g.g.edges[i].first << "-" << g.g.edges[i].second;
    return os.str();
}

/* conjunction of {0,1} features */
static ExprPtr and_all(const std::vector<ExprPtr>& xs) {
    if (xs.empty()) return cst(1);
    if (xs.size() == 1) return xs[0];
    return relu(add_const(sum(xs), Rat(1) - Rat((long)xs.size())));
}

/* 1 iff the node's label bitmask equals g's node gi */
static ExprPtr label_indicator(const PointedGraph& g, int gi) {
    std::vector<ExprPtr> conds;
    for (int p = 0; p < g.g.props; ++p)
        conds.push_back(g.g.label_bit(gi, p) ? prop(p) : sub(cst(1), prop(p)));
    return and_all(conds);
}

/* keys made nonzero: negatives stay put, others shift up by one */
static ExprPtr nonzero_key() { return ifpos(neg(val()), val(), add_const(val(), 1)); }

static ExprPtr is_nonzero(const ExprPtr& e) { return ifpos(eabs(e), cst(1), cst(0)); }

static std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

/* ---- isotype via LocalMax ---- */

GnnClassifier compile_isotype_localmax(const PointedGraph& g) {
    int n = g.g.n;
    if (n < 1 || n > 4) throw std::runtime_error("isotype_localmax handles 1..4 nodes");
    require_connected(g, "isotype_localmax");

    GnnClassifier c;
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::EXACT;
    c.metadata = "target=isotype_localmax_semilinear graph: " + graph_sig(g);

    if (n == 1) {
        /* the key windows below lean on max over an empty neighborhood being
           zero, which misreads lone negative keys; isolation is just this */
        c.expr = ifpos(localmax(cst(1)), cst(0), label_indicator(g, 0));
        return c;
    }

    ExprPtr vp = nonzero_key();

    /* component-wide key minimum, then a floor strictly below every key */
    ExprPtr fmin = vp;
    for (int j = 0; j < 2 * n; ++j) fmin = emin(fmin, neg(localmax(neg(fmin))));
    ExprPtr floor = add_const(fmin, -1);

    /* peel keys off in descending order; K[i] is the i-th largest key in the
       component, A[i] a node's own key while still unpeeled */
    std::vector<ExprPtr> A{vp}, K;
    for (int i = 0; i < n; ++i) {
        ExprPtr k = A[i];
        for (int j = 0; j < 2 * n; ++j) k = emax(k, localmax(k));
        K.push_back(k);
        A.push_back(ifpos(sub(k, vp), vp, floor));
    }

    /* size gate: every peel step retired somebody nearby and nobody nearby
       survives all n steps, so the component has exactly n nodes */
    std::vector<ExprPtr> gate_terms;
    for (int i = 0; i < n; ++i) {
        ExprPtr d = ifpos(sub(A[i], A[i + 1]), cst(1), cst(0));
        for (int j = 0; j < n; ++j) d = emax(d, localmax(d));
        gate_terms.push_back(d);
    }
    ExprPtr act = ifpos(sub(vp, A[n]), cst(0), cst(1));
    for (int j = 0; j < n; ++j) act = emax(act, localmax(act));
    gate_terms.push_back(sub(cst(1), act));
    ExprPtr size_ok = relu(add_const(sum(gate_terms), Rat(-n)));

    std::vector<ExprPtr> key_ind(n), key_adj(n), labels(n);
    for (int r = 0; r < n; ++r) {
        key_ind[r] = ifpos(eabs(sub(K[r], vp)), cst(0), cst(1));
        key_adj[r] = localmax(key_ind[r]);
    }
    for (int i = 0; i < n; ++i) labels[i] = label_indicator(g, i);

    ExprPtr total = cst(0);
    for (auto& perm : all_permutations(n)) {
        std::vector<ExprPtr> reach;
        for (int i = 0; i < n; ++i) {
            std::vector<ExprPtr> conds{key_ind[perm[i]], labels[i]};
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                conds.push_back(g.g.has_edge(i, j) ? key_adj[perm[j]]
                                                   : sub(cst(1), key_adj[perm[j]]));
            }
            ExprPtr r = and_all(conds);
            for (int j = 0; j < n; ++j) r = emax(r, localmax(r));
            reach.push_back(r);
        }
        reach.push_back(key_ind[perm[g.point]]);
        total = add(total, and_all(reach));
    }

    c.expr = ifpos(size_ok, total, cst(0));
    return c;
}

/* ---- isotype via GlobalSum ---- */

GnnClassifier compile_isotype_globalsum(const PointedGraph& g) {
    int n = g.g.n;
    if (n < 1 || n > 4) throw std::runtime_error("isotype_globalsum handles 1..4 nodes");

    ExprPtr vp = nonzero_key();
    ExprPtr size_ok = relu(sub(cst(1), eabs(add_const(globalsum(cst(1)), Rat(-n)))));

    /* decode a global average without division: match the survivor count and
       scale the sum by the matching reciprocal */
    auto average = [&](const ExprPtr& w) {
        ExprPtr ind = is_nonzero(w);
        ExprPtr cnt = globalsum(ind), sm = globalsum(w);
        ExprPtr avg = cst(0);
        for (int l = 1; l <= n; ++l)
            avg = add(avg, ifpos(sub(cst(1), eabs(add_const(cnt, Rat(-l)))),
                                 scale(Rat(1, l), sm), cst(0)));
        return avg;
    };

    std::vector<ExprPtr> K;
    ExprPtr active = vp;
    for (int i = 0; i < n; ++i) {
        /* below-average nodes drop out each round, so the survivors converge
           to the maximum and the final average is exactly that key */
        ExprPtr w = active;
        for (int round = 0; round < n; ++round) w = ifpos(sub(average(w), w), cst(0), w);
        ExprPtr ki = average(w);
        K.push_back(ki);
        active = ifpos(sub(ki, vp), vp, cst(0));
    }

    std::vector<ExprPtr> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = label_indicator(g, i);

    ExprPtr total = cst(0);
    for (auto& perm : all_permutations(n)) {
        std::vector<ExprPtr> key(n);
        for (int i = 0; i < n; ++i) key[i] = ifpos(eabs(sub(K[perm[i]], vp)), cst(0), cst(1));
        std::vector<ExprPtr> parts;
        for (int i = 0; i < n; ++i) {
            std::vector<ExprPtr> conds{key[i], labels[i]};
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                conds.push_back(g.g.has_edge(i, j) ? localsum(key[j])
                                                   : sub(cst(1), localsum(key[j])));
            }
            parts.push_back(globalsum(and_all(conds)));
        }
        parts.push_back(key[g.point]);
        total = add(total, relu(add_const(sum(parts), Rat(-n))));
    }

    GnnClassifier c;
    c.expr = ifpos(size_ok, total, cst(0));
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::EXACT;
    c.metadata = "target=isotype_globalsum_semilinear graph: " + graph_sig(g);
    return c;
}

/* ---- isotype via LocalSum and squaring ---- */

GnnClassifier compile_isotype_localsum_square(const PointedGraph& g) {
    int n = g.g.n;
    if (n < 1 || n > 3) throw std::runtime_error("isotype_localsum_square handles 1..3 nodes");
    require_connected(g, "isotype_localsum_square");

    GnnClassifier c;
    c.policy = Policy::POS_NONPOS;
    c.mode = Mode::EXACT;
    c.metadata = "target=isotype_localsum_square graph: " + graph_sig(g);

    if (n == 1) {
        c.expr = ifzero(localsum(cst(1)), label_indicator(g, 0), cst(0));
        return c;
    }

    ExprPtr vp = nonzero_key();

    /* walk-count weighted sum over the 2n-ball; positive weight on every node
       within 2n hops, so zero iff the argument vanishes on the whole ball */
    auto horizon = [&](const ExprPtr& e) {
        ExprPtr acc = e, cur = e;
        for (int l = 0; l < 2 * n; ++l) {
            cur = localsum(cur);
            acc = add(acc, cur);
        }
        return acc;
    };

    /* a nearby node of degree above n - 1 rules out an n-node component */
    ExprPtr dflag = relu(add_const(localsum(cst(1)), Rat(-n)));
    for (int j = 0; j < 3 * n; ++j) dflag = add(dflag, localsum(dflag));

    std::vector<ExprPtr> inds, flags;
    ExprPtr active = vp;
    for (int i = 0; i < n; ++i) {
        /* each round every node below its own weighted average of the active
           keys drops out; the maximum never drops, so survivors shrink to it */
        ExprPtr w = active;
        for (int round = 0; round <= n; ++round) {
            ExprPtr wt = horizon(is_nonzero(w)), sm = horizon(w);
            w = ifpos(sub(sm, mul_sq(wt, vp)), cst(0), w);
        }
        ExprPtr ind = is_nonzero(w);
        ExprPtr s1 = horizon(ind), s2 = horizon(w), s3 = horizon(square(w));
        flags.push_back(ifpos(s1, cst(1), cst(0)));
        /* weighted Cauchy-Schwarz gap: zero iff all surviving keys agree,
           which under injective keys means one node */
        flags.push_back(ifpos(sub(mul_sq(s1, s3), square(s2)), cst(0), cst(1)));
        inds.push_back(ind);
        active = ifzero(w, active, cst(0));
    }
    flags.push_back(ifpos(horizon(is_nonzero(active)), cst(0), cst(1)));
    flags.push_back(ifzero(dflag, cst(1), cst(0)));

    std::vector<ExprPtr> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = label_indicator(g, i);

    ExprPtr total = cst(0);
    for (auto& perm : all_permutations(n)) {
        std::vector<ExprPtr> reach;
        for (int i = 0; i < n; ++i) {
            std::vector<ExprPtr> conds{inds[perm[i]], labels[i]};
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                conds.push_back(g.g.has_edge(i, j) ? localsum(inds[perm[j]])
                                                   : sub(cst(1), localsum(inds[perm[j]])));
            }
            ExprPtr r = and_all(conds);
            /* saturating reach keeps the accumulator in {0,1} under LocalSum */
            for (int j = 0; j < n; ++j) r = emin(cst(1), add(r, localsum(r)));
            reach.push_back(r);
        }
        reach.push_back(inds[perm[g.point]]);
        total = add(total, and_all(reach));
    }

    c.expr = ifpos(and_all(flags), total, cst(0));
    return c;
}

/* ---- unique addressing ---- */

static GmlPtr has_walk(const std::vector<GmlPtr>& addr, size_t i) {
    if (i == addr.size()) return g_top();
    return g_diamond(1, g_and(addr[i], has_walk(addr, i + 1)));
}

static GmlPtr two_walks(const std::vector<GmlPtr>& addr, size_t i) {
    if (i == addr.size()) return g_not(g_top());
    /* two branches here, or one branch that itself splits later */
    GmlPtr split = g_diamond(2, g_and(addr[i], has_walk(addr, i + 1)));
    return g_or(split, g_diamond(1, g_and(addr[i], two_walks(addr, i + 1))));
}

GmlPtr unique_address_guard(const std::vector<GmlPtr>& addr) {
    if (addr.empty()) throw std::runtime_error("address list must be nonempty");
    return g_and(has_walk(addr, 0), g_not(two_walks(addr, 0)));
}

std::optional<int> unique_address_target(const PointedGraph& g, const std::vector<GmlPtr>& addr) {
    if (addr.empty()) throw std::runtime_error("address list must be nonempty");
    std::vector<std::vector<bool>> sat;
    for (auto& f : addr) sat.push_back(gml_sat_set(g.g, f));
    long count = 0;
    int target = -1;
    std::function<void(int, size_t)> walk = [&](int u, size_t i) {
        if (count > 1) return;
        if (i == addr.size()) {
            ++count;
            target = u;
            return;
        }
        for (int w : g.g.adj[u])
            if (sat[i][w]) walk(w, i + 1);
    };
    walk(g.point, 0);
    if (count == 1) return target;
    return std::nullopt;
}

GnnClassifier compile_unique_address(const std::vector<GmlPtr>& addr1,
                                     const std::vector<GmlPtr>& addr2, UniqAddrMode mode) {
    if (addr1.empty() || addr2.empty()) throw std::runtime_error("address list must be nonempty");
    std::map<const GmlFormula*, ExprPtr> memo;
    auto F = [&](const GmlPtr& f) { return gml_feature(f, false, memo); };
    GmlPtr guard = g_and(unique_address_guard(addr1), unique_address_guard(addr2));

    GnnClassifier c;
    c.policy = Policy::POS_NONPOS;
    std::string srcs = "addr1=";
    for (size_t i = 0; i < addr1.size(); ++i) srcs += (i ? ";" : "") + print_gml(addr1[i]);
    srcs += " addr2=";
    for (size_t i = 0; i < addr2.size(); ++i) srcs += (i ? ";" : "") + print_gml(addr2[i]);

    if (mode == UniqAddrMode::SIGMOID) {
        ExprPtr sigma = sigmoid(scale(Rat(1, 1000), val()));
        auto chase = [&](const std::vector<GmlPtr>& addr) {
            /* propagate the addressed node's squashed key back along the walk;
               the clip keeps stray branch sums from leaking past one */
            ExprPtr cur = relu(add_const(add(sigma, F(addr.back())), -1));
            for (int i = (int)addr.size() - 2; i >= 0; --i)
                cur = relu(add_const(add(clip01(localsum(cur)), F(addr[i])), -1));
            return localsum(cur);
        };
        ExprPtr y = chase(addr1), z = chase(addr2);
        c.expr = add_const(add(clip01(eabs(sub(y, z))), F(guard)), -1);
        c.mode = Mode::FLOAT;
        c.metadata = "target=uniqaddr_localsum_sigmoid " + srcs;
    } else {
        auto chase = [&](const std::vector<GmlPtr>& addr) {
            ExprPtr cur = ifpos(F(addr.back()), val(), cst(0));
            for (int i = (int)addr.size() - 2; i >= 0; --i)
                cur = ifpos(F(addr[i]), localsum(cur), cst(0));
            return localsum(cur);
        };
        ExprPtr y = chase(addr1), z = chase(addr2);
        c.expr = ifpos(F(guard), ifpos(eabs(sub(y, z)), cst(1), cst(0)), cst(0));
        c.mode = Mode::EXACT;
        c.metadata = "target=uniqaddr_localsum_semilinear " + srcs;
    }
    return c;
}

/* ---- standalone pieces and fixtures ---- */

ScalarFn cs_distinct_detector(int max_count) {
    if (max_count < 1) throw std::runtime_error("max_count must be positive");
    ExprPtr a = arg(0), b = arg(1), cc = arg(2);
    ExprPtr h = cst(0);
    for (int i = 1; i <= max_count; ++i) {
        ExprPtr gap = sub(scale(Rat(i), cc), square(b));
        h = add(h, ifpos(sub(cst(1), eabs(add_const(a, Rat(-i)))), gap, cst(0)));
    }
    return ifpos(h, cst(1), cst(0));
}

GnnClassifier fixture_classifier(const std::string& name) {
    GnnClassifier c;
    if (name == "diamond2top") {
        c.expr = eabs(add(localmax(val()), localmax(neg(val()))));
        c.policy = Policy::POS_NONPOS;
        c.mode = Mode::EXACT;
        c.metadata = "fixture=diamond2top";
    } else if (name == "q_even") {
        c.expr = triwave(localsum(cst(1)));
        c.policy = Policy::ONE_ZERO;
        c.mode = Mode::EXACT;
        c.metadata = "fixture=q_even";
    } else if (name == "triangle_complement") {
        GmlPtr tri = parse_gml(
            "<>{=2}top & <>(~p0 & <>{=2}top & <>p0 & <>~p0) & <>(p0 & <>{=2}top & []~p0)");
        std::map<const GmlFormula*, ExprPtr> memo;
        ExprPtr x = sub(cst(1), gml_feature(tri, false, memo));
        ExprPtr sigma = sigmoid(scale(Rat(1, 1000), val()));
        ExprPtr send = relu(add_const(add(sigma, prop(0)), -1));
        ExprPtr y = localsum(send), z = localsum(localsum(send));
        c.expr = add(x, eabs(sub(y, z)));
        c.policy = Policy::POS_NONPOS;
        c.mode = Mode::FLOAT;
        c.metadata = "fixture=triangle_complement";
    } else throw std::runtime_error("unknown fixture '" + name + "'");
    return c;
}

}  // namespace kignn
