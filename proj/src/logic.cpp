#include "kignn/logic.hpp"

#include <cctype>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kignn {

/* ---- constructors ---- */

GmlPtr g_top() {
    auto f = std::make_shared<GmlFormula>();
    f->kind = GmlKind::Top;
    return f;
}
GmlPtr g_prop(int i) {
    auto f = std::make_shared<GmlFormula>();
    f->kind = GmlKind::Prop;
    f->index = i;
    return f;
}
static GmlPtr g_mk(GmlKind k, GmlPtr a, GmlPtr b = nullptr) {
    auto f = std::make_shared<GmlFormula>();
    f->kind = k;
    f->a = std::move(a);
    f->b = std::move(b);
    return f;
}
GmlPtr g_not(GmlPtr a) { return g_mk(GmlKind::Not, std::move(a)); }
GmlPtr g_and(GmlPtr a, GmlPtr b) { return g_mk(GmlKind::And, std::move(a), std::move(b)); }
GmlPtr g_or(GmlPtr a, GmlPtr b) { return g_mk(GmlKind::Or, std::move(a), std::move(b)); }
GmlPtr g_diamond(int grade, GmlPtr a) {
    if (grade < 1) throw std::runtime_error("grade must be >= 1");
    auto f = g_mk(GmlKind::DiamondGeq, std::move(a));
    const_cast<GmlFormula*>(f.get())->grade = grade;
    return f;
}

bool gml_equal(const GmlPtr& a, const GmlPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case GmlKind::Top: return true;
        case GmlKind::Prop: return a->index == b->index;
        case GmlKind::Not: return gml_equal(a->a, b->a);
        case GmlKind::And:
        case GmlKind::Or: return gml_equal(a->a, b->a) && gml_equal(a->b, b->b);
        case GmlKind::DiamondGeq: return a->grade == b->grade && gml_equal(a->a, b->a);
    }
    return false;
}

bool is_ml(const GmlPtr& f) {
    switch (f->kind) {
        case GmlKind::Top:
        case GmlKind::Prop: return true;
        case GmlKind::Not: return is_ml(f->a);
        case GmlKind::And:
        case GmlKind::Or: return is_ml(f->a) && is_ml(f->b);
        case GmlKind::DiamondGeq: return f->grade == 1 && is_ml(f->a);
    }
    return false;
}

/* print with parens whenever a child binds no tighter than its parent, so
   reparsing reproduces the tree */
static void print_gml_rec(std::ostringstream& os, const GmlPtr& f, int parent_prec) {
    int prec;
    switch (f->kind) {
        case GmlKind::Or: prec = 1; break;
        case GmlKind::And: prec = 2; break;
        default: prec = 3; break;
    }
    bool paren = prec < parent_prec;
    if (paren) os << "(";
    switch (f->kind) {
        case GmlKind::Top: os << "top"; break;
        case GmlKind::Prop: os << "p" << f->index; break;
        case GmlKind::Not:
            os << "~";
            print_gml_rec(os, f->a, 3);
            break;
        case GmlKind::And:
            print_gml_rec(os, f->a, 2);
            os << " & ";
            print_gml_rec(os, f->b, 3);
            break;
        case GmlKind::Or:
            print_gml_rec(os, f->a, 1);
            os << " | ";
            print_gml_rec(os, f->b, 2);
            break;
        case GmlKind::DiamondGeq:
            if (f->grade == 1) os << "<>";
            else os << "<>{>=" << f->grade << "}";
            print_gml_rec(os, f->a, 3);
            break;
    }
    if (paren) os << ")";
}

std::string print_gml(const GmlPtr& f) {
    std::ostringstream os;
    print_gml_rec(os, f, 0);
    return os.str();
}

LddlPtr l_top() {
    auto f = std::make_shared<LddlFormula>();
    f->kind = LddlKind::Top;
    return f;
}
LddlPtr l_prop(int i) {
    auto f = std::make_shared<LddlFormula>();
    f->kind = LddlKind::Prop;
    f->index = i;
    return f;
}
static LddlPtr l_mk(LddlKind k, LddlPtr a, LddlPtr b = nullptr, ProgPtr p = nullptr) {
    auto f = std::make_shared<LddlFormula>();
    f->kind = k;
    f->a = std::move(a);
    f->b = std::move(b);
    f->prog = std::move(p);
    return f;
}
LddlPtr l_not(LddlPtr a) { return l_mk(LddlKind::Not, std::move(a)); }
LddlPtr l_and(LddlPtr a, LddlPtr b) { return l_mk(LddlKind::And, std::move(a), std::move(b)); }
LddlPtr l_or(LddlPtr a, LddlPtr b) { return l_mk(LddlKind::Or, std::move(a), std::move(b)); }
LddlPtr l_diamond(ProgPtr p, LddlPtr a) { return l_mk(LddlKind::Diamond, std::move(a), nullptr, std::move(p)); }
LddlPtr l_box(ProgPtr p, LddlPtr a) { return l_mk(LddlKind::Box, std::move(a), nullptr, std::move(p)); }
LddlPtr l_unique(ProgPtr p, LddlPtr a) { return l_mk(LddlKind::Unique, std::move(a), nullptr, std::move(p)); }

ProgPtr p_step() {
    auto p = std::make_shared<LddlProgram>();
    p->kind = ProgKind::Step;
    return p;
}
ProgPtr p_test(LddlPtr f) {
    auto p = std::make_shared<LddlProgram>();
    p->kind = ProgKind::Test;
    p->test = std::move(f);
    return p;
}
ProgPtr p_stay() { return p_test(l_top()); }
static ProgPtr p_mk(ProgKind k, ProgPtr a, ProgPtr b) {
    auto p = std::make_shared<LddlProgram>();
    p->kind = k;
    p->a = std::move(a);
    p->b = std::move(b);
    return p;
}
ProgPtr p_seq(ProgPtr a, ProgPtr b) { return p_mk(ProgKind::Seq, std::move(a), std::move(b)); }
ProgPtr p_union(ProgPtr a, ProgPtr b) { return p_mk(ProgKind::Union, std::move(a), std::move(b)); }

bool prog_equal(const ProgPtr& a, const ProgPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ProgKind::Step: return true;
        case ProgKind::Test: return lddl_equal(a->test, b->test);
        case ProgKind::Seq:
        case ProgKind::Union: return prog_equal(a->a, b->a) && prog_equal(a->b, b->b);
    }
    return false;
}
bool lddl_equal(const LddlPtr& a, const LddlPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case LddlKind::Top: return true;
        case LddlKind::Prop: return a->index == b->index;
        case LddlKind::Not: return lddl_equal(a->a, b->a);
        case LddlKind::And:
        case LddlKind::Or: return lddl_equal(a->a, b->a) && lddl_equal(a->b, b->b);
        case LddlKind::Diamond:
        case LddlKind::Box:
        case LddlKind::Unique: return prog_equal(a->prog, b->prog) && lddl_equal(a->a, b->a);
    }
    return false;
}

static void print_lddl_rec(std::ostringstream& os, const LddlPtr& f, int parent_prec);

static void print_prog_rec(std::ostringstream& os, const ProgPtr& p, int parent_prec) {
    int prec;
    switch (p->kind) {
        case ProgKind::Union: prec = 1; break;
        case ProgKind::Seq: prec = 2; break;
        default: prec = 3; break;
    }
    bool paren = prec < parent_prec;
    if (paren) os << "(";
    switch (p->kind) {
        case ProgKind::Step: os << "step"; break;
        case ProgKind::Test:
            if (p->test->kind == LddlKind::Top) os << "stay";
            else {
                os << "test(";
                print_lddl_rec(os, p->test, 0);
                os << ")";
            }
            break;
        case ProgKind::Seq:
            print_prog_rec(os, p->a, 2);
            os << ";";
            print_prog_rec(os, p->b, 3);
            break;
        case ProgKind::Union:
            print_prog_rec(os, p->a, 1);
            os << "+";
            print_prog_rec(os, p->b, 2);
            break;
    }
    if (paren) os << ")";
}

static void print_lddl_rec(std::ostringstream& os, const LddlPtr& f, int parent_prec) {
    int prec;
    switch (f->kind) {
        case LddlKind::Or: prec = 1; break;
        case LddlKind::And: prec = 2; break;
        default: prec = 3; break;
    }
    bool paren = prec < parent_prec;
    if (paren) os << "(";
    switch (f->kind) {
        case LddlKind::Top: os << "top"; break;
        case LddlKind::Prop: os << "p" << f->index; break;
        case LddlKind::Not:
            os << "~";
            print_lddl_rec(os, f->a, 3);
            break;
        case LddlKind::And:
            print_lddl_rec(os, f->a, 2);
            os << " & ";
            print_lddl_rec(os, f->b, 3);
            break;
        case LddlKind::Or:
            print_lddl_rec(os, f->a, 1);
            os << " | ";
            print_lddl_rec(os, f->b, 2);
            break;
        case LddlKind::Diamond:
        case LddlKind::Unique:
            os << "<";
            print_prog_rec(os, f->prog, 0);
            os << ">";
            if (f->kind == LddlKind::Unique) os << "=1";
            os << " ";
            print_lddl_rec(os, f->a, 3);
            break;
        case LddlKind::Box:
            os << "[";
            print_prog_rec(os, f->prog, 0);
            os << "]";
            print_lddl_rec(os, f->a, 3);
            break;
    }
    if (paren) os << ")";
}

std::string print_lddl(const LddlPtr& f) {
    std::ostringstream os;
    print_lddl_rec(os, f, 0);
    return os.str();
}
std::string print_prog(const ProgPtr& p) {
    std::ostringstream os;
    print_prog_rec(os, p, 0);
    return os.str();
}

/* ---- parsing ---- */

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error(msg + " at offset " + std::to_string(i));
    }
    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(const std::string& tok) {
        skip();
        if (s.compare(i, tok.size(), tok) == 0) {
            i += tok.size();
            return true;
        }
        return false;
    }
    bool peek_is(char c) {
        skip();
        return i < s.size() && s[i] == c;
    }
    void expect(const std::string& tok) {
        if (!eat(tok)) fail("expected '" + tok + "'");
    }
    int number() {
        skip();
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start) fail("expected a number");
        return std::stoi(s.substr(start, i - start));
    }
    bool word_boundary() const {
        return i >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i]));
    }
    bool eat_word(const std::string& w) {
        skip();
        size_t save = i;
        if (s.compare(i, w.size(), w) == 0) {
            i += w.size();
            if (word_boundary()) return true;
            i = save;
        }
        return false;
    }
    void done() {
        skip();
        if (i != s.size()) fail("trailing input");
    }
};

struct GmlParser {
    Cursor c;
    Logic logic;

    GmlPtr or_level() {
        GmlPtr f = and_level();
        while (c.eat("|")) f = g_or(f, and_level());
        return f;
    }
    GmlPtr and_level() {
        GmlPtr f = unary();
        while (c.eat("&")) f = g_and(f, unary());
        return f;
    }
    GmlPtr diamond_tail() {
        if (c.eat("{")) {
            enum { GE, LE, EQ } cmp;
            if (c.eat(">=") || c.eat("≥")) cmp = GE;
            else if (c.eat("<=") || c.eat("≤")) cmp = LE;
            else if (c.eat("=")) cmp = EQ;
            else c.fail("expected one of >=, <=, =");
            int k = c.number();
            c.expect("}");
            GmlPtr body = unary();
            if (cmp == LE) return g_not(grade(k + 1, body));
            if (k < 1) c.fail("grade must be >= 1");
            if (cmp == GE) return grade(k, body);
            return g_and(grade(k, body), g_not(grade(k + 1, body)));
        }
        return grade(1, unary());
    }
    GmlPtr grade(int k, GmlPtr body) {
        if (logic == Logic::ML && k != 1) c.fail("graded modality outside ML");
        return g_diamond(k, std::move(body));
    }
    GmlPtr unary() {
        if (c.eat("~")) return g_not(unary());
        if (c.eat("<>")) return diamond_tail();
        if (c.eat("[]")) return g_not(grade(1, g_not(unary())));
        if (c.eat("(")) {
            GmlPtr f = or_level();
            c.expect(")");
            return f;
        }
        if (c.eat_word("top")) return g_top();
        if (c.eat_word("bot")) return g_not(g_top());
        c.skip();
        if (c.peek_is('p')) {
            ++c.i;
            return g_prop(c.number());
        }
        c.fail("expected a formula");
    }
};

struct LddlParser {
    Cursor c;

    LddlPtr or_level() {
        LddlPtr f = and_level();
        while (c.eat("|")) f = l_or(f, and_level());
        return f;
    }
    LddlPtr and_level() {
        LddlPtr f = unary();
        while (c.eat("&")) f = l_and(f, unary());
        return f;
    }
    ProgPtr prog_union() {
        ProgPtr p = prog_seq();
        while (c.eat("+")) p = p_union(p, prog_seq());
        return p;
    }
    ProgPtr prog_seq() {
        ProgPtr p = prog_atom();
        while (c.eat(";")) p = p_seq(p, prog_atom());
        return p;
    }
    ProgPtr prog_atom() {
        if (c.eat_word("step")) return p_step();
        if (c.eat_word("stay")) return p_stay();
        if (c.eat_word("test")) {
            c.expect("(");
            LddlPtr f = or_level();
            c.expect(")");
            return p_test(f);
        }
        if (c.eat("(")) {
            ProgPtr p = prog_union();
            c.expect(")");
            return p;
        }
        c.fail("expected a program");
    }
    LddlPtr unary() {
        if (c.eat("~")) return l_not(unary());
        if (c.eat("[")) {
            ProgPtr p = prog_union();
            c.expect("]");
            return l_box(p, unary());
        }
        if (c.eat("<")) {
            ProgPtr p = prog_union();
            c.expect(">");
            /* "=1" must follow the '>' immediately */
            bool unique = false;
            if (c.i + 1 < c.s.size() && c.s[c.i] == '=' && c.s[c.i + 1] == '1') {
                c.i += 2;
                unique = true;
            }
            LddlPtr body = unary();
            return unique ? l_unique(p, body) : l_diamond(p, body);
        }
        if (c.eat("(")) {
            LddlPtr f = or_level();
            c.expect(")");
            return f;
        }
        if (c.eat_word("top")) return l_top();
        if (c.eat_word("bot")) return l_not(l_top());
        c.skip();
        if (c.peek_is('p')) {
            ++c.i;
            return l_prop(c.number());
        }
        c.fail("expected a formula");
    }
};

}  // namespace

GmlPtr parse_gml(const std::string& text, Logic logic) {
    if (logic == Logic::LDDL) throw std::runtime_error("use parse_lddl for LDDL");
    GmlParser p{Cursor{text}, logic};
    GmlPtr f = p.or_level();
    p.c.done();
    return f;
}

LddlPtr parse_lddl(const std::string& text) {
    LddlParser p{Cursor{text}};
    LddlPtr f = p.or_level();
    p.c.done();
    return f;
}

/* ---- model checking ---- */

std::vector<bool> gml_sat_set(const Graph& g, const GmlPtr& f) {
    switch (f->kind) {
        case GmlKind::Top: return std::vector<bool>(g.n, true);
        case GmlKind::Prop: {
            if (f->index < 0 || f->index >= g.props)
                throw std::runtime_error("prop index out of range");
            std::vector<bool> v(g.n);
            for (int u = 0; u < g.n; ++u) v[u] = g.label_bit(u, f->index);
            return v;
        }
        case GmlKind::Not: {
            auto v = gml_sat_set(g, f->a);
            v.flip();
            return v;
        }
        case GmlKind::And: {
            auto v = gml_sat_set(g, f->a);
            auto w = gml_sat_set(g, f->b);
            for (int u = 0; u < g.n; ++u) v[u] = v[u] && w[u];
            return v;
        }
        case GmlKind::Or: {
            auto v = gml_sat_set(g, f->a);
            auto w = gml_sat_set(g, f->b);
            for (int u = 0; u < g.n; ++u) v[u] = v[u] || w[u];
            return v;
        }
        case GmlKind::DiamondGeq: {
            auto v = gml_sat_set(g, f->a);
            std::vector<bool> out(g.n);
            for (int u = 0; u < g.n; ++u) {
                int cnt = 0;
                for (int w : g.adj[u]) cnt += v[w] ? 1 : 0;
                out[u] = cnt >= f->grade;
            }
            return out;
        }
    }
    throw std::runtime_error("bad formula");
}

bool modelcheck_gml(const PointedGraph& g, const GmlPtr& f) {
    return gml_sat_set(g.g, f)[g.point];
}

std::set<std::pair<int, int>> program_relation(const Graph& g, const ProgPtr& p) {
    switch (p->kind) {
        case ProgKind::Step: {
            std::set<std::pair<int, int>> r;
            for (auto [u, v] : g.edges) {
                r.insert({u, v});
                r.insert({v, u});
            }
            return r;
        }
        case ProgKind::Test: {
            auto sat = lddl_sat_set(g, p->test);
            std::set<std::pair<int, int>> r;
            for (int u = 0; u < g.n; ++u)
                if (sat[u]) r.insert({u, u});
            return r;
        }
        case ProgKind::Seq: {
            auto ra = program_relation(g, p->a);
            auto rb = program_relation(g, p->b);
            std::vector<std::vector<int>> by_src(g.n);
            for (auto& [u, v] : rb) by_src[u].push_back(v);
            std::set<std::pair<int, int>> r;
            for (auto& [u, v] : ra)
                for (int w : by_src[v]) r.insert({u, w});
            return r;
        }
        case ProgKind::Union: {
            auto r = program_relation(g, p->a);
            auto rb = program_relation(g, p->b);
            r.insert(rb.begin(), rb.end());
            return r;
        }
    }
    throw std::runtime_error("bad program");
}

std::vector<bool> lddl_sat_set(const Graph& g, const LddlPtr& f) {
    switch (f->kind) {
        case LddlKind::Top: return std::vector<bool>(g.n, true);
        case LddlKind::Prop: {
            if (f->index < 0 || f->index >= g.props)
                throw std::runtime_error("prop index out of range");
            std::vector<bool> v(g.n);
            for (int u = 0; u < g.n; ++u) v[u] = g.label_bit(u, f->index);
            return v;
        }
        case LddlKind::Not: {
            auto v = lddl_sat_set(g, f->a);
            v.flip();
            return v;
        }
        case LddlKind::And: {
            auto v = lddl_sat_set(g, f->a);
            auto w = lddl_sat_set(g, f->b);
            for (int u = 0; u < g.n; ++u) v[u] = v[u] && w[u];
            return v;
        }
        case LddlKind::Or: {
            auto v = lddl_sat_set(g, f->a);
            auto w = lddl_sat_set(g, f->b);
            for (int u = 0; u < g.n; ++u) v[u] = v[u] || w[u];
            return v;
        }
        case LddlKind::Diamond:
        case LddlKind::Box:
        case LddlKind::Unique: {
            auto rel = program_relation(g, f->prog);
            auto sat = lddl_sat_set(g, f->a);
            std::vector<int> hits(g.n, 0), succ(g.n, 0);
            for (auto& [u, v] : rel) {
                ++succ[u];
                if (sat[v]) ++hits[u];
            }
            std::vector<bool> out(g.n);
            for (int u = 0; u < g.n; ++u) {
                if (f->kind == LddlKind::Diamond) out[u] = hits[u] >= 1;
                else if (f->kind == LddlKind::Box) out[u] = hits[u] == succ[u];
                else out[u] = hits[u] == 1;
            }
            return out;
        }
    }
    throw std::runtime_error("bad formula");
}

bool modelcheck_lddl(const PointedGraph& g, const LddlPtr& f) {
    return lddl_sat_set(g.g, f)[g.point];
}

/* ---- normalization ---- */

namespace {

struct NAtom {
    bool step;       /* else Test(test) */
    LddlPtr test;
};
using NSeq = std::vector<NAtom>;

ProgPtr seq_to_prog(const NSeq& seq) {
    ProgPtr p;
    for (auto& a : seq) {
        ProgPtr atom = a.step ? p_step() : p_test(a.test);
        p = p ? p_seq(p, atom) : atom;
    }
    ProgPtr stay = p_stay();
    return p ? p_seq(p, stay) : stay;
}

std::vector<NSeq> norm_prog(const ProgPtr& p);

std::vector<NSeq> norm_prog(const ProgPtr& p) {
    switch (p->kind) {
        case ProgKind::Step: return {{{true, nullptr}}};
        case ProgKind::Test: {
            LddlPtr t = normalize_lddl(p->test);
            if (t->kind == LddlKind::Top) return {NSeq{}};  /* identity atom drops out */
            return {{{false, t}}};
        }
        case ProgKind::Seq: {
            auto xs = norm_prog(p->a);
            auto ys = norm_prog(p->b);
            std::vector<NSeq> out;
            for (auto& x : xs)
                for (auto& y : ys) {
                    NSeq s = x;
                    s.insert(s.end(), y.begin(), y.end());
                    out.push_back(std::move(s));
                }
            return out;
        }
        case ProgKind::Union: {
            auto out = norm_prog(p->a);
            auto ys = norm_prog(p->b);
            out.insert(out.end(), ys.begin(), ys.end());
            return out;
        }
    }
    throw std::runtime_error("bad program");
}

std::vector<NSeq> with_test(std::vector<NSeq> seqs, const LddlPtr& phi) {
    if (phi->kind == LddlKind::Top) return seqs;
    for (auto& s : seqs) s.push_back({false, phi});
    return seqs;
}

}  // namespace

LddlPtr normalize_lddl(const LddlPtr& f) {
    switch (f->kind) {
        case LddlKind::Top:
        case LddlKind::Prop: return f;
        case LddlKind::Not: return l_not(normalize_lddl(f->a));
        case LddlKind::And: return l_and(normalize_lddl(f->a), normalize_lddl(f->b));
        case LddlKind::Or: return l_or(normalize_lddl(f->a), normalize_lddl(f->b));
        case LddlKind::Box:
            return normalize_lddl(l_not(l_diamond(f->prog, l_not(f->a))));
        case LddlKind::Diamond: {
            auto seqs = with_test(norm_prog(f->prog), normalize_lddl(f->a));
            LddlPtr out;
            for (auto& s : seqs) {
                LddlPtr d = l_diamond(seq_to_prog(s), l_top());
                out = out ? l_or(out, d) : d;
            }
            return out;
        }
        case LddlKind::Unique: {
            auto seqs = with_test(norm_prog(f->prog), normalize_lddl(f->a));
            ProgPtr prog;
            for (auto& s : seqs) {
                ProgPtr q = seq_to_prog(s);
                prog = prog ? p_union(prog, q) : q;
            }
            return l_unique(prog, l_top());
        }
    }
    throw std::runtime_error("bad formula");
}

/* ---- WGML membership ---- */

namespace {

/* grammar check; `top_class` demands the counting atom's argument be Top */
bool wgml_ok(const GmlPtr& f, bool top_class, GmlPtr& witness) {
    if (is_ml(f)) return true;
    switch (f->kind) {
        case GmlKind::And:
        case GmlKind::Or:
            return wgml_ok(f->a, top_class, witness) && wgml_ok(f->b, top_class, witness);
        case GmlKind::DiamondGeq:
            if (f->grade == 1) return wgml_ok(f->a, top_class, witness);
            if (f->grade == 2) {
                if (top_class ? (f->a->kind == GmlKind::Top) : is_ml(f->a)) return true;
                witness = f;
                return false;
            }
            witness = f;
            return false;
        default:
            /* a negation (or other form) sitting above a counting modality */
            witness = f;
            return false;
    }
}

}  // namespace

WgmlMembership wgml_membership(const GmlPtr& f) {
    GmlPtr w;
    if (wgml_ok(f, true, w)) return {WgmlClass::InWgmlTop, nullptr};
    GmlPtr w2;
    if (wgml_ok(f, false, w2)) return {WgmlClass::InWgmlModal, w};
    return {WgmlClass::NotWgml, w2};
}

/* ---- samplers ---- */

static GmlPtr random_gml_rec(std::mt19937_64& rng, int depth, int props, int max_grade) {
    auto atom = [&]() -> GmlPtr {
        if (props > 0 && rng() % 3) return g_prop(static_cast<int>(rng() % props));
        return g_top();
    };
    if (depth <= 0) return atom();
    switch (rng() % 6) {
        case 0: return atom();
        case 1: return g_not(random_gml_rec(rng, depth - 1, props, max_grade));
        case 2:
            return g_and(random_gml_rec(rng, depth - 1, props, max_grade),
                         random_gml_rec(rng, depth - 1, props, max_grade));
        case 3:
            return g_or(random_gml_rec(rng, depth - 1, props, max_grade),
                        random_gml_rec(rng, depth - 1, props, max_grade));
        default:
            return g_diamond(1 + static_cast<int>(rng() % max_grade),
                             random_gml_rec(rng, depth - 1, props, max_grade));
    }
}

GmlPtr random_gml(uint64_t seed, int max_depth, int prop_count, int max_grade) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    return random_gml_rec(rng, max_depth, prop_count, max_grade);
}

static LddlPtr random_lddl_rec(std::mt19937_64& rng, int depth, int props);

static ProgPtr random_prog_rec(std::mt19937_64& rng, int depth, int props) {
    if (depth <= 0) return rng() % 2 ? p_step() : p_stay();
    switch (rng() % 5) {
        case 0: return p_step();
        case 1: return p_stay();
        case 2: return p_test(random_lddl_rec(rng, depth - 1, props));
        case 3:
            return p_seq(random_prog_rec(rng, depth - 1, props),
                         random_prog_rec(rng, depth - 1, props));
        default:
            return p_union(random_prog_rec(rng, depth - 1, props),
                           random_prog_rec(rng, depth - 1, props));
    }
}

static LddlPtr random_lddl_rec(std::mt19937_64& rng, int depth, int props) {
    auto atom = [&]() -> LddlPtr {
        if (props > 0 && rng() % 3) return l_prop(static_cast<int>(rng() % props));
        return l_top();
    };
    if (depth <= 0) return atom();
    switch (rng() % 7) {
        case 0: return atom();
        case 1: return l_not(random_lddl_rec(rng, depth - 1, props));
        case 2:
            return l_and(random_lddl_rec(rng, depth - 1, props),
                         random_lddl_rec(rng, depth - 1, props));
        case 3:
            return l_or(random_lddl_rec(rng, depth - 1, props),
                        random_lddl_rec(rng, depth - 1, props));
        case 4:
            return l_diamond(random_prog_rec(rng, depth - 1, props),
                             random_lddl_rec(rng, depth - 1, props));
        case 5:
            return l_box(random_prog_rec(rng, depth - 1, props),
                         random_lddl_rec(rng, depth - 1, props));
        default:
            return l_unique(random_prog_rec(rng, depth - 1, props),
                            random_lddl_rec(rng, depth - 1, props));
    }
}

LddlPtr random_lddl(uint64_t seed, int max_depth, int prop_count) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 2);
    return random_lddl_rec(rng, max_depth, prop_count);
}

}  // namespace kignn
