#include "uext/fo.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "uext/modal.hpp"

namespace uext::fo {

namespace {
FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}

FormulaPtr rel(RelKind r, Term t1, Term t2) {
    return make({.kind = Formula::Kind::Rel, .rel = r, .lhs = std::move(t1), .rhs = std::move(t2)});
}
FormulaPtr eq(Term t1, Term t2) {
    return make({.kind = Formula::Kind::Eq, .lhs = std::move(t1), .rhs = std::move(t2)});
}
FormulaPtr member(std::string set_name, Term t) {
    return make({.kind = Formula::Kind::Member, .lhs = std::move(t), .name = std::move(set_name)});
}
FormulaPtr neg(FormulaPtr f) { return make({.kind = Formula::Kind::Not, .a = std::move(f)}); }
FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
    return make({.kind = Formula::Kind::And, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr disj(FormulaPtr a, FormulaPtr b) {
    return make({.kind = Formula::Kind::Or, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    return make({.kind = Formula::Kind::Implies, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr exists(std::string v, FormulaPtr body) {
    return make({.kind = Formula::Kind::Exists, .name = std::move(v), .a = std::move(body)});
}
FormulaPtr forall(std::string v, FormulaPtr body) {
    return make({.kind = Formula::Kind::Forall, .name = std::move(v), .a = std::move(body)});
}

FormulaPtr conj_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return forall("x", eq(Term::var("x"), Term::var("x")));
    FormulaPtr acc = fs[0];
    for (size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
    return acc;
}
FormulaPtr disj_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return neg(forall("x", eq(Term::var("x"), Term::var("x"))));
    FormulaPtr acc = fs[0];
    for (size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
    return acc;
}

namespace {

void free_vars_rec(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
    auto visit_term = [&](const Term& t) {
        if (t.kind == Term::Kind::Var && !bound.count(t.name)) out.insert(t.name);
    };
    switch (f->kind) {
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
            visit_term(f->lhs);
            visit_term(f->rhs);
            return;
        case Formula::Kind::Member:
            visit_term(f->lhs);
            return;
        case Formula::Kind::Not:
            free_vars_rec(f->a, bound, out);
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            free_vars_rec(f->a, bound, out);
            free_vars_rec(f->b, bound, out);
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            bool fresh = bound.insert(f->name).second;
            free_vars_rec(f->a, bound, out);
            if (fresh) bound.erase(f->name);
            return;
        }
    }
}

}  // namespace

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    free_vars_rec(f, bound, out);
    return out;
}

int quantifier_rank(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
        case Formula::Kind::Member:
            return 0;
        case Formula::Kind::Not:
            return quantifier_rank(f->a);
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return std::max(quantifier_rank(f->a), quantifier_rank(f->b));
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            return 1 + quantifier_rank(f->a);
    }
    return 0;
}

bool uses_sp(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Rel:
            return f->rel != RelKind::R;
        case Formula::Kind::Eq:
        case Formula::Kind::Member:
            return false;
        case Formula::Kind::Not:
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            return uses_sp(f->a);
        default:
            return uses_sp(f->a) || uses_sp(f->b);
    }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels, loosest first: quantifier < -> < | < & < ~ < atom.
enum Level { kQuant = 0, kImplies, kOr, kAnd, kUnary };

std::string term_str(const Term& t) { return t.name; }

void print_rec(const FormulaPtr& f, int parent, std::ostream& out) {
    auto wrap = [&](int own, auto body) {
        bool paren = own < parent;
        if (paren) out << "(";
        body();
        if (paren) out << ")";
    };
    switch (f->kind) {
        case Formula::Kind::Rel: {
            const char* n = f->rel == RelKind::R ? "R" : (f->rel == RelKind::S ? "S" : "P");
            out << n << "(" << term_str(f->lhs) << ", " << term_str(f->rhs) << ")";
            return;
        }
        case Formula::Kind::Eq:
            out << term_str(f->lhs) << " = " << term_str(f->rhs);
            return;
        case Formula::Kind::Member:
            out << f->name << "[" << term_str(f->lhs) << "]";
            return;
        case Formula::Kind::Not:
            out << "~";
            if (f->a->kind == Formula::Kind::Eq) {
                out << "(";
                print_rec(f->a, kQuant, out);
                out << ")";
            } else {
                print_rec(f->a, kUnary, out);
            }
            return;
        case Formula::Kind::And:
            wrap(kAnd, [&] {
                print_rec(f->a, kAnd, out);
                out << " & ";
                print_rec(f->b, kAnd + 1, out);
            });
            return;
        case Formula::Kind::Or:
            wrap(kOr, [&] {
                print_rec(f->a, kOr, out);
                out << " | ";
                print_rec(f->b, kOr + 1, out);
            });
            return;
        case Formula::Kind::Implies:
            wrap(kImplies, [&] {
                print_rec(f->a, kImplies + 1, out);
                out << " -> ";
                print_rec(f->b, kImplies, out);
            });
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            wrap(kQuant, [&] {
                out << (f->kind == Formula::Kind::Exists ? "exists " : "forall ");
                out << f->name << ". ";
                print_rec(f->a, kQuant, out);
            });
            return;
    }
}

}  // namespace

std::string to_string(const FormulaPtr& f) {
    std::ostringstream out;
    print_rec(f, kQuant, out);
    return out.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Lexer {
    std::string text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= text.size();
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("at offset " + std::to_string(pos) + ": " + msg);
    }
    bool try_sym(const std::string& s) {
        skip_ws();
        if (text.compare(pos, s.size(), s) == 0) {
            pos += s.size();
            return true;
        }
        return false;
    }
    void expect_sym(const std::string& s) {
        if (!try_sym(s)) fail("expected '" + s + "'");
    }
    // Lowercase identifier (variable or keyword or constant d_<hub>).
    std::string ident() {
        skip_ws();
        size_t start = pos;
        if (pos >= text.size() || !std::islower(static_cast<unsigned char>(text[pos]))) fail("expected identifier");
        while (pos < text.size() &&
               (std::islower(static_cast<unsigned char>(text[pos])) ||
                std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        return text.substr(start, pos - start);
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
};

struct FoParser {
    Lexer lx;

    Term term() {
        std::string id = lx.ident();
        if (id.rfind("d_", 0) == 0) return Term::constant(id);
        return Term::var(id);
    }

    FormulaPtr formula() { return implies_level(); }

    FormulaPtr implies_level() {
        FormulaPtr lhs = or_level();
        if (lx.try_sym("->")) return implies(lhs, implies_level());
        return lhs;
    }
    FormulaPtr or_level() {
        FormulaPtr lhs = and_level();
        while (lx.try_sym("|")) lhs = disj(lhs, and_level());
        return lhs;
    }
    FormulaPtr and_level() {
        FormulaPtr lhs = unary_level();
        while (lx.try_sym("&")) lhs = conj(lhs, unary_level());
        return lhs;
    }
    FormulaPtr unary_level() {
        if (lx.try_sym("~")) return neg(unary_level());
        if (lx.try_sym("(")) {
            FormulaPtr f = formula();
            lx.expect_sym(")");
            return f;
        }
        char c = lx.peek();
        if (c == 'R' || c == 'S' || c == 'P') {
            ++lx.pos;
            RelKind r = c == 'R' ? RelKind::R : (c == 'S' ? RelKind::S : RelKind::P);
            lx.expect_sym("(");
            Term t1 = term();
            lx.expect_sym(",");
            Term t2 = term();
            lx.expect_sym(")");
            return rel(r, t1, t2);
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            Lexer save = lx;
            std::string id = lx.ident();
            if (id == "exists" || id == "forall") {
                std::string v = lx.ident();
                if (v.rfind("d_", 0) == 0) lx.fail("cannot bind constant name " + v);
                lx.expect_sym(".");
                FormulaPtr body = formula();
                return id == "exists" ? exists(v, body) : forall(v, body);
            }
            // Plain term: must form an equality atom.
            lx = save;
            Term t1 = term();
            lx.expect_sym("=");
            Term t2 = term();
            return eq(t1, t2);
        }
        lx.fail("expected formula");
    }
};

}  // namespace

FormulaPtr parse_fo(const std::string& text) {
    FoParser p{Lexer{text}};
    FormulaPtr f = p.formula();
    if (!p.lx.eof()) p.lx.fail("trailing input");
    return f;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

/// Formulas are compiled once per evaluation: terms resolve to environment
/// slots or concrete nodes, set atoms to node-set pointers. The quantifier
/// loops then run on plain integers.
struct CompiledEval {
    struct Node {
        Formula::Kind kind;
        RelKind rel = RelKind::R;
        int lhs = 0, rhs = 0;          // >= 0: env slot; < 0: node -(v+1)
        const NodeSet* member = nullptr;
        int a = -1, b = -1;            // child indices
        int slot = -1;                 // quantifiers
    };

    const Structure& st;
    long long steps = 0;
    long long max_steps;
    std::vector<Node> nodes;
    std::vector<int> env;

    CompiledEval(const Structure& structure, long long cap) : st(structure), max_steps(cap) {}

    int resolve_term(const Term& t, const std::vector<std::pair<std::string, int>>& scope) {
        if (t.kind == Term::Kind::Const) {
            if (t.name.rfind("d_", 0) == 0) {
                std::string hub = t.name.substr(2);
                if (st.has_node(hub) && st.is_hub(st.index(hub))) return -(st.index(hub) + 1);
            }
            throw InputError("unresolved constant: " + t.name);
        }
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == t.name) return it->second;
        throw InputError("unbound variable: " + t.name);
    }

    int compile(const FormulaPtr& f, std::vector<std::pair<std::string, int>>& scope,
                const Valuation* valuation) {
        Node n;
        n.kind = f->kind;
        switch (f->kind) {
            case Formula::Kind::Rel:
                n.rel = f->rel;
                n.lhs = resolve_term(f->lhs, scope);
                n.rhs = resolve_term(f->rhs, scope);
                break;
            case Formula::Kind::Eq:
                n.lhs = resolve_term(f->lhs, scope);
                n.rhs = resolve_term(f->rhs, scope);
                break;
            case Formula::Kind::Member: {
                if (!valuation) throw InputError("set atom " + f->name + " needs a valuation");
                auto it = valuation->find(f->name);
                if (it == valuation->end()) throw InputError("unbound set name: " + f->name);
                n.member = &it->second;
                n.lhs = resolve_term(f->lhs, scope);
                break;
            }
            case Formula::Kind::Not:
                n.a = compile(f->a, scope, valuation);
                break;
            case Formula::Kind::And:
            case Formula::Kind::Or:
            case Formula::Kind::Implies:
                n.a = compile(f->a, scope, valuation);
                n.b = compile(f->b, scope, valuation);
                break;
            case Formula::Kind::Exists:
            case Formula::Kind::Forall: {
                n.slot = static_cast<int>(env.size());
                env.push_back(0);
                scope.emplace_back(f->name, n.slot);
                n.a = compile(f->a, scope, valuation);
                scope.pop_back();
                break;
            }
        }
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    int value(int code) const { return code < 0 ? -code - 1 : env[code]; }

    void tick() {
        if (++steps > max_steps)
            throw LimitError("evaluation cap exceeded (" + std::to_string(max_steps) + " steps)");
    }

    bool run(int i) {
        tick();
        const Node& n = nodes[i];
        switch (n.kind) {
            case Formula::Kind::Rel:
                return st.edge(n.rel, value(n.lhs), value(n.rhs));
            case Formula::Kind::Eq:
                return value(n.lhs) == value(n.rhs);
            case Formula::Kind::Member:
                return n.member->contains(value(n.lhs));
            case Formula::Kind::Not:
                return !run(n.a);
            case Formula::Kind::And:
                return run(n.a) && run(n.b);
            case Formula::Kind::Or:
                return run(n.a) || run(n.b);
            case Formula::Kind::Implies:
                return !run(n.a) || run(n.b);
            case Formula::Kind::Exists:
            case Formula::Kind::Forall: {
                bool want = n.kind == Formula::Kind::Exists;
                for (int v = 0; v < st.size(); ++v) {
                    tick();
                    env[n.slot] = v;
                    if (run(n.a) == want) return want;
                }
                return !want;
            }
        }
        return false;
    }
};

}  // namespace detail

bool eval(const Structure& a, const FormulaPtr& f, const std::map<std::string, int>& assignment,
          const Valuation* valuation, const EvalOptions& opt) {
    std::vector<std::string> order;
    std::vector<int> values;
    for (const auto& [k, v] : assignment) {
        if (v < 0 || v >= a.size()) throw InputError("assignment out of range for " + k);
        order.push_back(k);
        values.push_back(v);
    }
    Evaluator ev(a, f, std::move(order), valuation, opt);
    return ev.at(values);
}

Evaluator::Evaluator(const Structure& a, const FormulaPtr& f, std::vector<std::string> free_var_order,
                     const Valuation* valuation, const EvalOptions& opt)
    : impl_(std::make_unique<detail::CompiledEval>(a, opt.max_steps)),
      free_count_(free_var_order.size()) {
    std::vector<std::pair<std::string, int>> scope;
    for (size_t i = 0; i < free_var_order.size(); ++i) {
        impl_->env.push_back(0);
        scope.emplace_back(free_var_order[i], static_cast<int>(i));
    }
    root_ = impl_->compile(f, scope, valuation);
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;

bool Evaluator::at(const std::vector<int>& values) {
    if (values.size() != free_count_) throw InputError("assignment arity mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0 || values[i] >= impl_->st.size())
            throw InputError("assignment out of range");
        impl_->env[i] = values[i];
    }
    impl_->steps = 0;
    return impl_->run(root_);
}

// ---------------------------------------------------------------------------
// Sharp translation

FormulaPtr sharp_translate(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Rel:
            if (f->rel != RelKind::R)
                throw InputError("sharp translation applies to R-formulas only");
            return disj(rel(RelKind::S, f->lhs, f->rhs), rel(RelKind::P, f->lhs, f->rhs));
        case Formula::Kind::Eq:
            return f;
        case Formula::Kind::Member:
            throw InputError("sharp translation applies to R-formulas only");
        case Formula::Kind::Not:
            return neg(sharp_translate(f->a));
        case Formula::Kind::And:
            return conj(sharp_translate(f->a), sharp_translate(f->b));
        case Formula::Kind::Or:
            return disj(sharp_translate(f->a), sharp_translate(f->b));
        case Formula::Kind::Implies:
            return implies(sharp_translate(f->a), sharp_translate(f->b));
        case Formula::Kind::Exists:
            return exists(f->name, sharp_translate(f->a));
        case Formula::Kind::Forall:
            return forall(f->name, sharp_translate(f->a));
    }
    throw InputError("bad formula");
}

// ---------------------------------------------------------------------------
// Standard translation

namespace {

FormulaPtr st_rec(const modal::FormulaPtr& f, const std::string& x, int& fresh) {
    using MK = modal::Formula::Kind;
    switch (f->kind) {
        case MK::Var:
            return member(f->name, Term::var(x));
        case MK::True:
            return eq(Term::var(x), Term::var(x));
        case MK::False:
            return neg(eq(Term::var(x), Term::var(x)));
        case MK::Not:
            return neg(st_rec(f->a, x, fresh));
        case MK::And:
            return conj(st_rec(f->a, x, fresh), st_rec(f->b, x, fresh));
        case MK::Or:
            return disj(st_rec(f->a, x, fresh), st_rec(f->b, x, fresh));
        case MK::Implies:
            return implies(st_rec(f->a, x, fresh), st_rec(f->b, x, fresh));
        case MK::Diamond: {
            std::string y = "y" + std::to_string(fresh++);
            return exists(y, conj(rel(RelKind::R, Term::var(x), Term::var(y)), st_rec(f->a, y, fresh)));
        }
        case MK::Box: {
            std::string y = "y" + std::to_string(fresh++);
            return forall(y, implies(rel(RelKind::R, Term::var(x), Term::var(y)), st_rec(f->a, y, fresh)));
        }
    }
    throw InputError("bad modal formula");
}

}  // namespace

FormulaPtr standard_translation(const modal::FormulaPtr& f, const std::string& x) {
    int fresh = 1;
    return st_rec(f, x, fresh);
}

// ---------------------------------------------------------------------------
// Ehrenfeucht-Fraissé game

namespace {

struct EfGame {
    const Structure& a;
    const Structure& b;
    std::map<std::pair<std::vector<std::pair<int, int>>, int>, bool> memo;

    // Pairs must stay a partial isomorphism w.r.t. =, R, S, P. Constants are
    // seeded into the position up front, so they are preserved automatically.
    bool consistent(const std::vector<std::pair<int, int>>& pairs, int x, int y) const {
        for (const auto& [u, v] : pairs) {
            if ((u == x) != (v == y)) return false;
            for (RelKind q : {RelKind::R, RelKind::S, RelKind::P}) {
                if (a.edge(q, u, x) != b.edge(q, v, y)) return false;
                if (a.edge(q, x, u) != b.edge(q, y, v)) return false;
            }
        }
        for (RelKind q : {RelKind::R, RelKind::S, RelKind::P})
            if (a.edge(q, x, x) != b.edge(q, y, y)) return false;
        return true;
    }

    bool duplicator_wins(std::vector<std::pair<int, int>> pairs, int rounds) {
        if (rounds == 0) return true;
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        auto key = std::make_pair(pairs, rounds);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        bool win = true;
        for (int x = 0; x < a.size() && win; ++x) {  // spoiler plays in a
            bool answered = false;
            for (int y = 0; y < b.size() && !answered; ++y) {
                if (!consistent(pairs, x, y)) continue;
                auto next = pairs;
                next.emplace_back(x, y);
                if (duplicator_wins(next, rounds - 1)) answered = true;
            }
            if (!answered) win = false;
        }
        for (int y = 0; y < b.size() && win; ++y) {  // spoiler plays in b
            bool answered = false;
            for (int x = 0; x < a.size() && !answered; ++x) {
                if (!consistent(pairs, x, y)) continue;
                auto next = pairs;
                next.emplace_back(x, y);
                if (duplicator_wins(next, rounds - 1)) answered = true;
            }
            if (!answered) win = false;
        }
        memo[key] = win;
        return win;
    }
};

}  // namespace

bool ef_equivalent(const Structure& a, const Structure& b, int rounds, const EfOptions& opt) {
    if (rounds < 0) throw InputError("negative round count");
    if (rounds > opt.max_rounds)
        throw LimitError("round count " + std::to_string(rounds) + " exceeds cap " +
                         std::to_string(opt.max_rounds));
    auto ca = a.constants();
    auto cb = b.constants();
    {
        auto names = [](const std::map<std::string, int>& m) {
            std::vector<std::string> out;
            for (const auto& [k, v] : m) out.push_back(k);
            return out;
        };
        if (names(ca) != names(cb)) throw InputError("constant signatures differ");
    }
    std::vector<std::pair<int, int>> seed;
    for (const auto& [name, va] : ca) seed.emplace_back(va, cb.at(name));
    // Constant interpretations must already be a partial isomorphism.
    EfGame game{a, b, {}};
    for (size_t i = 0; i < seed.size(); ++i) {
        std::vector<std::pair<int, int>> prefix(seed.begin(), seed.begin() + i);
        if (!game.consistent(prefix, seed[i].first, seed[i].second)) return false;
    }
    return game.duplicator_wins(seed, rounds);
}

}  // namespace uext::fo
