#include "uext/modal.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uext::modal {

namespace {
FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}

FormulaPtr var(std::string name) { return make({.kind = Formula::Kind::Var, .name = std::move(name)}); }
FormulaPtr tru() { return make({.kind = Formula::Kind::True}); }
FormulaPtr fls() { return make({.kind = Formula::Kind::False}); }
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
FormulaPtr diamond(FormulaPtr f) { return make({.kind = Formula::Kind::Diamond, .a = std::move(f)}); }
FormulaPtr box(FormulaPtr f) { return make({.kind = Formula::Kind::Box, .a = std::move(f)}); }

namespace {

void vars_rec(const FormulaPtr& f, std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Var: out.insert(f->name); return;
        case Formula::Kind::True:
        case Formula::Kind::False: return;
        case Formula::Kind::Not:
        case Formula::Kind::Diamond:
        case Formula::Kind::Box: vars_rec(f->a, out); return;
        default:
            vars_rec(f->a, out);
            vars_rec(f->b, out);
    }
}

}  // namespace

std::set<std::string> vars(const FormulaPtr& f) {
    std::set<std::string> out;
    vars_rec(f, out);
    return out;
}

int modal_depth(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Var:
        case Formula::Kind::True:
        case Formula::Kind::False: return 0;
        case Formula::Kind::Not: return modal_depth(f->a);
        case Formula::Kind::Diamond:
        case Formula::Kind::Box: return 1 + modal_depth(f->a);
        default: return std::max(modal_depth(f->a), modal_depth(f->b));
    }
}

// ---------------------------------------------------------------------------
// Printing and parsing

namespace {

enum Level { kImplies = 0, kOr, kAnd, kUnary };

void print_rec(const FormulaPtr& f, int parent, std::ostream& out) {
    auto wrap = [&](int own, auto body) {
        bool paren = own < parent;
        if (paren) out << "(";
        body();
        if (paren) out << ")";
    };
    switch (f->kind) {
        case Formula::Kind::Var: out << f->name; return;
        case Formula::Kind::True: out << "true"; return;
        case Formula::Kind::False: out << "false"; return;
        case Formula::Kind::Not:
            out << "~";
            print_rec(f->a, kUnary, out);
            return;
        case Formula::Kind::Diamond:
            out << "<>";
            print_rec(f->a, kUnary, out);
            return;
        case Formula::Kind::Box:
            out << "[]";
            print_rec(f->a, kUnary, out);
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
    }
}

struct ModalParser {
    std::string text;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("at offset " + std::to_string(pos) + ": " + msg);
    }
    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
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

    FormulaPtr formula() {
        FormulaPtr lhs = or_level();
        if (try_sym("->")) return implies(lhs, formula());
        return lhs;
    }
    FormulaPtr or_level() {
        FormulaPtr lhs = and_level();
        while (try_sym("|")) lhs = disj(lhs, and_level());
        return lhs;
    }
    FormulaPtr and_level() {
        FormulaPtr lhs = unary_level();
        while (try_sym("&")) lhs = conj(lhs, unary_level());
        return lhs;
    }
    FormulaPtr unary_level() {
        if (try_sym("~")) return neg(unary_level());
        if (try_sym("<>")) return diamond(unary_level());
        if (try_sym("[]")) return box(unary_level());
        if (try_sym("(")) {
            FormulaPtr f = formula();
            expect_sym(")");
            return f;
        }
        skip_ws();
        if (pos < text.size() && std::islower(static_cast<unsigned char>(text[pos]))) {
            size_t start = pos;
            while (pos < text.size() &&
                   (std::islower(static_cast<unsigned char>(text[pos])) ||
                    std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            std::string id = text.substr(start, pos - start);
            if (id == "true") return tru();
            if (id == "false") return fls();
            return var(id);
        }
        fail("expected formula");
    }
};

}  // namespace

std::string to_string(const FormulaPtr& f) {
    std::ostringstream out;
    print_rec(f, kImplies, out);
    return out.str();
}

FormulaPtr parse_modal(const std::string& text) {
    ModalParser p{text, 0};
    FormulaPtr f = p.formula();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return f;
}

// ---------------------------------------------------------------------------
// Evaluation: formulas are flattened to a postorder program evaluated as a
// stack machine over node masks, so valuation sweeps stay cheap.

namespace {

struct Prog {
    struct Op {
        Formula::Kind kind;
        int slot = -1;  // Var
    };
    std::vector<Op> ops;
    std::vector<std::string> vars;  // slot -> name, sorted
    int stack_need = 0;

    static Prog compile(const FormulaPtr& f) {
        Prog p;
        std::set<std::string> vs = modal::vars(f);
        p.vars.assign(vs.begin(), vs.end());
        emit(f, p);
        int depth = 0;
        for (const auto& op : p.ops) {
            switch (op.kind) {
                case Formula::Kind::Var:
                case Formula::Kind::True:
                case Formula::Kind::False: ++depth; break;
                case Formula::Kind::And:
                case Formula::Kind::Or:
                case Formula::Kind::Implies: --depth; break;
                default: break;
            }
            p.stack_need = std::max(p.stack_need, depth);
        }
        return p;
    }

    static void emit(const FormulaPtr& f, Prog& p) {
        switch (f->kind) {
            case Formula::Kind::Var: {
                int slot = static_cast<int>(
                    std::lower_bound(p.vars.begin(), p.vars.end(), f->name) - p.vars.begin());
                p.ops.push_back({f->kind, slot});
                return;
            }
            case Formula::Kind::True:
            case Formula::Kind::False:
                p.ops.push_back({f->kind});
                return;
            case Formula::Kind::Not:
            case Formula::Kind::Diamond:
            case Formula::Kind::Box:
                emit(f->a, p);
                p.ops.push_back({f->kind});
                return;
            default:
                emit(f->a, p);
                emit(f->b, p);
                p.ops.push_back({f->kind});
        }
    }
};

struct MaskEval {
    const Structure& a;
    std::uint64_t full;
    std::uint64_t succ[kMaxNodes];

    explicit MaskEval(const Structure& s) : a(s) {
        full = s.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << s.size()) - 1;
        for (int v = 0; v < s.size(); ++v) succ[v] = s.succ(RelKind::R, v);
    }

    std::uint64_t run(const Prog& p, const std::uint64_t* var_masks) const {
        std::uint64_t fixed[64];
        fixed[0] = 0;
        std::vector<std::uint64_t> spill;
        std::uint64_t* stack = fixed;
        if (p.stack_need > 64) {
            spill.resize(p.stack_need);
            stack = spill.data();
        }
        int sp = 0;
        for (const auto& op : p.ops) {
            switch (op.kind) {
                case Formula::Kind::Var: stack[sp++] = var_masks[op.slot]; break;
                case Formula::Kind::True: stack[sp++] = full; break;
                case Formula::Kind::False: stack[sp++] = 0; break;
                case Formula::Kind::Not: stack[sp - 1] = full & ~stack[sp - 1]; break;
                case Formula::Kind::And: --sp; stack[sp - 1] &= stack[sp]; break;
                case Formula::Kind::Or: --sp; stack[sp - 1] |= stack[sp]; break;
                case Formula::Kind::Implies:
                    --sp;
                    stack[sp - 1] = (full & ~stack[sp - 1]) | stack[sp];
                    break;
                case Formula::Kind::Diamond: {
                    std::uint64_t m = stack[sp - 1], out = 0;
                    for (int w = 0; w < a.size(); ++w)
                        if (succ[w] & m) out |= std::uint64_t{1} << w;
                    stack[sp - 1] = out;
                    break;
                }
                case Formula::Kind::Box: {
                    std::uint64_t m = stack[sp - 1], out = 0;
                    for (int w = 0; w < a.size(); ++w)
                        if (!(succ[w] & ~m & full)) out |= std::uint64_t{1} << w;
                    stack[sp - 1] = out;
                    break;
                }
            }
        }
        return stack[0];
    }
};

std::uint64_t masks_from_valuation(const Structure& a, const Valuation& val, const Prog& p,
                                   std::uint64_t* out) {
    for (size_t i = 0; i < p.vars.size(); ++i) {
        auto it = val.find(p.vars[i]);
        if (it == val.end()) throw InputError("unbound variable: " + p.vars[i]);
        if (it->second.universe() != a.size()) throw InputError("valuation universe mismatch");
        out[i] = it->second.mask();
    }
    return p.vars.size();
}

}  // namespace

std::uint64_t eval_mask(const Structure& a, const Valuation& val, const FormulaPtr& f) {
    if (a.size() == 0) return 0;
    Prog p = Prog::compile(f);
    std::uint64_t masks[kMaxNodes] = {};
    masks_from_valuation(a, val, p, masks);
    return MaskEval(a).run(p, masks);
}

bool check(const Structure& a, const Valuation& val, int w, const FormulaPtr& f) {
    if (w < 0 || w >= a.size()) throw InputError("node out of range");
    return (eval_mask(a, val, f) >> w) & 1;
}

// ---------------------------------------------------------------------------
// Frame validity

std::vector<std::string> sorted_vars(const FormulaPtr& f) {
    std::set<std::string> vs = vars(f);
    return {vs.begin(), vs.end()};
}

Valuation valuation_from_code(const std::vector<std::string>& vars, const Structure& a,
                              std::uint64_t code) {
    Valuation val;
    for (size_t i = 0; i < vars.size(); ++i) {
        std::uint64_t m = (code >> (i * a.size())) & ((std::uint64_t{1} << a.size()) - 1);
        val[vars[i]] = NodeSet::from_mask(m, a.size());
    }
    return val;
}

namespace {

/// Scans valuation codes [begin, end) for the least one where f fails
/// somewhere; returns (code, failing-node-mask) or nullopt.
std::optional<std::pair<std::uint64_t, std::uint64_t>> scan_codes(
    const MaskEval& ev, const Prog& p, int n, std::uint64_t begin, std::uint64_t end, int threads) {
    const std::uint64_t node_full = (std::uint64_t{1} << n) - 1;
    auto scan_chunk = [&](std::uint64_t lo, std::uint64_t hi)
        -> std::optional<std::pair<std::uint64_t, std::uint64_t>> {
        std::uint64_t masks[64];
        for (std::uint64_t code = lo; code < hi; ++code) {
            for (size_t i = 0; i < p.vars.size(); ++i) masks[i] = (code >> (i * n)) & node_full;
            std::uint64_t sat = ev.run(p, masks);
            if ((sat & node_full) != node_full) return {{code, node_full & ~sat}};
        }
        return std::nullopt;
    };
    if (threads == 1) return scan_chunk(begin, end);

#ifdef _OPENMP
    int t = threads > 0 ? threads : omp_get_max_threads();
    std::vector<std::optional<std::pair<std::uint64_t, std::uint64_t>>> found(t);
    std::uint64_t span = (end - begin + t - 1) / t;
#pragma omp parallel num_threads(t)
    {
        int me = omp_get_thread_num();
        std::uint64_t lo = begin + me * span;
        std::uint64_t hi = std::min(end, lo + span);
        if (lo < end) found[me] = scan_chunk(lo, hi);
    }
    for (const auto& f : found)
        if (f) return f;
    return std::nullopt;
#else
    return scan_chunk(begin, end);
#endif
}

}  // namespace

Verdict frame_valid(const Structure& a, const FormulaPtr& f, const FrameValidOptions& opt) {
    if (a.size() == 0) return {Verdict::Kind::Valid, {}, -1};
    Prog p = Prog::compile(f);
    int bits = static_cast<int>(p.vars.size()) * a.size();
    if (bits > opt.max_val_bits || bits > 62) return {Verdict::Kind::Overflow, {}, -1};
    MaskEval ev(a);
    auto hit = scan_codes(ev, p, a.size(), 0, std::uint64_t{1} << bits, opt.threads);
    if (!hit) return {Verdict::Kind::Valid, {}, -1};
    auto [code, bad] = *hit;
    return {Verdict::Kind::Counterexample, valuation_from_code(p.vars, a, code),
            __builtin_ctzll(bad)};
}

std::uint64_t locally_valid_mask(const Structure& a, const FormulaPtr& f,
                                 const FrameValidOptions& opt) {
    if (a.size() == 0) return 0;
    Prog p = Prog::compile(f);
    int bits = static_cast<int>(p.vars.size()) * a.size();
    if (bits > opt.max_val_bits || bits > 62)
        throw LimitError("valuation space of " + std::to_string(bits) + " bits exceeds cap " +
                         std::to_string(std::min(opt.max_val_bits, 62)));
    MaskEval ev(a);
    const std::uint64_t node_full = (std::uint64_t{1} << a.size()) - 1;
    std::uint64_t acc = node_full;
    std::uint64_t masks[64];
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits) && acc; ++code) {
        for (size_t i = 0; i < p.vars.size(); ++i) masks[i] = (code >> (i * a.size())) & node_full;
        acc &= ev.run(p, masks);
    }
    return acc;
}

std::optional<std::pair<Valuation, std::uint64_t>> local_refutation(const Structure& a,
                                                                    const FormulaPtr& f, int w,
                                                                    const FrameValidOptions& opt) {
    if (w < 0 || w >= a.size()) throw InputError("node out of range");
    Prog p = Prog::compile(f);
    int bits = static_cast<int>(p.vars.size()) * a.size();
    if (bits > opt.max_val_bits || bits > 62)
        throw LimitError("valuation space of " + std::to_string(bits) + " bits exceeds cap " +
                         std::to_string(std::min(opt.max_val_bits, 62)) + " (raise --max-val-bits)");
    MaskEval ev(a);
    const std::uint64_t node_full = (std::uint64_t{1} << a.size()) - 1;
    const std::uint64_t end = std::uint64_t{1} << bits;

    auto scan_chunk = [&](std::uint64_t lo, std::uint64_t hi) -> std::optional<std::uint64_t> {
        std::uint64_t masks[64];
        for (std::uint64_t code = lo; code < hi; ++code) {
            for (size_t i = 0; i < p.vars.size(); ++i) masks[i] = (code >> (i * a.size())) & node_full;
            if (!((ev.run(p, masks) >> w) & 1)) return code;
        }
        return std::nullopt;
    };

    std::optional<std::uint64_t> best;
    if (opt.threads == 1) {
        best = scan_chunk(0, end);
    } else {
#ifdef _OPENMP
        int t = opt.threads > 0 ? opt.threads : omp_get_max_threads();
        std::vector<std::optional<std::uint64_t>> found(t);
        std::uint64_t span = (end + t - 1) / t;
#pragma omp parallel num_threads(t)
        {
            int me = omp_get_thread_num();
            std::uint64_t lo = me * span;
            std::uint64_t hi = std::min(end, lo + span);
            if (lo < end) found[me] = scan_chunk(lo, hi);
        }
        for (const auto& f2 : found)
            if (f2) { best = f2; break; }
#else
        best = scan_chunk(0, end);
#endif
    }
    if (!best) return std::nullopt;
    return {{valuation_from_code(p.vars, a, *best), *best}};
}

// ---------------------------------------------------------------------------
// The concrete formulas

FormulaPtr alt_n(int n) {
    if (n < 0) throw InputError("negative alt index");
    std::vector<FormulaPtr> disjuncts;
    for (int j = 0; j <= n; ++j) {
        FormulaPtr inner;
        if (j == 0) {
            inner = var("p0");
        } else {
            FormulaPtr ante = var("p0");
            for (int i = 1; i < j; ++i) ante = conj(ante, var("p" + std::to_string(i)));
            inner = implies(ante, var("p" + std::to_string(j)));
        }
        disjuncts.push_back(box(inner));
    }
    FormulaPtr out = disjuncts[0];
    for (size_t i = 1; i < disjuncts.size(); ++i) out = disj(out, disjuncts[i]);
    return out;
}

FormulaPtr phi_formula() {
    FormulaPtr p = var("p"), q = var("q");
    FormulaPtr pq = conj(p, q);
    FormulaPtr ante = conj(conj(conj(p, neg(q)), box(implies(pq, box(pq)))), diamond(pq));
    return implies(ante, box(pq));
}

// ---------------------------------------------------------------------------
// Frame conditions

namespace {

/// Reachability from `from` where only nodes in `through` may be stepped
/// out of; `from` itself is always stepped out of.
std::uint64_t forward_closure(const Structure& a, int from, std::uint64_t through) {
    std::uint64_t reached = std::uint64_t{1} << from;
    std::uint64_t frontier = reached;
    while (frontier) {
        std::uint64_t next = 0;
        for (std::uint64_t m = frontier; m; m &= m - 1) {
            int v = __builtin_ctzll(m);
            if (v != from && !((through >> v) & 1)) continue;
            next |= a.succ(RelKind::R, v);
        }
        frontier = next & ~reached;
        reached |= next;
    }
    return reached;
}

}  // namespace

bool star_condition(const Structure& a, int w) {
    if (w < 0 || w >= a.size()) throw InputError("node out of range");
    std::uint64_t succs = a.succ(RelKind::R, w);
    std::uint64_t through = succs | (std::uint64_t{1} << w);
    for (std::uint64_t m = succs; m; m &= m - 1) {
        int u = __builtin_ctzll(m);
        std::uint64_t reach = forward_closure(a, u, through);
        if (succs & ~reach) return false;
    }
    return true;
}

bool star_star_condition(const Structure& a, int w) {
    if (!star_condition(a, w)) return false;
    if (!a.edge(w, w)) return true;
    std::uint64_t succs = a.succ(RelKind::R, w);
    if (__builtin_popcountll(succs) <= 1) return true;
    for (std::uint64_t m = succs & ~(std::uint64_t{1} << w); m; m &= m - 1) {
        int v = __builtin_ctzll(m);
        if (a.edge(v, w)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Correspondence harness

namespace {

struct FrameJob {
    int n;
    std::uint64_t code;
};

void check_frame(const FrameJob& job, const FormulaPtr& f, const NodeCondition& cond,
                 const CorrespondenceOptions& opt, CorrespondenceReport& rep,
                 std::vector<std::tuple<int, std::uint64_t, int, bool, bool>>& hits) {
    Structure a;
    for (int i = 0; i < job.n; ++i) a.add_node(std::string(1, static_cast<char>('a' + i)));
    for (int i = 0; i < job.n; ++i)
        for (int j = 0; j < job.n; ++j)
            if ((job.code >> (i * job.n + j)) & 1) a.add_edge(i, j);
    FrameValidOptions fv{opt.max_val_bits, 1};
    std::uint64_t valid_mask;
    try {
        valid_mask = locally_valid_mask(a, f, fv);
    } catch (const LimitError&) {
        rep.overflow = true;
        return;
    }
    for (int wn = 0; wn < job.n; ++wn) {
        bool lv = (valid_mask >> wn) & 1;
        bool ch = cond(a, wn);
        if (lv != ch) hits.emplace_back(job.n, job.code, wn, lv, ch);
    }
}

}  // namespace

CorrespondenceReport correspondence_test(const FormulaPtr& f, const NodeCondition& condition,
                                         const CorrespondenceOptions& opt) {
    CorrespondenceReport rep;
    std::vector<FrameJob> jobs;
    for (int n = 1; n <= opt.exhaustive_max_nodes; ++n) {
        std::uint64_t count = std::uint64_t{1} << (n * n);
        for (std::uint64_t code = 0; code < count; ++code) jobs.push_back({n, code});
    }
    if (opt.sampled_max_nodes > opt.exhaustive_max_nodes && opt.samples > 0) {
        std::mt19937_64 rng(opt.seed);
        for (int n = opt.exhaustive_max_nodes + 1; n <= opt.sampled_max_nodes; ++n) {
            std::uint64_t mask = n * n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << (n * n)) - 1;
            for (long long s = 0; s < opt.samples; ++s) jobs.push_back({n, rng() & mask});
        }
    }
    rep.frames_checked = static_cast<long long>(jobs.size());

    std::vector<std::tuple<int, std::uint64_t, int, bool, bool>> all_hits;
    if (opt.threads == 1) {
        for (const auto& job : jobs) check_frame(job, f, condition, opt, rep, all_hits);
    } else {
#ifdef _OPENMP
        int t = opt.threads > 0 ? opt.threads : omp_get_max_threads();
        std::vector<std::vector<std::tuple<int, std::uint64_t, int, bool, bool>>> hits(t);
        std::vector<char> overflow(t, 0);
#pragma omp parallel num_threads(t)
        {
            int me = omp_get_thread_num();
            CorrespondenceReport local;
#pragma omp for schedule(dynamic, 256)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(jobs.size()); ++i)
                check_frame(jobs[i], f, condition, opt, local, hits[me]);
            if (local.overflow) overflow[me] = 1;
        }
        for (int i = 0; i < t; ++i) {
            if (overflow[i]) rep.overflow = true;
            all_hits.insert(all_hits.end(), hits[i].begin(), hits[i].end());
        }
#else
        for (const auto& job : jobs) check_frame(job, f, condition, opt, rep, all_hits);
#endif
    }
    std::sort(all_hits.begin(), all_hits.end());
    rep.violations_total = static_cast<long long>(all_hits.size());
    for (const auto& [n, code, wn, lv, ch] : all_hits) {
        if (static_cast<int>(rep.violations.size()) >= opt.max_violations) break;
        Structure a;
        for (int i = 0; i < n; ++i) a.add_node(std::string(1, static_cast<char>('a' + i)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if ((code >> (i * n + j)) & 1) a.add_edge(i, j);
        rep.violations.push_back({a.print_frame(), a.name(wn), lv, ch});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Family membership and the validity criterion

FamilyKReport family_k_check(const pres::Presentation& p) {
    FamilyKReport rep;
    pres::ValidationReport v = pres::validate(p);
    rep.almost_bounded = v.pass();
    if (!v.pass()) {
        for (const auto& viol : v.violations) rep.notes.push_back(viol);
        return rep;
    }
    int k = pres::expand_k_for(p, 2);
    Structure m = pres::expand(p, k);
    for (const auto& h : p.hubs) {
        if (!pres::hub_out_degree(p, h).is_infinite()) continue;
        if (!star_star_condition(m, m.index(h))) rep.cluster_failures.push_back(h);
    }
    for (const auto& h : p.hubs) {
        if (!pres::hub_out_degree(p, h).is_infinite()) continue;
        if (pres::hub_disjoint_successors(p, h)) {
            rep.witness_hub = h;
            break;
        }
    }
    if (!rep.witness_hub)
        rep.notes.push_back("no infinite-out-degree hub with pairwise almost-disjoint successor sets");
    return rep;
}

namespace {

bool hub_flags_nonprincipal(const pres::Presentation& p, const std::string& hub) {
    for (const auto& b : p.blocks) {
        if (b.origin != pres::Origin::NonPrincipal) continue;
        for (const auto& [h, q] : b.out_flags)
            if (h == hub) return true;
    }
    return false;
}

}  // namespace

CriterionVerdict criterion_validity(const pres::Presentation& p, int n, const CriterionOptions& opt) {
    pres::ValidationReport v = pres::validate(p);
    if (!v.pass()) throw InputError("presentation fails validation: " + v.summary());
    int k = pres::expand_k_for(p, opt.expand_k);
    Structure m = pres::expand(p, k);
    Card bound = Card::fin(static_cast<std::uint64_t>(n));

    for (const auto& h : p.hubs) {
        if (pres::hub_out_degree(p, h) <= bound) continue;
        bool ok;
        if (hub_flags_nonprincipal(p, h) && pres::hub_disjoint_successors(p, h)) {
            // The fresh successors the extension adds at this hub cannot be
            // reached from the old ones when the old successor sets were
            // pairwise almost disjoint; the cluster condition collapses.
            ok = false;
        } else {
            ok = star_star_condition(m, m.index(h));
        }
        if (!ok) return {false, "hub " + h};
    }
    for (const auto& b : p.blocks) {
        auto exc = pres::exceptional_copies(p, b.id);
        std::uint64_t copies = b.multiplicity.is_finite()
                                   ? std::min<std::uint64_t>(b.multiplicity.finite_value(),
                                                             static_cast<std::uint64_t>(k) + exc.size())
                                   : static_cast<std::uint64_t>(k) + exc.size();
        for (std::uint64_t c = 0; c < copies; ++c) {
            bool exceptional = std::binary_search(exc.begin(), exc.end(), c);
            // Uniform copies all look alike; examine the first one only.
            if (!exceptional) {
                bool first_uniform = true;
                for (std::uint64_t c2 = 0; c2 < c; ++c2)
                    if (!std::binary_search(exc.begin(), exc.end(), c2)) first_uniform = false;
                if (!first_uniform) continue;
            }
            for (const auto& q : b.positions) {
                int node = m.index(b.id + "." + std::to_string(c) + "." + q);
                int outdeg = __builtin_popcountll(m.succ(RelKind::R, node));
                if (outdeg <= n) continue;
                if (!star_star_condition(m, node))
                    return {false, "block " + b.id + " copy " + std::to_string(c) + " position " + q};
            }
        }
    }
    return {true, ""};
}

CounterexampleFrame counterexample_frame(const pres::Presentation& p, const std::string& hub, int n,
                                         int k, const FrameValidOptions& opt) {
    if (!p.has_hub(hub)) throw InputError("unknown hub " + hub);
    Card bound = Card::fin(static_cast<std::uint64_t>(n));
    if (!(pres::hub_out_degree(p, hub) > bound && hub_flags_nonprincipal(p, hub) &&
          pres::hub_disjoint_successors(p, hub)))
        throw InputError("the validity criterion does not fail at hub " + hub);

    // Principal part, truncated.
    pres::Presentation base = p;
    std::erase_if(base.blocks, [](const pres::Block& b) { return b.origin == pres::Origin::NonPrincipal; });
    Structure frame = pres::expand(base, pres::expand_k_for(base, k));

    // One bundle of the first non-principal type the hub flags, wired
    // one-way: edges from flagging hubs in, nothing out.
    const pres::Block* target = nullptr;
    for (const auto& b : p.blocks) {
        if (b.origin != pres::Origin::NonPrincipal) continue;
        for (const auto& [h, q] : b.out_flags)
            if (h == hub) { target = &b; break; }
        if (target) break;
    }
    if (!target) throw InputError("hub " + hub + " flags no non-principal block");
    for (const auto& q : target->positions) frame.add_node(target->id + ".u." + q, false);
    for (const auto& [i, j] : target->pattern_edges)
        frame.add_edge(target->id + ".u." + target->positions[i],
                       target->id + ".u." + target->positions[j]);
    for (const auto& [h, q] : target->out_flags) frame.add_edge(h, target->id + ".u." + q);

    int at = frame.index(hub);
    if (__builtin_popcountll(frame.succ(RelKind::R, at)) <= n)
        throw InputError("truncation size " + std::to_string(k) +
                         " gives the hub out-degree <= " + std::to_string(n));

    FormulaPtr f = disj(alt_n(n), phi_formula());
    auto hit = local_refutation(frame, f, at, opt);
    if (!hit) throw Error("internal: no falsifying valuation on the materialized frame");
    if (check(frame, hit->first, at, f)) throw Error("internal: refutation failed verification");
    return {std::move(frame), hit->first, at};
}

// ---------------------------------------------------------------------------
// Bisimulation

bool is_bisimulation(const Model& m1, const Model& m2, const std::set<std::pair<int, int>>& z) {
    std::set<std::string> props;
    for (const auto& [k, v] : m1.valuation) props.insert(k);
    for (const auto& [k, v] : m2.valuation) props.insert(k);
    auto holds = [](const Model& m, const std::string& p, int w) {
        auto it = m.valuation.find(p);
        return it != m.valuation.end() && it->second.contains(w);
    };
    for (const auto& [x, y] : z) {
        for (const auto& p : props)
            if (holds(m1, p, x) != holds(m2, p, y)) return false;
        for (std::uint64_t m = m1.structure.succ(RelKind::R, x); m; m &= m - 1) {
            int x2 = __builtin_ctzll(m);
            bool matched = false;
            for (std::uint64_t mm = m2.structure.succ(RelKind::R, y); mm && !matched; mm &= mm - 1)
                if (z.count({x2, __builtin_ctzll(mm)})) matched = true;
            if (!matched) return false;
        }
        for (std::uint64_t m = m2.structure.succ(RelKind::R, y); m; m &= m - 1) {
            int y2 = __builtin_ctzll(m);
            bool matched = false;
            for (std::uint64_t mm = m1.structure.succ(RelKind::R, x); mm && !matched; mm &= mm - 1)
                if (z.count({__builtin_ctzll(mm), y2})) matched = true;
            if (!matched) return false;
        }
    }
    return true;
}

Bisimulation largest_bisimulation(const Model& m1, const Model& m2) {
    const int n1 = m1.structure.size(), n2 = m2.structure.size();
    std::set<std::string> props;
    for (const auto& [k, v] : m1.valuation) props.insert(k);
    for (const auto& [k, v] : m2.valuation) props.insert(k);
    auto holds = [](const Model& m, const std::string& p, int w) {
        auto it = m.valuation.find(p);
        return it != m.valuation.end() && it->second.contains(w);
    };

    std::vector<std::uint64_t> rel(n1, 0);  // rel[x] = mask of related y
    for (int x = 0; x < n1; ++x)
        for (int y = 0; y < n2; ++y) {
            bool harmony = true;
            for (const auto& p : props)
                if (holds(m1, p, x) != holds(m2, p, y)) { harmony = false; break; }
            if (harmony) rel[x] |= std::uint64_t{1} << y;
        }

    bool changed = true;
    while (changed) {
        changed = false;
        for (int x = 0; x < n1; ++x)
            for (std::uint64_t m = rel[x]; m; m &= m - 1) {
                int y = __builtin_ctzll(m);
                bool ok = true;
                for (std::uint64_t sm = m1.structure.succ(RelKind::R, x); sm && ok; sm &= sm - 1) {
                    int x2 = __builtin_ctzll(sm);
                    if (!(rel[x2] & m2.structure.succ(RelKind::R, y))) ok = false;
                }
                for (std::uint64_t sm = m2.structure.succ(RelKind::R, y); sm && ok; sm &= sm - 1) {
                    int y2 = __builtin_ctzll(sm);
                    bool back = false;
                    for (std::uint64_t xm = m1.structure.succ(RelKind::R, x); xm && !back; xm &= xm - 1)
                        if ((rel[__builtin_ctzll(xm)] >> y2) & 1) back = true;
                    if (!back) ok = false;
                }
                if (!ok) {
                    rel[x] &= ~(std::uint64_t{1} << y);
                    changed = true;
                }
            }
    }
    Bisimulation out;
    for (int x = 0; x < n1; ++x)
        for (std::uint64_t m = rel[x]; m; m &= m - 1) out.pairs.insert({x, __builtin_ctzll(m)});
    return out;
}

}  // namespace uext::modal
