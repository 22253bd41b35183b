#include "uext/ultrafilter.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uext::uf {

Ultrafilter Ultrafilter::principal(const Structure& a, int w) {
    if (w < 0 || w >= a.size()) throw InputError("generator out of range");
    return {w, a.size()};
}

Ultrafilter Ultrafilter::principal(const Structure& a, const std::string& name) {
    return principal(a, a.index(name));
}

bool Ultrafilter::contains(const NodeSet& x) const {
    if (x.universe() != universe) throw InputError("universe mismatch");
    return x.contains(generator);
}

std::vector<NodeSet> family(const Structure& a, const Ultrafilter& u, const UfOptions& opt) {
    if (u.universe != a.size()) throw InputError("universe mismatch");
    if (a.size() > opt.max_universe)
        throw LimitError("universe of " + std::to_string(a.size()) + " nodes exceeds enumeration cap " +
                         std::to_string(opt.max_universe));
    std::vector<NodeSet> out;
    std::uint64_t full = a.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.size()) - 1;
    for (std::uint64_t x = 0; x <= full; ++x) {
        if ((x >> u.generator) & 1) out.push_back(NodeSet::from_mask(x, a.size()));
        if (x == full) break;
    }
    return out;
}

namespace {

/// Both subset-enumeration characterizations of the extension relation:
/// (every member of v has its preimage in u) and (every member of u has
/// its image in v). Returns the shared verdict, throwing if they differ.
bool ue_related_definitional(const Structure& a, RelKind q, int gu, int gv, const UfOptions& opt) {
    if (a.size() > opt.max_universe)
        throw LimitError("universe of " + std::to_string(a.size()) + " nodes exceeds enumeration cap " +
                         std::to_string(opt.max_universe));
    const int n = a.size();
    const std::uint64_t full = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;

    bool preimage_ok = true;  // {<Q>(X) : X in v} subset of u
    for (std::uint64_t x = 0; x <= full && preimage_ok; ++x) {
        if (!((x >> gv) & 1)) {
            if (x == full) break;
            continue;
        }
        // gu must see X through one forward step: succ(gu) meets X.
        if (!(a.succ(q, gu) & x)) preimage_ok = false;
        if (x == full) break;
    }
    bool image_ok = true;  // {Q[X] : X in u} subset of v
    for (std::uint64_t x = 0; x <= full && image_ok; ++x) {
        if (!((x >> gu) & 1)) {
            if (x == full) break;
            continue;
        }
        if (!(a.pred(q, gv) & x)) image_ok = false;
        if (x == full) break;
    }
    if (preimage_ok != image_ok)
        throw Error("internal: the two extension-relation characterizations disagree");
    return preimage_ok;
}

}  // namespace

bool ue_related(const Structure& a, RelKind q, const Ultrafilter& u, const Ultrafilter& v,
                const UfOptions& opt) {
    if (u.universe != a.size() || v.universe != a.size()) throw InputError("universe mismatch");
    return ue_related_definitional(a, q, u.generator, v.generator, opt);
}

bool ue_related(const Structure& a, const Ultrafilter& u, const Ultrafilter& v, const UfOptions& opt) {
    return ue_related(a, RelKind::R, u, v, opt);
}

bool tilde_related(const Structure& a, const Ultrafilter& u, const Ultrafilter& v, const UfOptions& opt) {
    if (u.universe != a.size() || v.universe != a.size()) throw InputError("universe mismatch");
    (void)opt;
    // {x : {y : R(x,y)} in v} in u, evaluated literally.
    NodeSet b(a.size());
    for (int x = 0; x < a.size(); ++x) {
        NodeSet succ_x = NodeSet::from_mask(a.succ(RelKind::R, x), a.size());
        if (v.contains(succ_x)) b.insert(x);
    }
    return u.contains(b);
}

UeExtensionResult ue_extension_finite(const Structure& a, const UfOptions& opt) {
    UeExtensionResult res;
    for (int v = 0; v < a.size(); ++v) res.extension.add_node("pi_" + a.name(v), a.is_hub(v));
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j)
            if (ue_related_definitional(a, RelKind::R, i, j, opt)) res.extension.add_edge(i, j);
    for (int v = 0; v < a.size(); ++v) res.witness[a.name(v)] = "pi_" + a.name(v);
    res.isomorphic = true;
    for (int i = 0; i < a.size() && res.isomorphic; ++i)
        for (int j = 0; j < a.size() && res.isomorphic; ++j)
            if (a.edge(i, j) != res.extension.edge(i, j)) res.isomorphic = false;
    return res;
}

std::vector<NodeSet> distinguishing_sets(const Structure& a, const std::vector<Ultrafilter>& us) {
    for (const auto& u : us)
        if (u.universe != a.size()) throw InputError("universe mismatch");
    for (size_t i = 0; i < us.size(); ++i)
        for (size_t j = i + 1; j < us.size(); ++j)
            if (us[i] == us[j]) throw InputError("duplicate ultrafilters have no distinguishing sets");
    if (us.size() == 1) return {a.full_set()};
    std::vector<NodeSet> out;
    for (const auto& u : us) {
        NodeSet d(a.size());
        d.insert(u.generator);
        out.push_back(d);
    }
    return out;
}

NodeSet ultrafilter_road_delta(const Structure& a, RelKind q, const NodeSet& x,
                               const std::vector<Ultrafilter>& road, const std::vector<bool>& forward,
                               const std::vector<NodeSet>& dsets, const UfOptions& opt) {
    if (road.empty()) throw InputError("empty road");
    if (forward.size() + 1 != road.size()) throw InputError("road shape mismatch");
    if (dsets.size() != road.size()) throw InputError("one distinguishing set per road point required");
    if (!road.front().contains(x)) throw InputError("base set does not belong to the initial ultrafilter");
    for (size_t i = 0; i < road.size(); ++i)
        for (size_t j = 0; j < road.size(); ++j) {
            bool want = i == j;
            if (road[i].contains(dsets[j]) != want)
                throw InputError("sets do not distinguish the road's ultrafilters");
        }
    // The sequence must actually be a road of the extension relation.
    for (size_t i = 0; i + 1 < road.size(); ++i) {
        bool rel = forward[i] ? ue_related(a, q, road[i], road[i + 1], opt)
                              : ue_related(a, q, road[i + 1], road[i], opt);
        if (!rel) throw InputError("step " + std::to_string(i) + " is not an extension-relation step");
    }
    NodeSet cur = x;
    for (size_t i = 0; i + 1 < road.size(); ++i) {
        NodeSet moved = forward[i] ? image(a, q, cur) : preimage(a, q, cur);
        cur = moved & dsets[i + 1];
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Symbolic points

SymbolicUltrafilter SymbolicUltrafilter::at_hub(std::string h) {
    SymbolicUltrafilter s;
    s.kind = Kind::Hub;
    s.hub = std::move(h);
    return s;
}

SymbolicUltrafilter SymbolicUltrafilter::at_copy(std::string block, std::uint64_t copy, std::string pos) {
    SymbolicUltrafilter s;
    s.kind = Kind::Copy;
    s.block = std::move(block);
    s.copy = copy;
    s.pos = std::move(pos);
    return s;
}

SymbolicUltrafilter SymbolicUltrafilter::non_principal(std::string block, std::string pos,
                                                       std::uint64_t bundle) {
    SymbolicUltrafilter s;
    s.kind = Kind::NonPrincipal;
    s.block = std::move(block);
    s.pos = std::move(pos);
    s.bundle = bundle;
    return s;
}

std::string SymbolicUltrafilter::to_string() const {
    switch (kind) {
        case Kind::Hub: return "pi(" + hub + ")";
        case Kind::Copy: return "pi(" + block + "." + std::to_string(copy) + "." + pos + ")";
        case Kind::NonPrincipal:
            return "u(" + block + ":" + pos + "#" + std::to_string(bundle) + ")";
    }
    return "?";
}

namespace {

const pres::Block& resolve_block(const pres::Presentation& p, const SymbolicUltrafilter& s) {
    const pres::Block* b = p.find_block(s.block);
    if (!b) throw InputError("unknown block " + s.block);
    if (!b->has_position(s.pos)) throw InputError("unknown position " + s.pos + " in block " + s.block);
    if (s.kind == SymbolicUltrafilter::Kind::NonPrincipal) {
        if (b->origin != pres::Origin::NonPrincipal)
            throw InputError("non-principal point over principal block " + s.block);
    } else {
        if (b->origin == pres::Origin::NonPrincipal)
            throw InputError("copies of non-principal blocks are not principal elements");
        if (b->multiplicity.is_finite() && s.copy >= b->multiplicity.finite_value())
            throw InputError("copy index out of range for block " + s.block);
    }
    return *b;
}

}  // namespace

bool symbolic_ue_related(const pres::Presentation& p, const SymbolicUltrafilter& su,
                         const SymbolicUltrafilter& sv) {
    using K = SymbolicUltrafilter::Kind;
    if (su.kind == K::Hub && !p.has_hub(su.hub)) throw InputError("unknown hub " + su.hub);
    if (sv.kind == K::Hub && !p.has_hub(sv.hub)) throw InputError("unknown hub " + sv.hub);
    const pres::Block* bu = su.kind == K::Hub ? nullptr : &resolve_block(p, su);
    const pres::Block* bv = sv.kind == K::Hub ? nullptr : &resolve_block(p, sv);

    const bool u_np = su.kind == K::NonPrincipal;
    const bool v_np = sv.kind == K::NonPrincipal;

    if (!u_np && !v_np) {
        // Principal pairs follow the presented base relation.
        if (su.kind == K::Hub && sv.kind == K::Hub) return p.hub_edges.count({su.hub, sv.hub}) != 0;
        if (su.kind == K::Hub) {
            auto [out, in] = pres::effective_flags(p, *bv, sv.copy);
            return out.count({su.hub, sv.pos}) != 0;
        }
        if (sv.kind == K::Hub) {
            auto [out, in] = pres::effective_flags(p, *bu, su.copy);
            return in.count({su.pos, sv.hub}) != 0;
        }
        if (su.block != sv.block || su.copy != sv.copy) return false;
        return bu->pattern_edges.count({bu->pos_index(su.pos), bu->pos_index(sv.pos)}) != 0;
    }
    if (!u_np) {
        // Principal to non-principal: only hubs relate, through uniform flags.
        if (su.kind != K::Hub) return false;
        return bv->out_flags.count({su.hub, sv.pos}) != 0;
    }
    if (!v_np) {
        if (sv.kind != K::Hub) return false;
        return bu->in_flags.count({su.pos, sv.hub}) != 0;
    }
    // Non-principal pairs: same block type, same bundle, pattern edge.
    if (su.block != sv.block || su.bundle != sv.bundle) return false;
    return bu->pattern_edges.count({bu->pos_index(su.pos), bu->pos_index(sv.pos)}) != 0;
}

// ---------------------------------------------------------------------------
// Sweep kernels

Structure structure_from_code(int n, std::uint64_t code) {
    Structure s;
    for (int i = 0; i < n; ++i) s.add_node(std::string(1, static_cast<char>('a' + i)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((code >> (i * n + j)) & 1) s.add_edge(i, j);
    return s;
}

namespace {

/// Raw-mask evaluation of both characterizations for one relation code;
/// returns false on any disagreement or mismatch with the base edge.
bool agreement_holds(int n, std::uint64_t code) {
    std::uint64_t succ[8] = {}, pred[8] = {};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((code >> (i * n + j)) & 1) {
                succ[i] |= std::uint64_t{1} << j;
                pred[j] |= std::uint64_t{1} << i;
            }
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (int gu = 0; gu < n; ++gu)
        for (int gv = 0; gv < n; ++gv) {
            bool pre_ok = true, img_ok = true;
            for (std::uint64_t x = 0; x <= full; ++x) {
                if (((x >> gv) & 1) && !(succ[gu] & x)) pre_ok = false;
                if (((x >> gu) & 1) && !(pred[gv] & x)) img_ok = false;
                if (!pre_ok && !img_ok) break;
            }
            bool base = (succ[gu] >> gv) & 1;
            if (pre_ok != img_ok || pre_ok != base) return false;
        }
    return true;
}

bool reflexivity_holds(int n, std::uint64_t code) {
    std::uint64_t succ[8] = {}, pred[8] = {};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((code >> (i * n + j)) & 1) {
                succ[i] |= std::uint64_t{1} << j;
                pred[j] |= std::uint64_t{1} << i;
            }
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (int w = 0; w < n; ++w) {
        bool pre_ok = true, img_ok = true;
        for (std::uint64_t x = 0; x <= full; ++x) {
            if (((x >> w) & 1) && !(succ[w] & x)) pre_ok = false;
            if (((x >> w) & 1) && !(pred[w] & x)) img_ok = false;
            if (!pre_ok && !img_ok) break;
        }
        bool loop = (succ[w] >> w) & 1;  // {v : R(v,v)} belongs to pi_w iff w loops
        if (pre_ok != img_ok || pre_ok != loop) return false;
    }
    return true;
}

template <typename Fn>
SweepResult run_sweep(std::uint64_t begin, std::uint64_t end, int threads, Fn&& holds) {
    SweepResult res;
    res.instances = static_cast<long long>(end - begin);
    long long failures = 0;
    if (threads == 1) {
        for (std::uint64_t c = begin; c < end; ++c)
            if (!holds(c)) ++failures;
    } else {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(static) reduction(+ : failures)
        for (std::int64_t c = static_cast<std::int64_t>(begin); c < static_cast<std::int64_t>(end); ++c)
            if (!holds(static_cast<std::uint64_t>(c))) ++failures;
#else
        for (std::uint64_t c = begin; c < end; ++c)
            if (!holds(c)) ++failures;
#endif
    }
    res.failures = failures;
    return res;
}

}  // namespace

SweepResult ue_agreement_sweep(int n, std::uint64_t begin, std::uint64_t end, int threads) {
    if (n < 0 || n > 7) throw InputError("sweep supports up to 7 nodes");
    return run_sweep(begin, end, threads, [n](std::uint64_t c) { return agreement_holds(n, c); });
}

SweepResult ue_reflexivity_sweep(int n, std::uint64_t begin, std::uint64_t end, int threads) {
    if (n < 0 || n > 7) throw InputError("sweep supports up to 7 nodes");
    return run_sweep(begin, end, threads, [n](std::uint64_t c) { return reflexivity_holds(n, c); });
}

}  // namespace uext::uf
