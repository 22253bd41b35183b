#include "uext/neighborhood.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

namespace uext::nbhd {

namespace {

std::string ann_str(const Annotation& a) {
    std::string out;
    for (const auto& [dir, hub] : a) {
        out += dir == Dir::Out ? "o:" : "i:";
        out += hub;
        out += ",";
    }
    return out;
}

Annotation annotation_of(const Structure& a, int v) {
    Annotation ann;
    for (int h = 0; h < a.size(); ++h) {
        if (!a.is_hub(h)) continue;
        if (a.edge(v, h)) ann.insert({Dir::Out, a.name(h)});
        if (a.edge(h, v)) ann.insert({Dir::In, a.name(h)});
    }
    return ann;
}

Neighborhood ball(const Structure& a, RelKind q, int w, int max_depth, int* eccentricity) {
    if (w < 0 || w >= a.size()) throw InputError("unknown node");
    std::vector<int> dist(a.size(), -1);
    std::vector<int> order;
    dist[w] = 0;
    order.push_back(w);
    std::queue<int> bfs;
    bfs.push(w);
    int ecc = 0;
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        if (max_depth >= 0 && dist[u] >= max_depth) continue;
        std::uint64_t adj = a.succ(q, u) | a.pred(q, u);
        for (std::uint64_t m = adj; m; m &= m - 1) {
            int v = __builtin_ctzll(m);
            if (dist[v] >= 0) continue;
            dist[v] = dist[u] + 1;
            ecc = std::max(ecc, dist[v]);
            order.push_back(v);
            bfs.push(v);
        }
    }
    std::sort(order.begin() + 1, order.end());  // root stays first, rest by id
    Neighborhood nb;
    std::vector<int> local(a.size(), -1);
    for (size_t i = 0; i < order.size(); ++i) {
        local[order[i]] = static_cast<int>(i);
        nb.node_names.push_back(a.name(order[i]));
        nb.annotations.push_back(annotation_of(a, order[i]));
        nb.hub_identity.push_back(a.is_hub(order[i]) ? a.name(order[i]) : "");
    }
    nb.root = 0;
    for (int u : order)
        for (std::uint64_t m = a.succ(q, u); m; m &= m - 1) {
            int v = __builtin_ctzll(m);
            if (local[v] >= 0) nb.s_edges.insert({local[u], local[v]});
        }
    if (eccentricity) *eccentricity = ecc;
    return nb;
}

}  // namespace

Neighborhood extract(const Structure& a, RelKind q, int w, int n) {
    if (n < 0) throw InputError("negative radius");
    Neighborhood nb = ball(a, q, w, n, nullptr);
    nb.radius = n;
    return nb;
}

Neighborhood extract_component(const Structure& a, RelKind q, int w) {
    int ecc = 0;
    Neighborhood nb = ball(a, q, w, -1, &ecc);
    nb.radius = ecc;
    return nb;
}

// ---------------------------------------------------------------------------
// Isomorphism search

namespace {

struct IsoSearch {
    const Neighborhood& n1;
    const Neighborhood& n2;
    bool check_annotations;
    std::vector<int> map12;   // -1 = unassigned
    std::vector<bool> used2;

    bool edges_ok(int a, int fa) const {
        for (int b = 0; b < n1.size(); ++b) {
            int fb = map12[b];
            if (fb < 0) continue;
            if (n1.s_edges.count({a, b}) != n2.s_edges.count({fa, fb})) return false;
            if (n1.s_edges.count({b, a}) != n2.s_edges.count({fb, fa})) return false;
        }
        return true;
    }

    bool assign(int a, int fa) {
        if (used2[fa] || map12[a] >= 0) return false;
        if (check_annotations && n1.annotations[a] != n2.annotations[fa]) return false;
        if (n1.s_edges.count({a, a}) != n2.s_edges.count({fa, fa})) return false;
        map12[a] = fa;
        if (!edges_ok(a, fa)) {
            map12[a] = -1;
            return false;
        }
        used2[fa] = true;
        return true;
    }

    void unassign(int a) {
        used2[map12[a]] = false;
        map12[a] = -1;
    }

    bool extend(int next) {
        if (next == n1.size()) return true;
        if (map12[next] >= 0) return extend(next + 1);
        for (int fa = 0; fa < n2.size(); ++fa) {
            if (!assign(next, fa)) continue;
            if (extend(next + 1)) return true;
            unassign(next);
        }
        return false;
    }

    std::optional<std::vector<int>> run() {
        if (n1.size() != n2.size()) return std::nullopt;
        map12.assign(n1.size(), -1);
        used2.assign(n2.size(), false);
        if (!assign(n1.root, n2.root)) return std::nullopt;
        if (!extend(0)) return std::nullopt;
        return map12;
    }
};

}  // namespace

std::optional<std::vector<int>> iso(const Neighborhood& nb1, const Neighborhood& nb2) {
    IsoSearch s{nb1, nb2, false, {}, {}};
    return s.run();
}

bool p_iso(const Neighborhood& nb1, const Neighborhood& nb2) {
    IsoSearch s{nb1, nb2, true, {}, {}};
    return s.run().has_value();
}

// ---------------------------------------------------------------------------
// Canonical labeling: colour refinement with individualization backtracking.

namespace {

struct Canonizer {
    const AnnGraph& g;
    std::vector<std::vector<int>> out_adj, in_adj;

    explicit Canonizer(const AnnGraph& gr) : g(gr), out_adj(gr.n), in_adj(gr.n) {
        for (const auto& [a, b] : g.edges) {
            out_adj[a].push_back(b);
            in_adj[b].push_back(a);
        }
    }

    // Re-rank arbitrary per-node keys into dense colours.
    static std::vector<int> rank(const std::vector<std::string>& keys) {
        std::vector<std::string> sorted = keys;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<int> colors(keys.size());
        for (size_t i = 0; i < keys.size(); ++i)
            colors[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
                                         sorted.begin());
        return colors;
    }

    std::vector<int> refine(std::vector<int> colors) const {
        while (true) {
            std::vector<std::string> keys(g.n);
            for (int v = 0; v < g.n; ++v) {
                std::vector<int> outs, ins;
                for (int u : out_adj[v]) outs.push_back(colors[u]);
                for (int u : in_adj[v]) ins.push_back(colors[u]);
                std::sort(outs.begin(), outs.end());
                std::sort(ins.begin(), ins.end());
                std::string k = std::to_string(colors[v]) + "|";
                for (int c : outs) k += std::to_string(c) + ",";
                k += "|";
                for (int c : ins) k += std::to_string(c) + ",";
                keys[v] = k;
            }
            std::vector<int> next = rank(keys);
            if (next == colors) return colors;
            colors = next;
        }
    }

    std::string digest_for(const std::vector<int>& order) const {
        std::vector<int> pos(g.n);
        for (int i = 0; i < g.n; ++i) pos[order[i]] = i;
        std::ostringstream out;
        out << "nb1;n=" << g.n << ";r=" << (g.root >= 0 ? pos[g.root] : -1) << ";a=";
        for (int i = 0; i < g.n; ++i) out << ann_str(g.ann[order[i]]) << ";";
        out << "e=";
        std::vector<std::pair<int, int>> es;
        for (const auto& [a, b] : g.edges) es.push_back({pos[a], pos[b]});
        std::sort(es.begin(), es.end());
        for (const auto& [a, b] : es) out << a << ">" << b << ";";
        return out.str();
    }

    // Smallest colour class with more than one member; -1 if discrete.
    int split_class(const std::vector<int>& colors) const {
        std::map<int, int> count;
        for (int c : colors) ++count[c];
        for (const auto& [c, k] : count)
            if (k > 1) return c;
        return -1;
    }

    std::pair<std::string, std::vector<int>> canonical(std::vector<int> colors) const {
        colors = refine(std::move(colors));
        int cls = split_class(colors);
        if (cls < 0) {
            std::vector<int> order(g.n);
            for (int v = 0; v < g.n; ++v) order[colors[v]] = v;
            return {digest_for(order), order};
        }
        std::pair<std::string, std::vector<int>> best;
        for (int v = 0; v < g.n; ++v) {
            if (colors[v] != cls) continue;
            // Individualize v: give it a fresh colour just below its class.
            std::vector<int> next(g.n);
            for (int u = 0; u < g.n; ++u) next[u] = 2 * colors[u] + 1;
            next[v] = 2 * colors[v];
            auto d = canonical(std::move(next));
            if (best.first.empty() || d.first < best.first) best = std::move(d);
        }
        return best;
    }

    std::pair<std::string, std::vector<int>> run() const {
        std::vector<std::string> keys(g.n);
        for (int v = 0; v < g.n; ++v)
            keys[v] = (v == g.root ? "R|" : "N|") + ann_str(g.ann[v]);
        return canonical(rank(keys));
    }
};

}  // namespace

std::string canonical_digest(const AnnGraph& g) {
    if (g.n == 0) return "nb1;n=0;r=-1;a=e=";
    return Canonizer(g).run().first;
}

CanonicalForm canonical_form(const Neighborhood& nb) {
    AnnGraph g{nb.size(), nb.s_edges, nb.annotations, nb.root};
    if (g.n == 0) return {{}, "nb1;n=0;r=-1;a=e="};
    auto [digest, order] = Canonizer(g).run();
    return {order, digest};
}

NodeSet matching_set(const Structure& a, const Neighborhood& nb, int n) {
    std::string target = canonical_form(nb).digest;
    NodeSet out(a.size());
    for (int w = 0; w < a.size(); ++w) {
        Neighborhood cand = extract(a, RelKind::S, w, n);
        if (canonical_form(cand).digest == target) out.insert(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Formula emission

namespace {

fo::FormulaPtr s_atom(const fo::Term& a, const fo::Term& b) { return fo::rel(RelKind::S, a, b); }

}  // namespace

fo::FormulaPtr emit_psi_between(int n, const fo::Term& from, const fo::Term& to,
                                const std::string& fresh_prefix) {
    if (n < 0) throw InputError("negative road length");
    if (n == 0) return fo::eq(from, to);
    std::vector<fo::Term> ys{from};
    for (int i = 1; i < n; ++i) ys.push_back(fo::Term::var(fresh_prefix + std::to_string(i)));
    ys.push_back(to);
    std::vector<fo::FormulaPtr> parts;
    for (size_t i = 0; i < ys.size(); ++i)
        for (size_t j = i + 1; j < ys.size(); ++j) parts.push_back(fo::neg(fo::eq(ys[i], ys[j])));
    for (int i = 0; i < n; ++i)
        parts.push_back(fo::disj(s_atom(ys[i], ys[i + 1]), s_atom(ys[i + 1], ys[i])));
    fo::FormulaPtr body = fo::conj_all(parts);
    for (int i = n - 1; i >= 1; --i)
        body = fo::exists(fresh_prefix + std::to_string(i), body);
    return body;
}

fo::FormulaPtr emit_psi(int n) {
    return emit_psi_between(n, fo::Term::var("y0"), fo::Term::var("yn"), "y");
}

fo::FormulaPtr emit_chi(const Neighborhood& nb, int bound, const std::vector<std::string>& hub_names,
                        const ChiOptions& opt) {
    if (nb.size() > opt.max_nodes)
        throw LimitError("neighborhood of " + std::to_string(nb.size()) +
                         " nodes exceeds the formula-size cap " + std::to_string(opt.max_nodes));
    int k = nb.size();
    // Variable for each member; the root gets the free variable x.
    std::vector<fo::Term> xs;
    int fresh = 1;
    for (int i = 0; i < k; ++i) {
        if (i == nb.root) xs.push_back(fo::Term::var("x"));
        else xs.push_back(fo::Term::var("x" + std::to_string(fresh++)));
    }

    std::vector<fo::FormulaPtr> sigma;
    // Positive and negative pattern atoms over all ordered pairs.
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            fo::FormulaPtr atom = s_atom(xs[i], xs[j]);
            sigma.push_back(nb.s_edges.count({i, j}) ? atom : fo::neg(atom));
        }
    // Adjacency toward every hub constant, both directions.
    for (int i = 0; i < k; ++i)
        for (const std::string& h : hub_names) {
            fo::Term d = fo::Term::constant("d_" + h);
            fo::FormulaPtr in_atom = fo::rel(RelKind::P, d, xs[i]);
            fo::FormulaPtr out_atom = fo::rel(RelKind::P, xs[i], d);
            sigma.push_back(nb.annotations[i].count({Dir::In, h}) ? in_atom : fo::neg(in_atom));
            sigma.push_back(nb.annotations[i].count({Dir::Out, h}) ? out_atom : fo::neg(out_atom));
        }
    // Distinctness from the constants; a member that is that very hub is
    // exempt (its variable denotes the constant itself).
    for (int i = 0; i < k; ++i)
        for (const std::string& h : hub_names) {
            if (nb.hub_identity[i] == h) continue;
            sigma.push_back(fo::neg(fo::eq(fo::Term::constant("d_" + h), xs[i])));
        }
    // Pairwise distinct members.
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) sigma.push_back(fo::neg(fo::eq(xs[i], xs[j])));
    // Closure: anything road-reachable from the root within the bound is a member.
    {
        fo::Term y = fo::Term::var("y");
        std::vector<fo::FormulaPtr> roads;
        for (int m = 0; m <= bound; ++m)
            roads.push_back(emit_psi_between(m, xs[nb.root], y, "z"));
        std::vector<fo::FormulaPtr> hits;
        for (int i = 0; i < k; ++i) hits.push_back(fo::eq(y, xs[i]));
        sigma.push_back(fo::forall("y", fo::implies(fo::disj_all(roads), fo::disj_all(hits))));
    }

    fo::FormulaPtr body = fo::conj_all(sigma);
    for (int i = k - 1; i >= 0; --i) {
        if (i == nb.root) continue;
        body = fo::exists(xs[i].name, body);
    }
    return body;
}

}  // namespace uext::nbhd
