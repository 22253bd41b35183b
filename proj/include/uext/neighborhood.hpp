#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uext/fo.hpp"
#include "uext/structure.hpp"

namespace uext::nbhd {

enum class Dir { Out, In };

/// Per-node record of adjacency toward hubs: (Out, h) means an edge from
/// the node to hub h, (In, h) an edge from h to the node.
using Annotation = std::set<std::pair<Dir, std::string>>;

/// A rooted finite digraph of Q-edges with per-node hub annotations — the
/// radius-n ball around a node under Q and Q^{-1}. hub_identity records
/// which nodes are themselves hubs; it is ignored by isomorphism checks
/// and digests but consulted when emitting describing formulas.
struct Neighborhood {
    std::vector<std::string> node_names;  // local index -> source name
    int root = 0;
    std::set<std::pair<int, int>> s_edges;  // local indices
    std::vector<Annotation> annotations;    // one per local node
    std::vector<std::string> hub_identity;  // hub name, or "" for non-hubs
    int radius = 0;

    int size() const { return static_cast<int>(node_names.size()); }
};

/// Ball of radius n around w under q (walked in both directions), with
/// induced q-edges and hub annotations read off the full structure.
Neighborhood extract(const Structure& a, RelKind q, int w, int n);

/// The whole connected component of w under q; radius is set to the
/// root's eccentricity. Stands in for the radius-omega neighborhood.
Neighborhood extract_component(const Structure& a, RelKind q, int w);

/// Root-preserving edge isomorphism (annotations ignored); the mapping
/// sends local indices of nb1 to local indices of nb2.
std::optional<std::vector<int>> iso(const Neighborhood& nb1, const Neighborhood& nb2);

/// Root-preserving isomorphism that also preserves every hub annotation.
/// Independent backtracking search; the digest path is cross-checked
/// against this in the tests.
bool p_iso(const Neighborhood& nb1, const Neighborhood& nb2);

/// Annotated digraph (optionally rooted) in the shape canonicalization
/// works on. Root -1 means unrooted.
struct AnnGraph {
    int n = 0;
    std::set<std::pair<int, int>> edges;
    std::vector<Annotation> ann;
    int root = -1;
};

/// Canonical digest via colour refinement with full individualization
/// backtracking on ties. Equal digests iff the graphs are isomorphic
/// preserving annotations (and the root, when rooted).
std::string canonical_digest(const AnnGraph& g);

struct CanonicalForm {
    std::vector<int> order;  // canonical position -> local index
    std::string digest;
};

/// Canonical form of a neighborhood; digests are equal iff p_iso holds.
CanonicalForm canonical_form(const Neighborhood& nb);

/// {w : the radius-n S-ball around w is P-isomorphic to nb}.
NodeSet matching_set(const Structure& a, const Neighborhood& nb, int n);

/// The formula stating that two points are joined by a road of exactly n
/// steps through pairwise distinct nodes; free variables y0 and yn.
fo::FormulaPtr emit_psi(int n);

/// emit_psi with the endpoints instantiated and bound variables drawn from
/// fresh_prefix1..; used to assemble closure clauses.
fo::FormulaPtr emit_psi_between(int n, const fo::Term& from, const fo::Term& to,
                                const std::string& fresh_prefix);

struct ChiOptions {
    int max_nodes = 16;
};

/// One-free-variable description of a neighborhood: existentially posits
/// the non-root members, pins every positive and negative edge among them,
/// their adjacency toward each hub constant, pairwise distinctness,
/// distinctness from the hub constants (skipped for members that are that
/// very hub), and closes off: everything road-reachable from the root in
/// at most `bound` steps is one of the members. hub_names supplies the
/// full constant vocabulary of the target structure.
fo::FormulaPtr emit_chi(const Neighborhood& nb, int bound, const std::vector<std::string>& hub_names,
                        const ChiOptions& opt = {});

}  // namespace uext::nbhd
