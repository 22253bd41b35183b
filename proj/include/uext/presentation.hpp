#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uext/card.hpp"
#include "uext/neighborhood.hpp"
#include "uext/structure.hpp"

namespace uext::pres {

enum class Origin { Principal, NonPrincipal };

/// A repeated finite pattern: every copy carries the pattern's edges
/// internally plus, per flag, an edge to or from a hub. Non-principal
/// blocks only appear in extension presentations; their "copies" are the
/// bundles of new points the extension adds per pattern type.
struct Block {
    std::string id;
    std::vector<std::string> positions;
    std::set<std::pair<int, int>> pattern_edges;  // position indices
    Card multiplicity;                            // Fin(n), Aleph0 or PowerContinuum
    std::set<std::pair<std::string, std::string>> out_flags;  // (hub, pos): edge hub -> pos
    std::set<std::pair<std::string, std::string>> in_flags;   // (pos, hub): edge pos -> hub
    Origin origin = Origin::Principal;

    int pos_index(const std::string& name) const;
    bool has_position(const std::string& name) const;
};

/// One per-copy flag override. add=false removes a uniform flag from that
/// copy, add=true grants an extra one.
struct Exception {
    std::string block_id;
    std::uint64_t copy_index = 0;
    bool add = true;
    bool out = true;  // out: (hub,pos); in: (pos,hub)
    std::string hub, pos;

    auto key() const { return std::make_tuple(block_id, copy_index, add, out, hub, pos); }
};

/// Finite description of a countable almost-bounded structure: finitely
/// many hubs (the infinite-degree nodes), edges among them, repeated
/// pattern blocks, and finitely many per-copy exceptions.
struct Presentation {
    std::vector<std::string> hubs;
    std::set<std::pair<std::string, std::string>> hub_edges;
    std::vector<Block> blocks;
    std::vector<Exception> exceptions;

    bool has_hub(const std::string& name) const;
    const Block* find_block(const std::string& id) const;
    bool has_nonprincipal() const;
};

Presentation parse_presentation(const std::string& text);

/// Canonical order: hubs and hub edges sorted, blocks by id, block lines
/// sorted within; parse then print is the identity on canonical files.
std::string print_presentation(const Presentation& p);

struct ValidationReport {
    std::vector<std::string> violations;
    bool pass() const { return violations.empty(); }
    std::string summary() const;
};

/// Structural validity plus the degree law: every hub must genuinely have
/// infinite degree (some unbounded block flags it), and nothing else may.
ValidationReport validate(const Presentation& p);

/// Finite truncation: hubs, hub edges, and per block min(multiplicity,
/// k + #exceptional-copies) copies; exceptional copies keep their declared
/// indices and are listed first, uniform copies fill the remaining indices.
/// Copy nodes are named <block>.<copy>.<position>.
Structure expand(const Presentation& p, int k);

/// Least k' >= k such that expand(p, k') hosts every exceptional copy.
int expand_k_for(const Presentation& p, int k);

/// The ultrafilter extension as a presentation: the input verbatim, plus,
/// per isomorphism type of its unbounded blocks (pattern + uniform flags,
/// exceptions ignored), one fresh non-principal block of that type with
/// multiplicity 2^2^aleph0. Types already mirrored by a non-principal
/// block are not added again, so re-extending is stable.
Presentation extend(const Presentation& p);

/// Reflexive point counts per origin: a point is reflexive iff its pattern
/// position loops, or it is a hub with a self edge.
std::vector<std::pair<Origin, Card>> count_reflexive(const Presentation& p);

/// How many points of the extension have their component neighborhood
/// P-isomorphic to nb: 2^2^aleph0 as soon as an unbounded block type
/// matches, otherwise the exact finite count of matching copies.
Card count_neighborhood_type(const Presentation& p, const nbhd::Neighborhood& nb);

/// Isomorphism type of (pattern, uniform flags); the grouping key used by
/// extend, exposed for tests.
std::string block_type_digest(const Block& b);

/// Component type of one position of a block under the given effective
/// flags, as a rooted digest.
std::string position_type_digest(const Block& b, int pos,
                                 const std::set<std::pair<std::string, std::string>>& out_flags,
                                 const std::set<std::pair<std::string, std::string>>& in_flags);

/// Effective (out, in) flags of one copy: uniform flags with the copy's
/// exceptions applied (drops first, then adds).
std::pair<std::set<std::pair<std::string, std::string>>, std::set<std::pair<std::string, std::string>>>
effective_flags(const Presentation& p, const Block& b, std::uint64_t copy);

/// Exceptional copy indices of a block, ascending.
std::vector<std::uint64_t> exceptional_copies(const Presentation& p, const std::string& block_id);

/// Out-degree of a hub in the presented structure (hub successors, flagged
/// copies at block multiplicity, exception corrections).
Card hub_out_degree(const Presentation& p, const std::string& hub);

/// True iff two hubs both out-flag some position of one unbounded block —
/// exactly when their successor sets share infinitely many elements.
bool hubs_share_unbounded_class(const Presentation& p, const std::string& h1, const std::string& h2);

/// The almost-disjointness property at hub w: R[w] cap R[v] is finite for
/// every successor v of w. From the flag tables: w has no self edge and
/// shares no unbounded out-class with any successor hub.
bool hub_disjoint_successors(const Presentation& p, const std::string& hub);

}  // namespace uext::pres
