#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uext/presentation.hpp"
#include "uext/structure.hpp"

namespace uext::modal {

/// Modal formulas over a single diamond. Box is kept as its own node so
/// printing preserves the form a formula was written in.
struct Formula {
    enum class Kind { Var, True, False, Not, And, Or, Implies, Diamond, Box };

    Kind kind;
    std::string name;  // Var
    FormulaPtr a, b;
};

FormulaPtr var(std::string name);
FormulaPtr tru();
FormulaPtr fls();
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr diamond(FormulaPtr f);
FormulaPtr box(FormulaPtr f);

std::set<std::string> vars(const FormulaPtr& f);
int modal_depth(const FormulaPtr& f);
std::string to_string(const FormulaPtr& f);

/// Grammar: variables [a-z][a-z0-9_]*, `true false ~ & | -> <> []`,
/// parentheses; unary operators bind tightest, then &, then |, then ->
/// (right-associative).
FormulaPtr parse_modal(const std::string& text);

/// Set of nodes satisfying f in (a, val) — the workhorse behind check and
/// frame validity. All variables of f must be bound by the valuation.
std::uint64_t eval_mask(const Structure& a, const Valuation& val, const FormulaPtr& f);

/// Kripke truth at a single node.
bool check(const Structure& a, const Valuation& val, int w, const FormulaPtr& f);

/// Variables of f in name order — the slot order valuation codes use.
std::vector<std::string> sorted_vars(const FormulaPtr& f);

/// Decodes a packed valuation: bit i*|A|+j of the code puts node j into
/// the i-th variable's set.
Valuation valuation_from_code(const std::vector<std::string>& vars, const Structure& a,
                              std::uint64_t code);

struct FrameValidOptions {
    int max_val_bits = 24;  // cap on |A| * #vars
    int threads = 1;        // 1 = serial reference; 0 = all hardware threads
};

struct Verdict {
    enum class Kind { Valid, Counterexample, Overflow } kind;
    Valuation valuation;  // Counterexample only
    int node = -1;        // Counterexample only
    bool valid() const { return kind == Kind::Valid; }
};

/// Frame validity by exhaustive valuation enumeration over the variables
/// occurring in f. Counterexamples are reported at the least valuation
/// code (variables in name order, node bits little-endian) and least node.
Verdict frame_valid(const Structure& a, const FormulaPtr& f, const FrameValidOptions& opt = {});

/// Nodes where f holds under every valuation of its variables.
/// Throws LimitError when the valuation cap is exceeded.
std::uint64_t locally_valid_mask(const Structure& a, const FormulaPtr& f,
                                 const FrameValidOptions& opt = {});

/// Least valuation code (if any) falsifying f at the given node.
std::optional<std::pair<Valuation, std::uint64_t>> local_refutation(
    const Structure& a, const FormulaPtr& f, int w, const FrameValidOptions& opt = {});

/// Box p0 | Box(p0 -> p1) | ... | Box(p0 & .. & p_{n-1} -> p_n); corresponds
/// locally to out-degree <= n.
FormulaPtr alt_n(int n);

/// (p & ~q & [](p & q -> [](p & q)) & <>(p & q)) -> [](p & q); corresponds
/// locally to the successor-cluster condition star_star_condition.
FormulaPtr phi_formula();

/// Successor-cluster connectivity at w: every ordered pair of successors is
/// joined by a forward path whose intermediate nodes stay inside R[w] or
/// are w itself. (Allowing w as an intermediate is what makes the condition
/// match the local validity of phi_formula on every frame; see the tests.)
bool star_condition(const Structure& a, int w);

/// star_condition plus: w irreflexive, or |R[w]| <= 1, or some successor
/// v != w with edges both ways between w and v.
bool star_star_condition(const Structure& a, int w);

using NodeCondition = std::function<bool(const Structure&, int)>;

struct CorrespondenceOptions {
    int exhaustive_max_nodes = 4;
    int sampled_max_nodes = 0;     // 0 = no sampling stage
    long long samples = 0;
    std::uint64_t seed = 1;
    int max_val_bits = 24;
    int threads = 1;
    int max_violations = 16;  // stop collecting past this many
};

struct CorrespondenceViolation {
    std::string frame;  // frame file text
    std::string node;
    bool formula_locally_valid;
    bool condition_holds;
};

struct CorrespondenceReport {
    long long frames_checked = 0;
    long long violations_total = 0;
    bool overflow = false;
    std::vector<CorrespondenceViolation> violations;
    bool pass() const { return violations_total == 0 && !overflow; }
};

/// Checks [for all valuations: f true at w] <=> condition(w) at every node
/// of every frame up to the exhaustive bound, plus optional sampled larger
/// frames. Violations are reported, never asserted away.
CorrespondenceReport correspondence_test(const FormulaPtr& f, const NodeCondition& condition,
                                         const CorrespondenceOptions& opt = {});

// --- family membership and the validity criterion ------------------------

struct FamilyKReport {
    bool almost_bounded = false;
    std::vector<std::string> cluster_failures;  // hubs where star_star fails
    std::optional<std::string> witness_hub;     // hub with disjoint successor sets
    std::vector<std::string> notes;
    bool pass() const { return almost_bounded && cluster_failures.empty() && witness_hub.has_value(); }
};

/// Membership test for the family of presentations whose modal theory
/// separates from their extension's: the presented structure is almost
/// bounded, every infinite-out-degree node satisfies star_star, and some
/// infinite-out-degree hub has successor sets R[w] cap R[v] finite for all
/// successors v (decided from the flag tables).
FamilyKReport family_k_check(const pres::Presentation& p);

struct CriterionOptions {
    int expand_k = 2;
    int max_val_bits = 24;
    int threads = 1;
};

struct CriterionVerdict {
    bool valid = true;
    std::string witness;  // failing point, empty when valid
};

/// Pointwise validity of alt_n(n) | phi_formula() over the presented
/// structure: every point must have out-degree <= n or satisfy star_star.
/// Finite-degree points are decided on a truncation; a hub of an extension
/// presentation with a non-principal successor fails exactly when its
/// base-part successor sets were pairwise almost disjoint (the new
/// successor is then unreachable from the old ones).
CriterionVerdict criterion_validity(const pres::Presentation& p, int n,
                                    const CriterionOptions& opt = {});

struct CounterexampleFrame {
    Structure frame;
    Valuation valuation;
    int node = -1;
};

/// Materializes a finite countermodel for alt_n(n) | phi_formula() at the
/// given hub of an extension presentation: the principal part truncated to
/// k copies per block, plus one bundle of the first non-principal block the
/// hub flags, wired one-way (edges from flagging hubs into the bundle).
/// The falsifying valuation is found by brute force and verified by check.
CounterexampleFrame counterexample_frame(const pres::Presentation& p, const std::string& hub,
                                         int n, int k, const FrameValidOptions& opt = {});

// --- bisimulation ---------------------------------------------------------

struct Model {
    Structure structure;
    Valuation valuation;
};

struct Bisimulation {
    std::set<std::pair<int, int>> pairs;
    bool contains(int x, int y) const { return pairs.count({x, y}) != 0; }
    bool empty() const { return pairs.empty(); }
};

/// True iff z satisfies atomic harmony plus forth and back between the models.
bool is_bisimulation(const Model& m1, const Model& m2, const std::set<std::pair<int, int>>& z);

/// Greatest bisimulation between two finite models, by fixpoint shrinking
/// from the atomic-harmony relation; empty if none.
Bisimulation largest_bisimulation(const Model& m1, const Model& m2);

}  // namespace uext::modal
