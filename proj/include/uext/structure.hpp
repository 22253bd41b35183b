#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "uext/error.hpp"

namespace uext {

/// Node count cap. All set machinery runs on single-word bitmasks.
inline constexpr int kMaxNodes = 64;

/// Which relation of a structure an operation walks. R is the full edge
/// relation; S and P are the parts of the hub decomposition: P holds the
/// edges touching a hub, S the rest.
enum class RelKind { R, S, P };

/// Subset of one structure's nodes, as a bitmask tied to a universe size.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(int universe) : universe_(universe) {}
    static NodeSet from_mask(std::uint64_t bits, int universe) {
        NodeSet s(universe);
        s.bits_ = universe >= 64 ? bits : (bits & ((std::uint64_t{1} << universe) - 1));
        return s;
    }

    int universe() const { return universe_; }
    std::uint64_t mask() const { return bits_; }
    bool contains(int v) const { return (bits_ >> v) & 1; }
    void insert(int v) { bits_ |= std::uint64_t{1} << v; }
    void erase(int v) { bits_ &= ~(std::uint64_t{1} << v); }
    int count() const { return __builtin_popcountll(bits_); }
    bool empty() const { return bits_ == 0; }

    std::vector<int> elements() const {
        std::vector<int> out;
        for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(__builtin_ctzll(b));
        return out;
    }

    friend NodeSet operator|(NodeSet a, const NodeSet& b) { a.bits_ |= b.bits_; return a; }
    friend NodeSet operator&(NodeSet a, const NodeSet& b) { a.bits_ &= b.bits_; return a; }
    friend NodeSet operator-(NodeSet a, const NodeSet& b) { a.bits_ &= ~b.bits_; return a; }
    friend bool operator==(const NodeSet& a, const NodeSet& b) {
        return a.universe_ == b.universe_ && a.bits_ == b.bits_;
    }
    friend bool operator<(const NodeSet& a, const NodeSet& b) { return a.bits_ < b.bits_; }

private:
    std::uint64_t bits_ = 0;
    int universe_ = 0;
};

/// Assignment of node sets to propositional variables.
using Valuation = std::map<std::string, NodeSet>;

/// A road from s to t: a node sequence together with, per step, which
/// direction of the relation the step uses (forward: Q(w_i, w_{i+1}),
/// backward: Q(w_{i+1}, w_i)).
struct Road {
    std::vector<int> nodes;      // w_0 .. w_n
    std::vector<bool> forward;   // size n

    int length() const { return static_cast<int>(forward.size()); }
};

/// A finite directed graph over named nodes with an optional hub subset.
/// Hubs stand in for the infinite-degree nodes of a presented structure;
/// each hub h carries a constant named d_<h>.
class Structure {
public:
    int add_node(const std::string& name, bool hub = false);
    void add_edge(int a, int b);
    void add_edge(const std::string& a, const std::string& b);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int v) const { return names_.at(v); }
    bool has_node(const std::string& name) const { return index_.count(name) != 0; }
    int index(const std::string& name) const;
    bool is_hub(int v) const { return (hub_mask_ >> v) & 1; }
    std::uint64_t hub_mask() const { return hub_mask_; }
    NodeSet hubs() const { return NodeSet::from_mask(hub_mask_, size()); }
    NodeSet full_set() const {
        return NodeSet::from_mask(size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << size()) - 1, size());
    }

    const std::set<std::pair<int, int>>& edges() const { return edges_; }
    bool edge(int a, int b) const { return (succ_[a] >> b) & 1; }
    bool edge(RelKind q, int a, int b) const { return (succ(q, a) >> b) & 1; }

    /// Successor / predecessor masks under the chosen relation.
    std::uint64_t succ(RelKind q, int v) const;
    std::uint64_t pred(RelKind q, int v) const;

    /// Constants d_<hub>, one per hub.
    std::map<std::string, int> constants() const;

    static Structure parse_frame(const std::string& text);
    std::string print_frame() const;

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::set<std::pair<int, int>> edges_;
    std::uint64_t hub_mask_ = 0;
    std::uint64_t succ_[kMaxNodes] = {};
    std::uint64_t pred_[kMaxNodes] = {};
};

/// Q[X]: everything reachable from X by one forward Q-step.
NodeSet image(const Structure& a, RelKind q, const NodeSet& x);
/// <Q>(X): everything that reaches X by one forward Q-step.
NodeSet preimage(const Structure& a, RelKind q, const NodeSet& x);

/// The hub decomposition of the edge set: P = edges with an endpoint in
/// hubs, S = the rest. Always a partition of the edges.
std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>
decompose(const Structure& a);

/// Exact (max out-degree, max in-degree) under the chosen relation.
std::pair<int, int> max_degrees(const Structure& a, RelKind q);

/// Shortest road from s to t walking Q in either direction, of length at
/// most max_len. Ties are broken toward lexicographically smaller node
/// names; steps that exist in both directions record the forward one.
std::optional<Road> find_road(const Structure& a, RelKind q, int s, int t, int max_len);

/// True iff every flagged step of the road is an edge of Q.
bool road_replays(const Structure& a, RelKind q, const Road& r);

}  // namespace uext
