#include "uext/structure.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace uext {

int Structure::add_node(const std::string& name, bool hub) {
    if (name.empty()) throw InputError("empty node name");
    if (index_.count(name)) throw InputError("duplicate node name: " + name);
    if (size() >= kMaxNodes) throw LimitError("structure exceeds " + std::to_string(kMaxNodes) + " nodes");
    int v = size();
    names_.push_back(name);
    index_[name] = v;
    if (hub) hub_mask_ |= std::uint64_t{1} << v;
    return v;
}

void Structure::add_edge(int a, int b) {
    if (a < 0 || a >= size() || b < 0 || b >= size()) throw InputError("edge endpoint out of range");
    edges_.insert({a, b});
    succ_[a] |= std::uint64_t{1} << b;
    pred_[b] |= std::uint64_t{1} << a;
}

void Structure::add_edge(const std::string& a, const std::string& b) {
    add_edge(index(a), index(b));
}

int Structure::index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError("unknown node: " + name);
    return it->second;
}

std::uint64_t Structure::succ(RelKind q, int v) const {
    switch (q) {
        case RelKind::R: return succ_[v];
        case RelKind::S: return is_hub(v) ? 0 : succ_[v] & ~hub_mask_;
        case RelKind::P: return is_hub(v) ? succ_[v] : succ_[v] & hub_mask_;
    }
    return 0;
}

std::uint64_t Structure::pred(RelKind q, int v) const {
    switch (q) {
        case RelKind::R: return pred_[v];
        case RelKind::S: return is_hub(v) ? 0 : pred_[v] & ~hub_mask_;
        case RelKind::P: return is_hub(v) ? pred_[v] : pred_[v] & hub_mask_;
    }
    return 0;
}

std::map<std::string, int> Structure::constants() const {
    std::map<std::string, int> out;
    for (int v = 0; v < size(); ++v)
        if (is_hub(v)) out["d_" + names_[v]] = v;
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::string clean = line.substr(0, line.find('#'));
    std::istringstream ss(clean);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

}  // namespace

Structure Structure::parse_frame(const std::string& text) {
    Structure s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::pair<std::string, std::string>> pending_edges;
    std::vector<int> edge_lines;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        try {
            if (toks[0] == "node" && toks.size() == 2) {
                s.add_node(toks[1], false);
            } else if (toks[0] == "hub" && toks.size() == 2) {
                s.add_node(toks[1], true);
            } else if (toks[0] == "edge" && toks.size() == 3) {
                if (!s.has_node(toks[1])) throw InputError("unknown node: " + toks[1]);
                if (!s.has_node(toks[2])) throw InputError("unknown node: " + toks[2]);
                s.add_edge(toks[1], toks[2]);
            } else {
                throw InputError("unrecognized directive: " + toks[0]);
            }
        } catch (const InputError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return s;
}

std::string Structure::print_frame() const {
    std::ostringstream out;
    for (int v = 0; v < size(); ++v)
        out << (is_hub(v) ? "hub " : "node ") << names_[v] << "\n";
    for (const auto& [a, b] : edges_)
        out << "edge " << names_[a] << " " << names_[b] << "\n";
    return out.str();
}

NodeSet image(const Structure& a, RelKind q, const NodeSet& x) {
    if (x.universe() != a.size()) throw InputError("node set universe mismatch");
    std::uint64_t out = 0;
    for (int v : x.elements()) out |= a.succ(q, v);
    return NodeSet::from_mask(out, a.size());
}

NodeSet preimage(const Structure& a, RelKind q, const NodeSet& x) {
    if (x.universe() != a.size()) throw InputError("node set universe mismatch");
    std::uint64_t out = 0;
    for (int v : x.elements()) out |= a.pred(q, v);
    return NodeSet::from_mask(out, a.size());
}

std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>
decompose(const Structure& a) {
    std::vector<std::pair<int, int>> s_part, p_part;
    for (const auto& e : a.edges()) {
        if (a.is_hub(e.first) || a.is_hub(e.second)) p_part.push_back(e);
        else s_part.push_back(e);
    }
    return {s_part, p_part};
}

std::pair<int, int> max_degrees(const Structure& a, RelKind q) {
    int out = 0, in = 0;
    for (int v = 0; v < a.size(); ++v) {
        out = std::max(out, __builtin_popcountll(a.succ(q, v)));
        in = std::max(in, __builtin_popcountll(a.pred(q, v)));
    }
    return {out, in};
}

std::optional<Road> find_road(const Structure& a, RelKind q, int s, int t, int max_len) {
    if (s < 0 || s >= a.size() || t < 0 || t >= a.size()) throw InputError("road endpoint out of range");

    // Nodes in lexicographic name order; used for deterministic tie-breaks.
    std::vector<int> by_name(a.size());
    for (int i = 0; i < a.size(); ++i) by_name[i] = i;
    std::sort(by_name.begin(), by_name.end(),
              [&](int x, int y) { return a.name(x) < a.name(y); });

    std::vector<int> dist(a.size(), -1), parent(a.size(), -1);
    dist[s] = 0;
    std::queue<int> bfs;
    bfs.push(s);
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        if (dist[u] >= max_len) continue;
        std::uint64_t adj = a.succ(q, u) | a.pred(q, u);
        for (int v : by_name) {
            if (!((adj >> v) & 1) || dist[v] >= 0) continue;
            dist[v] = dist[u] + 1;
            parent[v] = u;
            bfs.push(v);
        }
    }
    if (dist[t] < 0) return std::nullopt;

    // Rebuild the path choosing, at each level, the name-least predecessor.
    std::vector<int> rev{t};
    while (rev.back() != s) {
        int v = rev.back();
        int best = -1;
        for (int u : by_name) {
            if (dist[u] != dist[v] - 1) continue;
            std::uint64_t adj = a.succ(q, u) | a.pred(q, u);
            if ((adj >> v) & 1) { best = u; break; }
        }
        rev.push_back(best);
    }
    Road r;
    r.nodes.assign(rev.rbegin(), rev.rend());
    for (size_t i = 0; i + 1 < r.nodes.size(); ++i)
        r.forward.push_back(a.edge(q, r.nodes[i], r.nodes[i + 1]));
    return r;
}

bool road_replays(const Structure& a, RelKind q, const Road& r) {
    if (r.nodes.size() != r.forward.size() + 1) return false;
    for (size_t i = 0; i < r.forward.size(); ++i) {
        int u = r.nodes[i], v = r.nodes[i + 1];
        if (r.forward[i] ? !a.edge(q, u, v) : !a.edge(q, v, u)) return false;
    }
    return true;
}

}  // namespace uext
