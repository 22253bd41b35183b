#include "uext/presentation.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

namespace uext::pres {

int Block::pos_index(const std::string& name) const {
    for (size_t i = 0; i < positions.size(); ++i)
        if (positions[i] == name) return static_cast<int>(i);
    throw InputError("unknown position " + name + " in block " + id);
}

bool Block::has_position(const std::string& name) const {
    return std::find(positions.begin(), positions.end(), name) != positions.end();
}

bool Presentation::has_hub(const std::string& name) const {
    return std::find(hubs.begin(), hubs.end(), name) != hubs.end();
}

const Block* Presentation::find_block(const std::string& id) const {
    for (const auto& b : blocks)
        if (b.id == id) return &b;
    return nullptr;
}

bool Presentation::has_nonprincipal() const {
    for (const auto& b : blocks)
        if (b.origin == Origin::NonPrincipal) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::string clean = line.substr(0, line.find('#'));
    std::istringstream ss(clean);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

Card parse_mult(const std::string& tok, int lineno) {
    if (tok == "omega") return Card::aleph0();
    if (tok == "powcont") return Card::power_continuum();
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError(lineno, "bad multiplicity: " + tok);
    return Card::fin(std::stoull(tok));
}

std::string mult_token(const Card& c) {
    if (c == Card::aleph0()) return "omega";
    if (c == Card::power_continuum()) return "powcont";
    return std::to_string(c.finite_value());
}

}  // namespace

Presentation parse_presentation(const std::string& text) {
    Presentation p;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Block* open = nullptr;
    // Hub references are resolved after the whole file is read.
    std::vector<std::pair<int, std::string>> hub_refs;
    std::vector<std::pair<int, std::string>> block_refs;

    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        bool indented = line[0] == ' ' || line[0] == '\t';

        if (indented) {
            if (!open) throw ParseError(lineno, "indented line outside a block");
            Block& b = *open;
            if (toks[0] == "pnode" && toks.size() == 2) {
                if (b.has_position(toks[1]))
                    throw ParseError(lineno, "duplicate position " + toks[1]);
                b.positions.push_back(toks[1]);
            } else if (toks[0] == "pedge" && toks.size() == 3) {
                if (!b.has_position(toks[1])) throw ParseError(lineno, "unknown position " + toks[1]);
                if (!b.has_position(toks[2])) throw ParseError(lineno, "unknown position " + toks[2]);
                b.pattern_edges.insert({b.pos_index(toks[1]), b.pos_index(toks[2])});
            } else if (toks[0] == "pflag" && toks.size() == 4 && toks[1] == "out") {
                if (!b.has_position(toks[3])) throw ParseError(lineno, "unknown position " + toks[3]);
                hub_refs.emplace_back(lineno, toks[2]);
                b.out_flags.insert({toks[2], toks[3]});
            } else if (toks[0] == "pflag" && toks.size() == 4 && toks[1] == "in") {
                if (!b.has_position(toks[2])) throw ParseError(lineno, "unknown position " + toks[2]);
                hub_refs.emplace_back(lineno, toks[3]);
                b.in_flags.insert({toks[2], toks[3]});
            } else if (toks[0] == "origin" && toks.size() == 2 &&
                       (toks[1] == "nonprincipal" || toks[1] == "principal")) {
                b.origin = toks[1] == "nonprincipal" ? Origin::NonPrincipal : Origin::Principal;
            } else {
                throw ParseError(lineno, "unrecognized block directive: " + toks[0]);
            }
            continue;
        }

        open = nullptr;
        if (toks[0] == "hub" && toks.size() == 2) {
            if (p.has_hub(toks[1])) throw ParseError(lineno, "duplicate hub " + toks[1]);
            p.hubs.push_back(toks[1]);
        } else if (toks[0] == "hubedge" && toks.size() == 3) {
            hub_refs.emplace_back(lineno, toks[1]);
            hub_refs.emplace_back(lineno, toks[2]);
            p.hub_edges.insert({toks[1], toks[2]});
        } else if (toks[0] == "block" && toks.size() == 4 && toks[1] != "mult" && toks[2] == "mult") {
            if (p.find_block(toks[1])) throw ParseError(lineno, "duplicate block " + toks[1]);
            Block b;
            b.id = toks[1];
            b.multiplicity = parse_mult(toks[3], lineno);
            p.blocks.push_back(std::move(b));
            open = &p.blocks.back();
        } else if (toks[0] == "exception" && toks.size() == 7) {
            Exception e;
            e.block_id = toks[1];
            block_refs.emplace_back(lineno, toks[1]);
            for (char c : toks[2])
                if (!std::isdigit(static_cast<unsigned char>(c)))
                    throw ParseError(lineno, "bad copy index: " + toks[2]);
            e.copy_index = std::stoull(toks[2]);
            if (toks[3] == "add") e.add = true;
            else if (toks[3] == "drop") e.add = false;
            else throw ParseError(lineno, "expected add or drop, got " + toks[3]);
            if (toks[4] == "out") {
                e.out = true;
                e.hub = toks[5];
                e.pos = toks[6];
            } else if (toks[4] == "in") {
                e.out = false;
                e.pos = toks[5];
                e.hub = toks[6];
            } else {
                throw ParseError(lineno, "expected out or in, got " + toks[4]);
            }
            hub_refs.emplace_back(lineno, e.hub);
            p.exceptions.push_back(std::move(e));
        } else {
            throw ParseError(lineno, "unrecognized directive: " + toks[0]);
        }
    }

    for (const auto& [ln, h] : hub_refs)
        if (!p.has_hub(h)) throw ParseError(ln, "unknown hub " + h);
    for (const auto& [ln, id] : block_refs)
        if (!p.find_block(id)) throw ParseError(ln, "unknown block " + id);
    for (const auto& e : p.exceptions) {
        const Block* b = p.find_block(e.block_id);
        if (!b->has_position(e.pos))
            throw ParseError("exception references unknown position " + e.pos + " of block " + e.block_id);
    }
    return p;
}

std::string print_presentation(const Presentation& p) {
    std::ostringstream out;
    std::vector<std::string> hubs = p.hubs;
    std::sort(hubs.begin(), hubs.end());
    for (const auto& h : hubs) out << "hub " << h << "\n";
    for (const auto& [a, b] : p.hub_edges) out << "hubedge " << a << " " << b << "\n";

    std::vector<const Block*> blocks;
    for (const auto& b : p.blocks) blocks.push_back(&b);
    std::sort(blocks.begin(), blocks.end(),
              [](const Block* a, const Block* b) { return a->id < b->id; });
    for (const Block* b : blocks) {
        out << "block " << b->id << " mult " << mult_token(b->multiplicity) << "\n";
        std::vector<std::string> poss = b->positions;
        std::sort(poss.begin(), poss.end());
        for (const auto& q : poss) out << "  pnode " << q << "\n";
        std::set<std::pair<std::string, std::string>> edges;
        for (const auto& [i, j] : b->pattern_edges) edges.insert({b->positions[i], b->positions[j]});
        for (const auto& [i, j] : edges) out << "  pedge " << i << " " << j << "\n";
        for (const auto& [h, q] : b->out_flags) out << "  pflag out " << h << " " << q << "\n";
        for (const auto& [q, h] : b->in_flags) out << "  pflag in " << q << " " << h << "\n";
        if (b->origin == Origin::NonPrincipal) out << "  origin nonprincipal\n";
    }

    std::vector<Exception> exs = p.exceptions;
    std::sort(exs.begin(), exs.end(), [](const Exception& a, const Exception& b) { return a.key() < b.key(); });
    for (const auto& e : exs) {
        out << "exception " << e.block_id << " " << e.copy_index << " " << (e.add ? "add" : "drop");
        if (e.out) out << " out " << e.hub << " " << e.pos << "\n";
        else out << " in " << e.pos << " " << e.hub << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate(const Presentation& p) {
    ValidationReport rep;
    auto violation = [&](const std::string& msg) { rep.violations.push_back(msg); };

    std::set<std::string> ids;
    for (const auto& b : p.blocks) {
        if (!ids.insert(b.id).second) violation("duplicate block id " + b.id);
        std::set<std::string> poss(b.positions.begin(), b.positions.end());
        if (poss.size() != b.positions.size()) violation("duplicate position in block " + b.id);
        if (b.multiplicity == Card::continuum())
            violation("block " + b.id + " has unsupported multiplicity");
        if (b.multiplicity == Card::power_continuum() && b.origin != Origin::NonPrincipal)
            violation("block " + b.id + " has multiplicity powcont but principal origin");
        if (b.origin == Origin::NonPrincipal && b.multiplicity != Card::power_continuum())
            violation("non-principal block " + b.id + " must have multiplicity powcont");
        for (const auto& [h, q] : b.out_flags) {
            if (!p.has_hub(h)) violation("block " + b.id + " out-flag references unknown hub " + h);
            if (!b.has_position(q)) violation("block " + b.id + " out-flag references unknown position " + q);
        }
        for (const auto& [q, h] : b.in_flags) {
            if (!p.has_hub(h)) violation("block " + b.id + " in-flag references unknown hub " + h);
            if (!b.has_position(q)) violation("block " + b.id + " in-flag references unknown position " + q);
        }
    }
    for (const auto& [a, b] : p.hub_edges) {
        if (!p.has_hub(a)) violation("hub edge references unknown hub " + a);
        if (!p.has_hub(b)) violation("hub edge references unknown hub " + b);
    }
    std::set<decltype(std::declval<Exception>().key())> seen;
    for (const auto& e : p.exceptions) {
        const Block* b = p.find_block(e.block_id);
        if (!b) {
            violation("exception references unknown block " + e.block_id);
            continue;
        }
        if (b->origin == Origin::NonPrincipal)
            violation("exception on non-principal block " + e.block_id);
        if (!p.has_hub(e.hub)) violation("exception references unknown hub " + e.hub);
        if (!b->has_position(e.pos)) violation("exception references unknown position " + e.pos);
        if (b->multiplicity.is_finite() && e.copy_index >= b->multiplicity.finite_value())
            violation("exception copy index " + std::to_string(e.copy_index) + " exceeds multiplicity of " +
                      e.block_id);
        if (!seen.insert(e.key()).second) violation("duplicate exception record on " + e.block_id);
        Exception twin = e;
        twin.add = !twin.add;
        if (seen.count(twin.key()))
            violation("conflicting add and drop on one flag of " + e.block_id + " copy " +
                      std::to_string(e.copy_index));
    }
    // Degree law: every hub must be flagged by some unbounded block.
    for (const auto& h : p.hubs) {
        bool infinite = false;
        for (const auto& b : p.blocks) {
            if (b.multiplicity.is_finite()) continue;
            for (const auto& [fh, q] : b.out_flags)
                if (fh == h) infinite = true;
            for (const auto& [q, fh] : b.in_flags)
                if (fh == h) infinite = true;
        }
        if (!infinite) violation("hub " + h + " has finite degree");
    }
    return rep;
}

std::string ValidationReport::summary() const {
    if (pass()) return "PASS";
    std::string out = "FAIL";
    for (const auto& v : violations) out += "\n  " + v;
    return out;
}

// ---------------------------------------------------------------------------
// Expansion

std::vector<std::uint64_t> exceptional_copies(const Presentation& p, const std::string& block_id) {
    std::set<std::uint64_t> idx;
    for (const auto& e : p.exceptions)
        if (e.block_id == block_id) idx.insert(e.copy_index);
    return {idx.begin(), idx.end()};
}

std::pair<std::set<std::pair<std::string, std::string>>, std::set<std::pair<std::string, std::string>>>
effective_flags(const Presentation& p, const Block& b, std::uint64_t copy) {
    auto out = b.out_flags;
    auto in = b.in_flags;
    for (const auto& e : p.exceptions) {
        if (e.block_id != b.id || e.copy_index != copy || e.add) continue;
        if (e.out) out.erase({e.hub, e.pos});
        else in.erase({e.pos, e.hub});
    }
    for (const auto& e : p.exceptions) {
        if (e.block_id != b.id || e.copy_index != copy || !e.add) continue;
        if (e.out) out.insert({e.hub, e.pos});
        else in.insert({e.pos, e.hub});
    }
    return {out, in};
}

namespace {

/// Copy count of a block in a k-truncation.
std::uint64_t copies_in_truncation(const Presentation& p, const Block& b, int k) {
    std::uint64_t budget = static_cast<std::uint64_t>(k) + exceptional_copies(p, b.id).size();
    if (b.multiplicity.is_finite()) return std::min(b.multiplicity.finite_value(), budget);
    return budget;
}

std::string copy_node_name(const Block& b, std::uint64_t copy, const std::string& pos) {
    return b.id + "." + std::to_string(copy) + "." + pos;
}

}  // namespace

int expand_k_for(const Presentation& p, int k) {
    int need = k;
    for (const auto& b : p.blocks) {
        auto exc = exceptional_copies(p, b.id);
        if (exc.empty()) continue;
        // Want max index < k' + #exceptions.
        std::uint64_t max_idx = exc.back();
        std::int64_t k_min = static_cast<std::int64_t>(max_idx) + 1 - static_cast<std::int64_t>(exc.size());
        need = std::max<int>(need, static_cast<int>(std::max<std::int64_t>(0, k_min)));
    }
    return need;
}

Structure expand(const Presentation& p, int k) {
    if (k < 0) throw InputError("negative truncation size");
    Structure s;
    for (const auto& h : p.hubs) s.add_node(h, true);
    for (const auto& [a, b] : p.hub_edges) s.add_edge(a, b);

    for (const auto& b : p.blocks) {
        std::uint64_t m = copies_in_truncation(p, b, k);
        auto exc = exceptional_copies(p, b.id);
        for (std::uint64_t c : exc)
            if (c >= m)
                throw InputError("truncation size " + std::to_string(k) + " too small to host exception copy " +
                                 std::to_string(c) + " of block " + b.id);
        // Exceptional copies first, then uniform copies on the free indices.
        std::vector<std::uint64_t> order = exc;
        for (std::uint64_t c = 0; c < m; ++c)
            if (!std::binary_search(exc.begin(), exc.end(), c)) order.push_back(c);

        for (std::uint64_t c : order)
            for (const auto& q : b.positions) s.add_node(copy_node_name(b, c, q), false);
        for (std::uint64_t c : order) {
            for (const auto& [i, j] : b.pattern_edges)
                s.add_edge(copy_node_name(b, c, b.positions[i]), copy_node_name(b, c, b.positions[j]));
            auto [out, in] = effective_flags(p, b, c);
            for (const auto& [h, q] : out) s.add_edge(h, copy_node_name(b, c, q));
            for (const auto& [q, h] : in) s.add_edge(copy_node_name(b, c, q), h);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Typing and extension

namespace {

nbhd::Annotation position_annotation(const std::set<std::pair<std::string, std::string>>& out_flags,
                                     const std::set<std::pair<std::string, std::string>>& in_flags,
                                     const std::string& pos) {
    nbhd::Annotation ann;
    for (const auto& [h, q] : out_flags)
        if (q == pos) ann.insert({nbhd::Dir::In, h});  // edge hub -> pos
    for (const auto& [q, h] : in_flags)
        if (q == pos) ann.insert({nbhd::Dir::Out, h});  // edge pos -> hub
    return ann;
}

}  // namespace

std::string block_type_digest(const Block& b) {
    nbhd::AnnGraph g;
    g.n = static_cast<int>(b.positions.size());
    g.edges = b.pattern_edges;
    g.root = -1;
    for (const auto& q : b.positions) g.ann.push_back(position_annotation(b.out_flags, b.in_flags, q));
    return nbhd::canonical_digest(g);
}

std::string position_type_digest(const Block& b, int pos,
                                 const std::set<std::pair<std::string, std::string>>& out_flags,
                                 const std::set<std::pair<std::string, std::string>>& in_flags) {
    // Connected component of the position inside the pattern.
    int n = static_cast<int>(b.positions.size());
    std::vector<int> local(n, -1);
    std::vector<int> order{pos};
    local[pos] = 0;
    std::queue<int> bfs;
    bfs.push(pos);
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (const auto& [i, j] : b.pattern_edges) {
            int other = -1;
            if (i == u) other = j;
            else if (j == u) other = i;
            else continue;
            if (local[other] >= 0) continue;
            local[other] = static_cast<int>(order.size());
            order.push_back(other);
            bfs.push(other);
        }
    }
    nbhd::AnnGraph g;
    g.n = static_cast<int>(order.size());
    g.root = 0;
    for (int v : order) g.ann.push_back(position_annotation(out_flags, in_flags, b.positions[v]));
    for (const auto& [i, j] : b.pattern_edges)
        if (local[i] >= 0 && local[j] >= 0) g.edges.insert({local[i], local[j]});
    return nbhd::canonical_digest(g);
}

Presentation extend(const Presentation& p) {
    ValidationReport rep = validate(p);
    if (!rep.pass()) throw InputError("refusing to extend an invalid presentation: " + rep.summary());

    Presentation out = p;
    std::set<std::string> present;  // types already mirrored
    for (const auto& b : p.blocks)
        if (b.origin == Origin::NonPrincipal) present.insert(block_type_digest(b));

    std::set<std::string> used_ids;
    for (const auto& b : p.blocks) used_ids.insert(b.id);

    std::set<std::string> grouped;
    for (const auto& b : p.blocks) {
        if (b.multiplicity != Card::aleph0()) continue;
        std::string type = block_type_digest(b);
        if (present.count(type) || grouped.count(type)) continue;
        grouped.insert(type);
        Block fresh = b;
        fresh.origin = Origin::NonPrincipal;
        fresh.multiplicity = Card::power_continuum();
        std::string id = "ue_" + b.id;
        for (int i = 2; used_ids.count(id); ++i) id = "ue_" + b.id + "_" + std::to_string(i);
        used_ids.insert(id);
        fresh.id = id;
        out.blocks.push_back(std::move(fresh));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic counting

std::vector<std::pair<Origin, Card>> count_reflexive(const Presentation& p) {
    Card principal = Card::fin(0), nonprincipal = Card::fin(0);
    for (const auto& h : p.hubs)
        if (p.hub_edges.count({h, h})) principal += Card::fin(1);
    for (const auto& b : p.blocks) {
        std::uint64_t loops = 0;
        for (size_t i = 0; i < b.positions.size(); ++i)
            if (b.pattern_edges.count({static_cast<int>(i), static_cast<int>(i)})) ++loops;
        Card contribution = b.multiplicity * Card::fin(loops);
        if (b.origin == Origin::Principal) principal += contribution;
        else nonprincipal += contribution;
    }
    return {{Origin::Principal, principal}, {Origin::NonPrincipal, nonprincipal}};
}

Card count_neighborhood_type(const Presentation& p, const nbhd::Neighborhood& nb) {
    Presentation ext = p.has_nonprincipal() ? p : extend(p);
    std::string target = nbhd::canonical_form(nb).digest;
    Card acc = Card::fin(0);

    // Hubs: isolated under the bounded part, annotated by their hub edges.
    for (const auto& h : ext.hubs) {
        nbhd::AnnGraph g;
        g.n = 1;
        g.root = 0;
        nbhd::Annotation ann;
        for (const auto& [a, b] : ext.hub_edges) {
            if (a == h) ann.insert({nbhd::Dir::Out, b});
            if (b == h) ann.insert({nbhd::Dir::In, a});
        }
        g.ann.push_back(ann);
        if (nbhd::canonical_digest(g) == target) acc += Card::fin(1);
    }

    for (const auto& b : ext.blocks) {
        auto exc = exceptional_copies(ext, b.id);
        Card uniform_count = b.multiplicity.is_finite()
                                 ? Card::fin(b.multiplicity.finite_value() - exc.size())
                                 : b.multiplicity;
        for (size_t q = 0; q < b.positions.size(); ++q) {
            if (position_type_digest(b, static_cast<int>(q), b.out_flags, b.in_flags) == target)
                acc += uniform_count;
            for (std::uint64_t c : exc) {
                auto [out, in] = effective_flags(ext, b, c);
                if (position_type_digest(b, static_cast<int>(q), out, in) == target) acc += Card::fin(1);
            }
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Degree bookkeeping on the flag tables

Card hub_out_degree(const Presentation& p, const std::string& hub) {
    if (!p.has_hub(hub)) throw InputError("unknown hub " + hub);
    std::int64_t finite = 0;
    Card infinite = Card::fin(0);
    for (const auto& [a, b] : p.hub_edges)
        if (a == hub) ++finite;
    for (const auto& b : p.blocks)
        for (const auto& [h, q] : b.out_flags) {
            if (h != hub) continue;
            if (b.multiplicity.is_finite())
                finite += static_cast<std::int64_t>(b.multiplicity.finite_value());
            else
                infinite += b.multiplicity;
        }
    for (const auto& e : p.exceptions) {
        if (e.hub != hub || !e.out) continue;
        const Block* b = p.find_block(e.block_id);
        if (!b) continue;
        bool uniform = b->out_flags.count({e.hub, e.pos}) != 0;
        if (e.add && !uniform) ++finite;
        if (!e.add && uniform) --finite;
    }
    if (infinite.is_infinite()) return infinite;
    return Card::fin(static_cast<std::uint64_t>(std::max<std::int64_t>(0, finite)));
}

bool hubs_share_unbounded_class(const Presentation& p, const std::string& h1, const std::string& h2) {
    for (const auto& b : p.blocks) {
        if (b.origin != Origin::Principal || b.multiplicity.is_finite()) continue;
        for (const auto& q : b.positions)
            if (b.out_flags.count({h1, q}) && b.out_flags.count({h2, q})) return true;
    }
    return false;
}

bool hub_disjoint_successors(const Presentation& p, const std::string& hub) {
    if (p.hub_edges.count({hub, hub})) return false;
    for (const auto& [a, t] : p.hub_edges) {
        if (a != hub) continue;
        if (hubs_share_unbounded_class(p, hub, t)) return false;
    }
    return true;
}

}  // namespace uext::pres
