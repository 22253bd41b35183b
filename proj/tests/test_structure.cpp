#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "uext/structure.hpp"

using namespace uext;
using testing::structure_from_code;

namespace {

Structure abc_edges(const std::vector<std::pair<std::string, std::string>>& edges,
                    const std::vector<std::string>& nodes = {"a", "b", "c"}) {
    Structure s;
    for (const auto& n : nodes) s.add_node(n);
    for (const auto& [x, y] : edges) s.add_edge(x, y);
    return s;
}

NodeSet set_of(const Structure& s, const std::vector<std::string>& names) {
    NodeSet out(s.size());
    for (const auto& n : names) out.insert(s.index(n));
    return out;
}

}  // namespace

TEST_CASE("image on the empty relation is empty") {
    Structure s = abc_edges({});
    CHECK(image(s, RelKind::R, set_of(s, {"a", "b"})).empty());
    CHECK(image(s, RelKind::R, s.full_set()).empty());
}

TEST_CASE("image under the identity relation fixes sets") {
    Structure s = abc_edges({{"a", "a"}, {"b", "b"}, {"c", "c"}});
    CHECK(image(s, RelKind::R, set_of(s, {"a", "b"})) == set_of(s, {"a", "b"}));
}

TEST_CASE("image collects one-step successors") {
    Structure s = abc_edges({{"a", "b"}, {"a", "c"}, {"b", "c"}});
    CHECK(image(s, RelKind::R, set_of(s, {"a"})) == set_of(s, {"b", "c"}));
}

TEST_CASE("preimage on the empty relation is empty") {
    Structure s = abc_edges({});
    CHECK(preimage(s, RelKind::R, s.full_set()).empty());
}

TEST_CASE("preimage collects one-step predecessors") {
    Structure s = abc_edges({{"a", "b"}, {"a", "c"}, {"b", "c"}});
    CHECK(preimage(s, RelKind::R, set_of(s, {"c"})) == set_of(s, {"a", "b"}));
}

TEST_CASE("preimage equals image of the converse") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Structure s = testing::random_structure(rng, 6);
        Structure rev;
        for (int v = 0; v < s.size(); ++v) rev.add_node(s.name(v));
        for (const auto& [a, b] : s.edges()) rev.add_edge(b, a);
        std::uint64_t full = (std::uint64_t{1} << s.size()) - 1;
        NodeSet x = NodeSet::from_mask(rng() & full, s.size());
        CHECK(preimage(s, RelKind::R, x).mask() == image(rev, RelKind::R, x).mask());
    }
}

TEST_CASE("image and preimage are monotone and distribute over unions") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        Structure s = testing::random_structure(rng, 6);
        std::uint64_t full = (std::uint64_t{1} << s.size()) - 1;
        NodeSet x = NodeSet::from_mask(rng() & full, s.size());
        NodeSet y = NodeSet::from_mask(rng() & full, s.size());
        NodeSet xy = x | y;
        CHECK((image(s, RelKind::R, x) | image(s, RelKind::R, y)) == image(s, RelKind::R, xy));
        CHECK((preimage(s, RelKind::R, x) | preimage(s, RelKind::R, y)) == preimage(s, RelKind::R, xy));
        NodeSet sub = x & y;  // subset of x
        CHECK((image(s, RelKind::R, sub) & image(s, RelKind::R, x)) == image(s, RelKind::R, sub));
    }
}

TEST_CASE("image rejects foreign node sets") {
    Structure s = abc_edges({});
    CHECK_THROWS_AS(image(s, RelKind::R, NodeSet(2)), InputError);
}

TEST_CASE("decompose with no hubs puts everything into the bounded part") {
    Structure s = abc_edges({{"a", "b"}, {"b", "c"}});
    auto [sp, pp] = decompose(s);
    CHECK(pp.empty());
    CHECK(sp.size() == 2);
}

TEST_CASE("decompose splits on hub incidence") {
    Structure s;
    s.add_node("h", true);
    s.add_node("a");
    s.add_node("b");
    s.add_edge("h", "a");
    s.add_edge("a", "b");
    auto [sp, pp] = decompose(s);
    REQUIRE(pp.size() == 1);
    CHECK(pp[0] == std::make_pair(s.index("h"), s.index("a")));
    REQUIRE(sp.size() == 1);
    CHECK(sp[0] == std::make_pair(s.index("a"), s.index("b")));
}

TEST_CASE("decompose with all nodes hubs empties the bounded part") {
    Structure s;
    s.add_node("a", true);
    s.add_node("b", true);
    s.add_edge("a", "b");
    auto [sp, pp] = decompose(s);
    CHECK(sp.empty());
    CHECK(pp.size() == 1);
}

TEST_CASE("decompose is a partition of the edges") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        Structure s = testing::random_structure(rng, 6, true);
        auto [sp, pp] = decompose(s);
        CHECK(sp.size() + pp.size() == s.edges().size());
        std::set<std::pair<int, int>> all(sp.begin(), sp.end());
        all.insert(pp.begin(), pp.end());
        CHECK(all == s.edges());
        for (const auto& e : sp) CHECK(pp.end() == std::find(pp.begin(), pp.end(), e));
    }
}

TEST_CASE("max_degrees") {
    CHECK(max_degrees(abc_edges({}), RelKind::R) == std::make_pair(0, 0));
    Structure full = abc_edges({{"a", "a"}, {"a", "b"}, {"a", "c"}, {"b", "a"}, {"b", "b"},
                                {"b", "c"}, {"c", "a"}, {"c", "b"}, {"c", "c"}});
    CHECK(max_degrees(full, RelKind::R) == std::make_pair(3, 3));
    CHECK(max_degrees(abc_edges({{"a", "b"}, {"b", "c"}}), RelKind::R) == std::make_pair(1, 1));
}

TEST_CASE("find_road on equal endpoints has length zero") {
    Structure s = abc_edges({});
    auto r = find_road(s, RelKind::R, s.index("a"), s.index("a"), 5);
    REQUIRE(r.has_value());
    CHECK(r->length() == 0);
    CHECK(r->nodes == std::vector<int>{s.index("a")});
}

TEST_CASE("find_road records backward steps") {
    Structure s = abc_edges({{"a", "b"}}, {"a", "b"});
    auto r = find_road(s, RelKind::R, s.index("b"), s.index("a"), 5);
    REQUIRE(r.has_value());
    CHECK(r->length() == 1);
    CHECK_FALSE(r->forward[0]);
    CHECK(road_replays(s, RelKind::R, *r));
}

TEST_CASE("find_road reports unreachable pairs") {
    Structure s = abc_edges({{"a", "b"}});
    CHECK_FALSE(find_road(s, RelKind::R, s.index("a"), s.index("c"), 5).has_value());
}

TEST_CASE("find_road honours the length cap") {
    Structure s = abc_edges({{"a", "b"}, {"b", "c"}});
    CHECK_FALSE(find_road(s, RelKind::R, s.index("a"), s.index("c"), 1).has_value());
    CHECK(find_road(s, RelKind::R, s.index("a"), s.index("c"), 2).has_value());
}

TEST_CASE("roads replay and reverse") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 300; ++i) {
        Structure s = testing::random_structure(rng, 6);
        int from = static_cast<int>(rng() % s.size());
        int to = static_cast<int>(rng() % s.size());
        auto r = find_road(s, RelKind::R, from, to, 6);
        auto back = find_road(s, RelKind::R, to, from, 6);
        CHECK(r.has_value() == back.has_value());
        if (!r) continue;
        CHECK(road_replays(s, RelKind::R, *r));
        CHECK(r->length() == back->length());
        Road reversed;
        reversed.nodes.assign(r->nodes.rbegin(), r->nodes.rend());
        for (int step = r->length() - 1; step >= 0; --step)
            reversed.forward.push_back(!r->forward[step]);
        CHECK(road_replays(s, RelKind::R, reversed));
    }
}

TEST_CASE("frame files round-trip through the printer") {
    std::string text = testing::slurp(testing::data_path("tiny.frame"));
    Structure s = Structure::parse_frame(text);
    std::string printed = s.print_frame();
    CHECK(Structure::parse_frame(printed).print_frame() == printed);
    CHECK(s.size() == 3);
    CHECK(s.edges().size() == 3);
}

TEST_CASE("frame parser reports positioned errors") {
    CHECK_THROWS_WITH_AS(Structure::parse_frame("node a\nedge a b\n"),
                         "line 2: unknown node: b", ParseError);
    CHECK_THROWS_AS(Structure::parse_frame("node a\nnode a\n"), ParseError);
    CHECK_THROWS_AS(Structure::parse_frame("nodes a\n"), ParseError);
    CHECK_THROWS_AS(Structure::parse_frame("node a b\n"), ParseError);
}

TEST_CASE("hub lines declare and mark in one step") {
    Structure s = Structure::parse_frame("hub h\nnode a\nedge h a\n");
    CHECK(s.is_hub(s.index("h")));
    CHECK_FALSE(s.is_hub(s.index("a")));
    auto consts = s.constants();
    REQUIRE(consts.size() == 1);
    CHECK(consts.count("d_h") == 1);
}

TEST_CASE("structures cap at the word size") {
    Structure s;
    for (int i = 0; i < kMaxNodes; ++i) s.add_node("n" + std::to_string(i));
    CHECK_THROWS_AS(s.add_node("overflow"), LimitError);
}
