#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "uext/fo.hpp"
#include "uext/modal.hpp"

using namespace uext;
using fo::Term;

TEST_CASE("fo parser accepts sentences and tracks free variables") {
    auto f = fo::parse_fo("exists x. R(x,x)");
    CHECK(fo::free_vars(f).empty());
    CHECK(fo::quantifier_rank(f) == 1);

    auto g = fo::parse_fo("forall y. (S(x,y) -> y = x)");
    CHECK(fo::free_vars(g) == std::set<std::string>{"x"});
}

TEST_CASE("fo parser reports malformed input") {
    CHECK_THROWS_AS(fo::parse_fo("R(x"), ParseError);
    CHECK_THROWS_AS(fo::parse_fo("exists x R(x,x)"), ParseError);
    CHECK_THROWS_AS(fo::parse_fo("R(x,y) R(y,x)"), ParseError);
    CHECK_THROWS_AS(fo::parse_fo("exists d_h. R(d_h,d_h)"), ParseError);
}

TEST_CASE("fo printing round-trips") {
    for (const char* text : {"exists x. R(x,x)", "forall x. (R(x,x) -> exists y. ~(x = y))",
                             "exists x. exists y. (R(x,y) & ~R(y,x) | x = y)"}) {
        auto f = fo::parse_fo(text);
        CHECK(fo::to_string(fo::parse_fo(fo::to_string(f))) == fo::to_string(f));
    }
}

TEST_CASE("existential self-equality holds on nonempty structures") {
    Structure s = testing::structure_from_code(2, 0);
    CHECK(fo::eval(s, fo::parse_fo("exists x. x = x")));
}

TEST_CASE("the reflexive-below-irreflexive sentence holds on its witness frame") {
    Structure w = testing::load_frame("witness.frame");
    auto phi_star = fo::parse_fo("exists x. exists y. (R(x,x) & R(x,y) & ~R(y,y))");
    CHECK(fo::eval(w, phi_star));

    Structure chain = testing::structure_from_code(2, 0b0010);  // a -> b
    CHECK_FALSE(fo::eval(chain, phi_star));
}

TEST_CASE("the reflexive-below-irreflexive sentence fails on loop-free frames") {
    auto phi_star = fo::parse_fo("exists x. exists y. (R(x,x) & R(x,y) & ~R(y,y))");
    for (int n = 1; n <= 3; ++n) {
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * n)); ++code) {
            bool loop_free = true;
            for (int i = 0; i < n; ++i)
                if ((code >> (i * n + i)) & 1) loop_free = false;
            if (!loop_free) continue;
            CHECK_FALSE(fo::eval(testing::structure_from_code(n, code), phi_star));
        }
    }
}

TEST_CASE("evaluation honours its step cap") {
    Structure s = testing::structure_from_code(5, 0);
    fo::EvalOptions opt;
    opt.max_steps = 20;
    CHECK_THROWS_AS(
        fo::eval(s, fo::parse_fo("forall x. forall y. forall z. (x = x | y = z)"), {}, nullptr, opt),
        LimitError);
}

TEST_CASE("evaluation rejects unresolved constants and unbound variables") {
    Structure s = testing::structure_from_code(2, 0);
    CHECK_THROWS_AS(fo::eval(s, fo::parse_fo("R(d_h, d_h)")), InputError);
    CHECK_THROWS_AS(fo::eval(s, fo::parse_fo("R(x, x)")), InputError);
}

TEST_CASE("sharp translation rewrites edge atoms and nothing else") {
    auto f = fo::rel(RelKind::R, Term::var("x"), Term::var("y"));
    CHECK(fo::to_string(fo::sharp_translate(f)) == "S(x, y) | P(x, y)");

    auto e = fo::eq(Term::var("x"), Term::var("y"));
    CHECK(fo::to_string(fo::sharp_translate(e)) == "x = y");

    auto g = fo::parse_fo("exists x. ~R(x,d_h)");
    CHECK(fo::to_string(fo::sharp_translate(g)) == "exists x. ~(S(x, d_h) | P(x, d_h))");

    CHECK_THROWS_AS(fo::sharp_translate(fo::parse_fo("S(x,y)")), InputError);
}

TEST_CASE("truth transfers through the sharp translation") {
    std::mt19937_64 rng(2024);
    int done = 0;
    while (done < 300) {
        Structure s = testing::random_structure(rng, 5, true);
        std::vector<std::string> consts;
        for (const auto& [name, node] : s.constants()) consts.push_back(name);
        auto f = testing::random_r_sentence(rng, 1 + static_cast<int>(rng() % 3), consts);
        if (!fo::free_vars(f).empty()) continue;
        bool plain, translated;
        try {
            plain = fo::eval(s, f);
            translated = fo::eval(s, fo::sharp_translate(f));
        } catch (const InputError&) {
            continue;  // constant-free structure drew a constant-only sentence
        }
        CHECK(plain == translated);
        ++done;
    }
}

TEST_CASE("standard translation matches modal truth") {
    // A single edge with p on the target.
    Structure s = testing::structure_from_code(2, 0b0010);  // a -> b
    Valuation val;
    val["p"] = NodeSet::from_mask(0b10, 2);
    auto st = fo::standard_translation(modal::var("p"), "x");
    CHECK(fo::eval(s, st, {{"x", 1}}, &val));
    CHECK_FALSE(fo::eval(s, st, {{"x", 0}}, &val));

    auto st_dia = fo::standard_translation(modal::diamond(modal::var("p")), "x");
    CHECK(fo::eval(s, st_dia, {{"x", 0}}, &val));
    CHECK_FALSE(fo::eval(s, st_dia, {{"x", 1}}, &val));
}

TEST_CASE("standard translation agrees with the model checker everywhere") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 150; ++i) {
        Structure s = testing::random_structure(rng, 4);
        auto f = testing::random_modal(rng, 2, 2);
        Valuation val = testing::random_valuation(rng, s, modal::vars(f));
        auto st = fo::standard_translation(f, "x");
        for (int w = 0; w < s.size(); ++w)
            CHECK(modal::check(s, val, w, f) == fo::eval(s, st, {{"x", w}}, &val));
    }
}

TEST_CASE("game equivalence is reflexive") {
    Structure s = testing::load_frame("tiny.frame");
    for (int q = 0; q <= 3; ++q) CHECK(fo::ef_equivalent(s, s, q));
}

TEST_CASE("a two-step chain is told apart from one step at two rounds") {
    Structure one = testing::structure_from_code(2, 0b0010);          // a -> b
    Structure two = testing::structure_from_code(3, 0b000100010);     // a -> b -> c
    CHECK(fo::ef_equivalent(one, two, 1));
    CHECK_FALSE(fo::ef_equivalent(one, two, 2));
    // A rank-2 separating sentence: some point has both a predecessor and a successor.
    auto middle = fo::parse_fo("exists x. ((exists y. R(y,x)) & (exists y. R(x,y)))");
    CHECK(fo::quantifier_rank(middle) == 2);
    CHECK(fo::eval(two, middle));
    CHECK_FALSE(fo::eval(one, middle));
}

TEST_CASE("game equivalence is symmetric and downward monotone") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        Structure a = testing::random_structure(rng, 4);
        Structure b = testing::random_structure(rng, 4);
        bool prev = true;
        for (int q = 0; q <= 3; ++q) {
            bool eq = fo::ef_equivalent(a, b, q);
            CHECK(eq == fo::ef_equivalent(b, a, q));
            if (!prev) CHECK_FALSE(eq);
            prev = eq;
        }
    }
}

TEST_CASE("game equivalence requires matching constants") {
    Structure hubbed;
    hubbed.add_node("h", true);
    Structure plain;
    plain.add_node("h");
    CHECK_THROWS_AS(fo::ef_equivalent(hubbed, plain, 1), InputError);
    CHECK_THROWS_AS(fo::ef_equivalent(hubbed, hubbed, 9), LimitError);
}

TEST_CASE("truncations of hub-free presentations agree at bounded rounds") {
    for (const auto& name : testing::hubfree_corpus()) {
        pres::Presentation p = testing::load_abp(name);
        for (int q = 1; q <= 2; ++q) {
            Structure small = pres::expand(p, q);
            Structure large = pres::expand(p, q + 1);
            CHECK(fo::ef_equivalent(small, large, q));
        }
    }
}

TEST_CASE("a compiled evaluator matches one-shot evaluation across assignments") {
    std::mt19937_64 rng(123);
    Structure s = testing::random_structure(rng, 6);
    auto f = fo::parse_fo("exists z. ((R(x,z) | R(z,y)) & ~(z = x))");
    fo::Evaluator ev(s, f, {"x", "y"});
    for (int x = 0; x < s.size(); ++x)
        for (int y = 0; y < s.size(); ++y)
            CHECK(ev.at({x, y}) == fo::eval(s, f, {{"x", x}, {"y", y}}));
    CHECK_THROWS_AS(ev.at({0}), InputError);
    CHECK_THROWS_AS(ev.at({0, 999}), InputError);
}
