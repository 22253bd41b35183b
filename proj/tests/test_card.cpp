#include <doctest.h>

#include "uext/card.hpp"

using uext::Card;

TEST_CASE("cardinals are totally ordered") {
    CHECK(Card::fin(0) < Card::fin(7));
    CHECK(Card::fin(1000000) < Card::aleph0());
    CHECK(Card::aleph0() < Card::continuum());
    CHECK(Card::continuum() < Card::power_continuum());
    CHECK(Card::fin(3) == Card::fin(3));
}

TEST_CASE("arithmetic collapses to the maximum past the finite range") {
    CHECK(Card::fin(2) + Card::fin(3) == Card::fin(5));
    CHECK(Card::fin(2) * Card::fin(3) == Card::fin(6));
    CHECK(Card::aleph0() + Card::fin(5) == Card::aleph0());
    CHECK(Card::aleph0() + Card::power_continuum() == Card::power_continuum());
    CHECK(Card::aleph0() * Card::continuum() == Card::continuum());
}

TEST_CASE("multiplication by zero annihilates every cardinal") {
    CHECK(Card::power_continuum() * Card::fin(0) == Card::fin(0));
    CHECK(Card::fin(0) * Card::aleph0() == Card::fin(0));
}

TEST_CASE("cardinals print their conventional names") {
    CHECK(Card::fin(4).to_string() == "4");
    CHECK(Card::aleph0().to_string() == "aleph0");
    CHECK(Card::power_continuum().to_string() == "2^2^aleph0");
    CHECK_THROWS_AS(Card::aleph0().finite_value(), uext::InputError);
}
