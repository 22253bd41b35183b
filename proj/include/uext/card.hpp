#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "uext/error.hpp"

namespace uext {

/// Cardinal bookkeeping for symbolic counting. Only four values are ever
/// distinguished at this scale: finite numbers, aleph_0, 2^aleph_0 and
/// 2^(2^aleph_0). Arithmetic on infinite values collapses to the maximum;
/// multiplication by zero annihilates.
class Card {
public:
    enum class Kind : std::uint8_t { Fin = 0, Aleph0 = 1, Continuum = 2, PowerContinuum = 3 };

    Card() : kind_(Kind::Fin), n_(0) {}

    static Card fin(std::uint64_t n) { return Card(Kind::Fin, n); }
    static Card aleph0() { return Card(Kind::Aleph0, 0); }
    static Card continuum() { return Card(Kind::Continuum, 0); }
    static Card power_continuum() { return Card(Kind::PowerContinuum, 0); }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Fin; }
    bool is_infinite() const { return kind_ != Kind::Fin; }

    /// Finite value; error on infinite cards.
    std::uint64_t finite_value() const {
        if (!is_finite()) throw InputError("finite_value() on infinite cardinal");
        return n_;
    }

    friend bool operator==(const Card& a, const Card& b) {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::Fin || a.n_ == b.n_);
    }
    friend std::strong_ordering operator<=>(const Card& a, const Card& b) {
        if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
        return a.n_ <=> b.n_;
    }

    friend Card operator+(const Card& a, const Card& b) {
        if (a.is_finite() && b.is_finite()) return fin(a.n_ + b.n_);
        return a > b ? a : b;
    }
    friend Card operator*(const Card& a, const Card& b) {
        if (a == fin(0) || b == fin(0)) return fin(0);
        if (a.is_finite() && b.is_finite()) return fin(a.n_ * b.n_);
        return a > b ? a : b;
    }
    Card& operator+=(const Card& o) { return *this = *this + o; }

    std::string to_string() const {
        switch (kind_) {
            case Kind::Fin: return std::to_string(n_);
            case Kind::Aleph0: return "aleph0";
            case Kind::Continuum: return "2^aleph0";
            case Kind::PowerContinuum: return "2^2^aleph0";
        }
        return "?";
    }

private:
    Card(Kind k, std::uint64_t n) : kind_(k), n_(n) {}

    Kind kind_;
    std::uint64_t n_;
};

}  // namespace uext
