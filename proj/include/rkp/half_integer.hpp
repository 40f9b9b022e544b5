// rkp/half_integer.hpp
// Exact half-integer arithmetic for Conley-Zehnder / Robbin-Salamon indices.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace rkp {

/// A value in (1/2)Z stored as its double (the numerator over 2), so index
/// arithmetic and comparisons stay exact. Indices are never materialized as
/// floating point anywhere in the library.
class HalfInteger {
  public:
    constexpr HalfInteger() = default;
    /// Construct a whole integer n.
    constexpr explicit HalfInteger(std::int64_t n) : twice_(2 * n) {}

    /// The value n/2.
    static constexpr HalfInteger halves(std::int64_t n) {
        HalfInteger h;
        h.twice_ = n;
        return h;
    }

    constexpr std::int64_t twice() const { return twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    constexpr double value() const { return static_cast<double>(twice_) / 2.0; }

    constexpr HalfInteger operator+(HalfInteger o) const { return halves(twice_ + o.twice_); }
    constexpr HalfInteger operator-(HalfInteger o) const { return halves(twice_ - o.twice_); }
    constexpr HalfInteger operator-() const { return halves(-twice_); }
    constexpr HalfInteger& operator+=(HalfInteger o) {
        twice_ += o.twice_;
        return *this;
    }
    constexpr HalfInteger& operator-=(HalfInteger o) {
        twice_ -= o.twice_;
        return *this;
    }
    constexpr HalfInteger operator*(std::int64_t n) const { return halves(twice_ * n); }

    constexpr bool operator==(const HalfInteger&) const = default;
    constexpr auto operator<=>(const HalfInteger&) const = default;

    /// Exact rendering: integers as "n", proper halves as "n/2".
    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

  private:
    std::int64_t twice_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, HalfInteger h) { return os << h.str(); }

}  // namespace rkp
