#pragma once

// Orders of truncated series: a natural number, +infinity (identically zero),
// or "unknown beyond the truncation" when every stored coefficient vanished.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace jetlab {

class Order {
 public:
  enum class Kind { finite, infinite, unknown };

  constexpr Order() = default;

  static constexpr Order finite(std::int64_t value) { return Order(Kind::finite, value); }
  static constexpr Order infinity() { return Order(Kind::infinite, 0); }
  static constexpr Order unknown() { return Order(Kind::unknown, 0); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr bool is_infinite() const { return kind_ == Kind::infinite; }
  constexpr bool is_unknown() const { return kind_ == Kind::unknown; }

  std::int64_t value() const {
    if (!is_finite()) throw std::logic_error("value() of a non-finite order");
    return value_;
  }

  /// Order of a product. An identically-zero factor wins over an unknown one.
  friend constexpr Order operator+(const Order& a, const Order& b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    if (a.is_unknown() || b.is_unknown()) return unknown();
    return finite(a.value_ + b.value_);
  }

  /// Order of a quotient with the 0/0 = 0 convention: an identically-zero
  /// numerator gives +infinity whatever the denominator is.
  friend constexpr Order operator-(const Order& num, const Order& den) {
    if (num.is_infinite()) return infinity();
    if (num.is_unknown() || den.is_unknown()) return unknown();
    if (den.is_infinite()) return infinity();
    return finite(num.value_ - den.value_);
  }

  constexpr Order scaled(std::int64_t factor) const {
    if (!is_finite()) return *this;
    return finite(value_ * factor);
  }

  /// Order of a sum of squares (no cancellation). An unknown order is known
  /// to exceed every stored exponent, so a finite competitor wins.
  friend constexpr Order min(const Order& a, const Order& b) {
    if (a.is_finite() && b.is_finite()) return finite(std::min(a.value_, b.value_));
    if (a.is_finite()) return a;
    if (b.is_finite()) return b;
    if (a.is_unknown() || b.is_unknown()) return unknown();
    return infinity();
  }

  friend constexpr bool operator==(const Order& a, const Order& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::finite: return std::to_string(value_);
      case Kind::infinite: return "inf";
      case Kind::unknown: return "unknown";
    }
    return "?";
  }

  friend std::ostream& operator<<(std::ostream& os, const Order& o) { return os << o.to_string(); }

 private:
  constexpr Order(Kind kind, std::int64_t value) : kind_(kind), value_(value) {}

  Kind kind_ = Kind::infinite;
  std::int64_t value_ = 0;
};

/// Three-way comparison that refuses to decide when either side is unknown.
inline std::optional<std::strong_ordering> compare(const Order& a, const Order& b) {
  if (a.is_unknown() || b.is_unknown()) return std::nullopt;
  if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
  if (a.is_infinite()) return std::strong_ordering::greater;
  if (b.is_infinite()) return std::strong_ordering::less;
  return a.value() <=> b.value();
}

}  // namespace jetlab
