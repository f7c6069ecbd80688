// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>

namespace gsb {

/// Real number extended with -inf and +inf. NaN is never representable:
/// every operation that would produce one throws std::domain_error.
///
/// Divergences (kl against a target of 1) and the index of an unpulled couple
/// (-inf) live here, so callers never compare against a sentinel value.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  explicit ExtReal(double v) : v_(v) {
    if (std::isnan(v)) throw std::domain_error("ExtReal: NaN");
  }

  static constexpr ExtReal infinity() { return ExtReal(Raw{}, std::numeric_limits<double>::infinity()); }
  static constexpr ExtReal neg_infinity() { return ExtReal(Raw{}, -std::numeric_limits<double>::infinity()); }

  [[nodiscard]] constexpr double value() const { return v_; }
  [[nodiscard]] bool is_finite() const { return std::isfinite(v_); }
  [[nodiscard]] bool is_pos_inf() const { return v_ == std::numeric_limits<double>::infinity(); }
  [[nodiscard]] bool is_neg_inf() const { return v_ == -std::numeric_limits<double>::infinity(); }

  /// Multiplication by a nonnegative finite factor with 0 * inf = 0.
  [[nodiscard]] ExtReal scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) throw std::domain_error("ExtReal::scaled: factor must be finite and >= 0");
    if (factor == 0.0) return ExtReal{};
    return ExtReal(Raw{}, v_ * factor);
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw std::domain_error("ExtReal: inf - inf");
    return ExtReal(Raw{}, a.v_ + b.v_);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  /// Division by a strictly positive finite value.
  friend ExtReal operator/(ExtReal a, double d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::domain_error("ExtReal: divisor must be finite and > 0");
    return ExtReal(Raw{}, a.v_ / d);
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  // NaN is excluded, so the double ordering is total here.
  friend constexpr std::strong_ordering operator<=>(ExtReal a, ExtReal b) {
    if (a.v_ < b.v_) return std::strong_ordering::less;
    if (a.v_ > b.v_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  struct Raw {};
  constexpr ExtReal(Raw, double v) : v_(v) {}
  double v_ = 0.0;
};

}  // namespace gsb
