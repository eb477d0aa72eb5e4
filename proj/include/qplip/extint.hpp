#pragma once

#include <cstdint>
#include <string>

#include "qplip/errors.hpp"

namespace qplip {

// Z extended by both infinities.  Valuations only ever use +inf, but linear
// bounds evaluated at infinite coordinates need -inf as well, so one type
// serves both.  Total order: -inf < any integer < +inf.
class ExtInt {
 public:
  constexpr ExtInt() : kind_(0), v_(0) {}
  constexpr ExtInt(int64_t v) : kind_(0), v_(v) {}  // NOLINT: implicit by design

  static constexpr ExtInt pos_inf() { return ExtInt(1, 0); }
  static constexpr ExtInt neg_inf() { return ExtInt(-1, 0); }

  constexpr bool is_finite() const { return kind_ == 0; }
  constexpr bool is_pos_inf() const { return kind_ > 0; }
  constexpr bool is_neg_inf() const { return kind_ < 0; }

  int64_t value() const {
    if (!is_finite()) throw InternalError("ExtInt::value on infinite value");
    return v_;
  }

  friend constexpr bool operator==(ExtInt a, ExtInt b) {
    return a.kind_ == b.kind_ && (a.kind_ != 0 || a.v_ == b.v_);
  }
  friend constexpr bool operator!=(ExtInt a, ExtInt b) { return !(a == b); }
  friend constexpr bool operator<(ExtInt a, ExtInt b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    return a.kind_ == 0 && a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtInt a, ExtInt b) { return a < b || a == b; }
  friend constexpr bool operator>(ExtInt a, ExtInt b) { return b < a; }
  friend constexpr bool operator>=(ExtInt a, ExtInt b) { return b <= a; }

  // Addition of opposite infinities is undefined and reported as a bug:
  // callers are expected to rule it out before combining values.
  friend ExtInt operator+(ExtInt a, ExtInt b) {
    if (a.is_finite() && b.is_finite()) return ExtInt(a.v_ + b.v_);
    if (a.is_finite()) return b;
    if (b.is_finite()) return a;
    if (a.kind_ == b.kind_) return a;
    throw InternalError("ExtInt: +inf + -inf");
  }
  friend ExtInt operator-(ExtInt a, ExtInt b) { return a + (-b); }
  friend constexpr ExtInt operator-(ExtInt a) {
    return ExtInt(-a.kind_, a.is_finite() ? -a.v_ : 0);
  }

  friend ExtInt min(ExtInt a, ExtInt b) { return a < b ? a : b; }
  friend ExtInt max(ExtInt a, ExtInt b) { return a < b ? b : a; }

  std::string str() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    return std::to_string(v_);
  }

 private:
  constexpr ExtInt(int8_t kind, int64_t v) : kind_(kind), v_(v) {}
  int8_t kind_;  // -1, 0, +1
  int64_t v_;
};

}  // namespace qplip
