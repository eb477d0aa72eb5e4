#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qplip/errors.hpp"
#include "qplip/extint.hpp"

namespace qplip {

// Working parameters for one p-adic session.  All values passed around
// together must share the same config; mixing configs throws.
struct FieldConfig {
  int64_t p = 5;
  int precision = 8;     // stored unit digits per full-precision value
  int64_t vmin = -16;    // representable valuation window, inclusive
  int64_t vmax = 16;

  void validate() const;
  bool operator==(const FieldConfig&) const = default;
};

// A p-adic number known to finitely many significant digits.
//
// Nonzero values store a finite valuation and 1..precision base-p digits,
// least significant first, digits[0] != 0.  The value denotes the residue
// class  unit * p^valuation  mod p^(valuation + digits.size()).  Exact zero
// stores valuation +inf and no digits.  Fresh values carry the full
// cfg.precision digits; arithmetic on nearly cancelling operands may leave
// fewer, and an operation whose result keeps no significant digit at all
// throws PrecisionLossError rather than faking a zero.
//
// Structural equality is class equality: same valuation, same digits.
class PAdic {
 public:
  PAdic() = default;  // exact zero of a default-constructed config; rebind with make
  static PAdic zero(const FieldConfig& cfg);
  static PAdic one(const FieldConfig& cfg);
  // num/den as an exact rational; den != 0.  Full precision.
  static PAdic make(int64_t num, int64_t den, const FieldConfig& cfg);
  static PAdic from_parts(ExtInt valuation, std::vector<uint32_t> digits,
                          const FieldConfig& cfg);
  // p^v with unit 1 (canonical basepoint of its sphere).
  static PAdic power_of_p(int64_t v, const FieldConfig& cfg);

  const FieldConfig& cfg() const { return cfg_; }
  ExtInt ord() const { return valuation_; }
  bool is_zero() const { return !valuation_.is_finite(); }
  int significant_digits() const { return static_cast<int>(digits_.size()); }
  const std::vector<uint32_t>& digits() const { return digits_; }

  // Unit value modulo p^m; requires m stored digits, else PrecisionLossError.
  int64_t unit_mod(int m) const;

  PAdic operator-() const;
  friend PAdic add(const PAdic& a, const PAdic& b);
  friend PAdic sub(const PAdic& a, const PAdic& b);
  friend PAdic mul(const PAdic& a, const PAdic& b);
  friend PAdic div(const PAdic& a, const PAdic& b);

  bool operator==(const PAdic& o) const {
    return cfg_ == o.cfg_ && valuation_ == o.valuation_ && digits_ == o.digits_;
  }
  bool operator!=(const PAdic& o) const { return !(*this == o); }

  // pP:v:d0d1...  (digits most significant part of the unit first in storage
  // order, i.e. d0 is the unit digit).  Zero prints as pP:inf.
  std::string str() const;

 private:
  FieldConfig cfg_;
  ExtInt valuation_ = ExtInt::pos_inf();
  std::vector<uint32_t> digits_;
};

// Result of comparing x and y digit-by-digit: either the exact valuation of
// x - y, a certified lower bound (all stored digits cancelled), or equality
// at the stored precision.
struct OrdDiff {
  enum Kind { Exact, AtLeast, EqualAtPrecision } kind;
  int64_t v = 0;  // meaningful for Exact / AtLeast
};
PAdic add(const PAdic& a, const PAdic& b);
PAdic sub(const PAdic& a, const PAdic& b);
PAdic mul(const PAdic& a, const PAdic& b);
PAdic div(const PAdic& a, const PAdic& b);

OrdDiff ord_diff(const PAdic& a, const PAdic& b);

// Angular component at level m:  ac_m(x) = x p^(-ord x) mod p^m, ac_m(0) = 0.
int64_t acm(const PAdic& x, int m);

// Element of RV_m = K^x / (1 + M^m) together with 0.
struct RVElem {
  int m = 1;
  bool zero = true;
  int64_t valuation = 0;
  int64_t angular = 0;  // unit residue mod p^m when nonzero
  bool operator==(const RVElem&) const = default;
};
RVElem rvm(const PAdic& x, int m);

// Membership of x in lambda * Q_{m,nn}, where Q_{m,nn} = {ord in nn Z,
// ac_m = 1}.  lambda = 0 encodes the degenerate coset {0}.
bool in_coset(const PAdic& x, const PAdic& lambda, int m, int64_t nn);

// Point of K^n.
struct Point {
  std::vector<PAdic> coords;

  std::size_t dim() const { return coords.size(); }
  std::vector<ExtInt> ord_vector() const;
  std::string str() const;
  bool operator==(const Point&) const = default;
};

// Sup-metric distance expressed as a valuation: min_i ord(x_i - y_i).
// Returns +inf iff x = y at the stored precision.  Throws PrecisionLossError
// if cancellation leaves the minimum undetermined.
ExtInt dist(const Point& x, const Point& y);
ExtInt dist(const PAdic& x, const PAdic& y);

int64_t power_int(int64_t base, int exp);  // checked small power
int64_t mod_inverse(int64_t a, int64_t m);
bool is_prime(int64_t n);

}  // namespace qplip
