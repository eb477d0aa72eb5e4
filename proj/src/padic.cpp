#include "qplip/padic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qplip {

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

int64_t power_int(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (int64_t(1) << 62) / base) throw TooLargeError("power_int overflow");
    r *= base;
  }
  return r;
}

static int64_t emod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

int64_t mod_inverse(int64_t a, int64_t m) {
  int64_t t = 0, nt = 1, r = m, nr = emod(a, m);
  while (nr != 0) {
    int64_t q = r / nr;
    std::swap(t -= q * nt, nt);
    std::swap(r -= q * nr, nr);
  }
  if (r != 1) throw DivisionByZeroError("mod_inverse: not a unit");
  return emod(t, m);
}

void FieldConfig::validate() const {
  if (!is_prime(p)) throw UnsupportedInputError("p must be prime");
  if (precision < 1 || precision > 32)
    throw UnsupportedInputError("precision out of range");
  // Keep p^precision in int64 territory with slack for products.
  double bits = precision * std::log2(double(p));
  if (bits > 31.0) throw UnsupportedInputError("p^precision too large");
  if (!(vmin < 0 && 0 < vmax)) throw UnsupportedInputError("window must straddle 0");
}

PAdic PAdic::zero(const FieldConfig& cfg) {
  cfg.validate();
  PAdic x;
  x.cfg_ = cfg;
  return x;
}

PAdic PAdic::one(const FieldConfig& cfg) { return make(1, 1, cfg); }

PAdic PAdic::power_of_p(int64_t v, const FieldConfig& cfg) {
  std::vector<uint32_t> d(cfg.precision, 0);
  d[0] = 1;
  return from_parts(ExtInt(v), std::move(d), cfg);
}

PAdic PAdic::from_parts(ExtInt valuation, std::vector<uint32_t> digits,
                        const FieldConfig& cfg) {
  cfg.validate();
  PAdic x;
  x.cfg_ = cfg;
  if (valuation.is_pos_inf()) {
    if (!digits.empty()) throw UnsupportedInputError("zero carries no digits");
    return x;
  }
  if (digits.empty() || digits[0] == 0)
    throw UnsupportedInputError("leading digit must be nonzero");
  if (static_cast<int>(digits.size()) > cfg.precision)
    throw UnsupportedInputError("more digits than the config precision");
  for (uint32_t d : digits)
    if (d >= cfg.p) throw UnsupportedInputError("digit out of base range");
  if (valuation.value() < cfg.vmin || valuation.value() > cfg.vmax)
    throw OutOfWindowError("valuation " + valuation.str() + " outside window");
  x.valuation_ = valuation;
  x.digits_ = std::move(digits);
  return x;
}

static std::vector<uint32_t> digits_of(int64_t u, int len, int64_t p) {
  std::vector<uint32_t> d(len);
  for (int i = 0; i < len; ++i) {
    d[i] = static_cast<uint32_t>(u % p);
    u /= p;
  }
  return d;
}

PAdic PAdic::make(int64_t num, int64_t den, const FieldConfig& cfg) {
  cfg.validate();
  if (den == 0) throw DivisionByZeroError("make: zero denominator");
  if (num == 0) return zero(cfg);
  int64_t a = 0, b = 0;
  while (num % cfg.p == 0) { num /= cfg.p; ++a; }
  while (den % cfg.p == 0) { den /= cfg.p; ++b; }
  int64_t v = a - b;
  if (v < cfg.vmin || v > cfg.vmax)
    throw OutOfWindowError("valuation " + std::to_string(v) + " outside window");
  int64_t pk = power_int(cfg.p, cfg.precision);
  int64_t u = emod(emod(num, pk) * mod_inverse(den, pk) % pk, pk);
  PAdic x;
  x.cfg_ = cfg;
  x.valuation_ = ExtInt(v);
  x.digits_ = digits_of(u, cfg.precision, cfg.p);
  return x;
}

int64_t PAdic::unit_mod(int m) const {
  if (is_zero()) throw InternalError("unit_mod on zero");
  if (m < 1) throw UnsupportedInputError("unit_mod: m < 1");
  if (m > static_cast<int>(digits_.size()))
    throw PrecisionLossError("unit_mod: only " + std::to_string(digits_.size()) +
                             " digits available, need " + std::to_string(m));
  int64_t u = 0, pw = 1;
  for (int i = 0; i < m; ++i) {
    u += digits_[i] * pw;
    pw *= cfg_.p;
  }
  return u;
}

PAdic PAdic::operator-() const {
  if (is_zero()) return *this;
  int len = significant_digits();
  int64_t pl = power_int(cfg_.p, len);
  int64_t u = emod(pl - unit_mod(len), pl);
  PAdic x;
  x.cfg_ = cfg_;
  x.valuation_ = valuation_;
  x.digits_ = digits_of(u, len, cfg_.p);
  return x;
}

static void require_same_cfg(const PAdic& a, const PAdic& b) {
  if (!(a.cfg() == b.cfg()))
    throw UnsupportedInputError("operands from different field configs");
}

// Shared core of add/sub: exact sum of the two residue classes, tracked to
// the largest window both operands determine.
PAdic add(const PAdic& a, const PAdic& b) {
  require_same_cfg(a, b);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const FieldConfig& cfg = a.cfg();
  int64_t va = a.ord().value(), vb = b.ord().value();
  int64_t v = std::min(va, vb);
  int64_t N = std::min(va + a.significant_digits(), vb + b.significant_digits());
  int len = static_cast<int>(N - v);  // <= max precision by construction
  if (len <= 0) throw PrecisionLossError("add: operand windows do not overlap");
  int64_t pl = power_int(cfg.p, len);
  auto contrib = [&](const PAdic& x, int64_t vx) {
    int keep = std::min<int64_t>(x.significant_digits(), len - (vx - v));
    int64_t u = keep >= 1 ? x.unit_mod(static_cast<int>(keep)) : 0;
    return emod(u * power_int(cfg.p, static_cast<int>(vx - v)), pl);
  };
  int64_t s = emod(contrib(a, va) + contrib(b, vb), pl);
  if (s == 0)
    throw PrecisionLossError("add: result vanishes at stored precision");
  int tz = 0;
  while (s % cfg.p == 0) { s /= cfg.p; ++tz; }
  int64_t vr = v + tz;
  if (vr < cfg.vmin || vr > cfg.vmax)
    throw OutOfWindowError("add: result valuation outside window");
  PAdic r = PAdic::from_parts(ExtInt(vr), digits_of(s, len - tz, cfg.p), cfg);
  return r;
}

PAdic sub(const PAdic& a, const PAdic& b) { return add(a, -b); }

PAdic mul(const PAdic& a, const PAdic& b) {
  require_same_cfg(a, b);
  const FieldConfig& cfg = a.cfg();
  if (a.is_zero() || b.is_zero()) return PAdic::zero(cfg);
  int len = std::min(a.significant_digits(), b.significant_digits());
  int64_t pl = power_int(cfg.p, len);
  int64_t u = a.unit_mod(len) * b.unit_mod(len) % pl;
  int64_t v = a.ord().value() + b.ord().value();
  if (v < cfg.vmin || v > cfg.vmax)
    throw OutOfWindowError("mul: result valuation outside window");
  return PAdic::from_parts(ExtInt(v), digits_of(u, len, cfg.p), cfg);
}

PAdic div(const PAdic& a, const PAdic& b) {
  require_same_cfg(a, b);
  const FieldConfig& cfg = a.cfg();
  if (b.is_zero()) throw DivisionByZeroError("div: zero divisor");
  if (a.is_zero()) return PAdic::zero(cfg);
  int len = std::min(a.significant_digits(), b.significant_digits());
  int64_t pl = power_int(cfg.p, len);
  int64_t u = a.unit_mod(len) * mod_inverse(b.unit_mod(len), pl) % pl;
  int64_t v = a.ord().value() - b.ord().value();
  if (v < cfg.vmin || v > cfg.vmax)
    throw OutOfWindowError("div: result valuation outside window");
  return PAdic::from_parts(ExtInt(v), digits_of(u, len, cfg.p), cfg);
}

OrdDiff ord_diff(const PAdic& a, const PAdic& b) {
  require_same_cfg(a, b);
  if (a == b) return {OrdDiff::EqualAtPrecision, 0};
  if (a.is_zero()) return {OrdDiff::Exact, b.ord().value()};
  if (b.is_zero()) return {OrdDiff::Exact, a.ord().value()};
  const FieldConfig& cfg = a.cfg();
  int64_t va = a.ord().value(), vb = b.ord().value();
  if (va != vb) return {OrdDiff::Exact, std::min(va, vb)};
  int64_t v = va;
  int64_t N = std::min(va + a.significant_digits(), vb + b.significant_digits());
  int len = static_cast<int>(N - v);
  int64_t pl = power_int(cfg.p, len);
  int64_t s = emod(a.unit_mod(len) - b.unit_mod(len), pl);
  if (s == 0) return {OrdDiff::AtLeast, N};
  int tz = 0;
  while (s % cfg.p == 0) { s /= cfg.p; ++tz; }
  return {OrdDiff::Exact, v + tz};
}

ExtInt dist(const PAdic& x, const PAdic& y) {
  OrdDiff d = ord_diff(x, y);
  switch (d.kind) {
    case OrdDiff::EqualAtPrecision: return ExtInt::pos_inf();
    case OrdDiff::Exact: return ExtInt(d.v);
    case OrdDiff::AtLeast:
    default:
      throw PrecisionLossError("dist: difference cancels below precision");
  }
}

ExtInt dist(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw ArityError("dist: dimension mismatch");
  bool all_equal = true;
  bool have_exact = false;
  int64_t min_exact = 0;
  int64_t min_bound = 0;
  bool have_bound = false;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    OrdDiff d = ord_diff(x.coords[i], y.coords[i]);
    if (d.kind == OrdDiff::EqualAtPrecision) continue;
    all_equal = false;
    if (d.kind == OrdDiff::Exact) {
      min_exact = have_exact ? std::min(min_exact, d.v) : d.v;
      have_exact = true;
    } else {
      min_bound = have_bound ? std::min(min_bound, d.v) : d.v;
      have_bound = true;
    }
  }
  if (all_equal) return ExtInt::pos_inf();
  // A cancelled coordinate only floors the minimum; it is harmless as long
  // as some exact coordinate is at least as small.
  if (have_exact && (!have_bound || min_exact <= min_bound))
    return ExtInt(min_exact);
  throw PrecisionLossError("dist: minimum undetermined after cancellation");
}

int64_t acm(const PAdic& x, int m) {
  if (m < 1 || m > x.cfg().precision)
    throw UnsupportedInputError("acm: level out of range");
  if (x.is_zero()) return 0;
  return x.unit_mod(m);
}

RVElem rvm(const PAdic& x, int m) {
  RVElem e;
  e.m = m;
  if (x.is_zero()) return e;
  e.zero = false;
  e.valuation = x.ord().value();
  e.angular = acm(x, m);
  return e;
}

bool in_coset(const PAdic& x, const PAdic& lambda, int m, int64_t nn) {
  if (nn < 1) throw UnsupportedInputError("in_coset: nn < 1");
  if (lambda.is_zero()) return x.is_zero();
  if (x.is_zero()) return false;
  PAdic q = div(x, lambda);
  int64_t v = q.ord().value();
  return emod(v, nn) == 0 && acm(q, m) == 1;
}

std::vector<ExtInt> Point::ord_vector() const {
  std::vector<ExtInt> v;
  v.reserve(coords.size());
  for (const PAdic& c : coords) v.push_back(c.ord());
  return v;
}

std::string PAdic::str() const {
  std::ostringstream os;
  os << 'p' << cfg_.p << ':';
  if (is_zero()) {
    os << "inf";
    return os.str();
  }
  os << valuation_.value() << ':';
  for (uint32_t d : digits_) {
    if (cfg_.p > 10) os << d << '.';
    else os << d;
  }
  return os.str();
}

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) os << ',';
    os << coords[i].str();
  }
  os << ')';
  return os.str();
}

}  // namespace qplip
