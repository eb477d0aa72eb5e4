#include <random>

#include "doctest.h"
#include "qplip/padic.hpp"

using namespace qplip;

namespace {

FieldConfig cfg5() { return FieldConfig{5, 8, -16, 16}; }

// Independent digit oracle: expand a/b (b a unit) digit by digit, finding
// each digit by brute search instead of a modular inverse.  Deliberately a
// different algorithm from the library path.
std::vector<uint32_t> oracle_digits(int64_t a, int64_t b, int64_t p, int n) {
  std::vector<uint32_t> out;
  for (int i = 0; i < n; ++i) {
    int d = -1;
    for (int c = 0; c < p; ++c) {
      if ((a - c * b) % p == 0) { d = c; break; }
    }
    REQUIRE(d >= 0);
    out.push_back(static_cast<uint32_t>(d));
    a = (a - d * b) / p;
  }
  return out;
}

PAdic random_nonzero(std::mt19937_64& rng, const FieldConfig& cfg) {
  std::uniform_int_distribution<int64_t> vd(-6, 6);
  std::uniform_int_distribution<uint32_t> dd(0, static_cast<uint32_t>(cfg.p - 1));
  std::uniform_int_distribution<uint32_t> ld(1, static_cast<uint32_t>(cfg.p - 1));
  std::vector<uint32_t> digits(cfg.precision);
  digits[0] = ld(rng);
  for (int i = 1; i < cfg.precision; ++i) digits[i] = dd(rng);
  return PAdic::from_parts(ExtInt(vd(rng)), digits, cfg);
}

}  // namespace

TEST_CASE("integer and rational construction") {
  auto c = cfg5();
  PAdic x = PAdic::make(50, 1, c);
  CHECK(x.ord() == ExtInt(2));
  CHECK(x.digits()[0] == 2);
  CHECK(x.str() == "p5:2:20000000");

  PAdic half = PAdic::make(1, 2, c);
  // 1/2 in Z_5: digits from the oracle expansion of 1/2.
  auto expect = oracle_digits(1, 2, 5, 8);
  CHECK(half.digits() == expect);
  CHECK(half.ord() == ExtInt(0));

  PAdic z = PAdic::make(0, 7, c);
  CHECK(z.is_zero());
  CHECK(z.str() == "p5:inf");

  CHECK_THROWS_AS(PAdic::make(1, 0, c), DivisionByZeroError);
  CHECK_THROWS_AS(PAdic::make(power_int(5, 17), 1, c), OutOfWindowError);
  CHECK_THROWS_AS(PAdic::make(1, power_int(5, 17), c), OutOfWindowError);
}

TEST_CASE("canonical representation is quotient-invariant") {
  auto c = cfg5();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int64_t> ad(-4000, 4000);
  std::uniform_int_distribution<int64_t> td(1, 60);
  for (int i = 0; i < 500; ++i) {
    int64_t a = ad(rng), b = td(rng), t = td(rng);
    if (a == 0) continue;
    CHECK(PAdic::make(a, b, c) == PAdic::make(a * t, b * t, c));
  }
}

TEST_CASE("subtraction tracks cancelled digits") {
  auto c = cfg5();
  PAdic d = sub(PAdic::make(6, 1, c), PAdic::make(21, 1, c));  // -15 = -3 * 5
  CHECK(d.ord() == ExtInt(1));
  CHECK(d.digits()[0] == 2);
  CHECK(d.significant_digits() == 7);  // one digit lost to cancellation
  auto expect = oracle_digits(-3, 1, 5, 7);
  CHECK(d.digits() == expect);

  PAdic x = PAdic::make(7, 3, c);
  CHECK_THROWS_AS(sub(x, x), PrecisionLossError);
  CHECK_THROWS_AS(add(x, -x), PrecisionLossError);
}

TEST_CASE("angular component and rv") {
  auto c = cfg5();
  PAdic x = PAdic::make(50, 1, c);
  CHECK(acm(x, 1) == 2);
  CHECK(acm(x, 2) == 2);
  RVElem r = rvm(x, 1);
  CHECK(!r.zero);
  CHECK(r.valuation == 2);
  CHECK(r.angular == 2);
  CHECK(acm(PAdic::zero(c), 3) == 0);
  CHECK(rvm(PAdic::zero(c), 2).zero);
}

TEST_CASE("coset membership") {
  auto c = cfg5();
  PAdic one = PAdic::one(c);
  CHECK(in_coset(PAdic::make(25, 1, c), one, 1, 2));
  CHECK(!in_coset(PAdic::make(5, 1, c), one, 1, 2));
  CHECK(in_coset(PAdic::zero(c), PAdic::zero(c), 1, 2));
  CHECK(!in_coset(PAdic::make(3, 1, c), PAdic::zero(c), 1, 2));
  CHECK(!in_coset(PAdic::zero(c), one, 1, 2));
  // 2 * 25 lies in 2 * Q_{1,2} but not in Q_{1,2}.
  PAdic two = PAdic::make(2, 1, c);
  CHECK(in_coset(PAdic::make(50, 1, c), two, 1, 2));
  CHECK(!in_coset(PAdic::make(50, 1, c), one, 1, 2));
}

TEST_CASE("distance on points") {
  auto c = cfg5();
  Point x{{PAdic::make(5, 1, c), PAdic::make(1, 1, c)}};
  Point y{{PAdic::zero(c), PAdic::make(2, 1, c)}};
  CHECK(dist(x, y) == ExtInt(0));
  CHECK(dist(x, x).is_pos_inf());
  CHECK(dist(x, y) == dist(y, x));
}

TEST_CASE("arithmetic invariants on random values") {
  auto c = cfg5();
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 2000; ++i) {
    PAdic x = random_nonzero(rng, c);
    PAdic y = random_nonzero(rng, c);
    PAdic z = random_nonzero(rng, c);

    CHECK(mul(x, y).ord() == x.ord() + y.ord());
    CHECK(div(mul(x, y), y) == x);
    CHECK(acm(mul(x, y), 2) ==
          acm(x, 2) * acm(y, 2) % power_int(5, 2));

    if (x.ord() != y.ord()) {
      CHECK(add(x, y).ord() == min(x.ord(), y.ord()));
    }

    // Ultrametric triangle inequality in valuation form.
    Point px{{x}}, py{{y}}, pz{{z}};
    ExtInt dxz = dist(px, pz);
    CHECK(dxz >= min(dist(px, py), dist(py, pz)));

    // rv equality at level m is the same as ord(x-y) >= ord(x) + m.
    for (int m : {1, 2}) {
      OrdDiff d = ord_diff(x, y);
      bool far_enough = d.kind == OrdDiff::EqualAtPrecision ||
                        ExtInt(d.v) >= x.ord() + ExtInt(m);
      CHECK((rvm(x, m) == rvm(y, m)) == far_enough);
    }
  }
}

TEST_CASE("from_parts validation") {
  auto c = cfg5();
  CHECK_THROWS_AS(PAdic::from_parts(ExtInt(0), {0, 1}, c), UnsupportedInputError);
  CHECK_THROWS_AS(PAdic::from_parts(ExtInt(0), {5}, c), UnsupportedInputError);
  CHECK_THROWS_AS(PAdic::from_parts(ExtInt(20), {1}, c), OutOfWindowError);
  CHECK_THROWS_AS(PAdic::from_parts(ExtInt::pos_inf(), {1}, c),
                  UnsupportedInputError);
  PAdic x = PAdic::from_parts(ExtInt(-2), {3, 1}, c);
  CHECK(x.significant_digits() == 2);
  CHECK(x.str() == "p5:-2:31");
}
