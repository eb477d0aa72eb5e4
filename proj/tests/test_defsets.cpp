#include "doctest.h"

#include <memory>
#include <vector>

#include "qplip/defsets.hpp"

using namespace qplip;

namespace {

const FieldConfig cfg{5, 8, -16, 16};

PAdic q(int64_t num, int64_t den = 1) { return PAdic::make(num, den, cfg); }
Point pt(std::initializer_list<PAdic> cs) { return Point{std::vector<PAdic>(cs)}; }

LinTerm var(int i, int n) { return LinTerm::variable(i, n); }
LinTerm cst(int64_t c, int n) { return LinTerm::constant_term(c, n); }

DefinableSet even_ord_line() {
  Formula f = Formula::congruence(var(0, 1), cst(0, 1), 2);
  return DefinableSet{1, cfg, {OrdPullback{1, f}}};
}

}  // namespace

TEST_CASE("pullback membership reads the valuation vector") {
  DefinableSet x = even_ord_line();
  CHECK(x.contains(pt({q(1)})));
  CHECK(x.contains(pt({q(25)})));
  CHECK(x.contains(pt({q(1, 25)})));
  CHECK_FALSE(x.contains(pt({q(5)})));
  CHECK_FALSE(x.contains(pt({q(0)})));  // condition is false at infinity

  int n = 2;
  Formula g = Formula::atom(var(0, n), Rel::Lt, var(1, n));
  DefinableSet wedge{2, cfg, {OrdPullback{2, g}}};
  CHECK(wedge.contains(pt({q(1), q(5)})));
  CHECK(wedge.contains(pt({q(1), q(0)})));  // +inf beats any finite valuation
  CHECK_FALSE(wedge.contains(pt({q(5), q(1)})));
  CHECK_FALSE(wedge.contains(pt({q(0), q(1)})));
}

TEST_CASE("centred cell membership checks angular classes") {
  CentredCell c;
  c.n = 1;
  c.pinned = {false};
  c.level_m = 1;
  c.pairs.push_back({{2}, Formula::congruence(var(0, 1), cst(0, 1), 2)});
  DefinableSet x{1, cfg, {c}};
  CHECK(x.contains(pt({q(2)})));
  CHECK(x.contains(pt({q(7)})));    // 2 + 5: same class mod 5
  CHECK(x.contains(pt({q(50)})));   // 2 * 25: even valuation, class 2
  CHECK_FALSE(x.contains(pt({q(3)})));
  CHECK_FALSE(x.contains(pt({q(10)})));  // odd valuation
  CHECK_FALSE(x.contains(pt({q(0)})));

  DefinableSet o = times_zero(2, cfg);
  CHECK(o.contains(pt({q(0), q(0)})));
  CHECK_FALSE(o.contains(pt({q(0), q(1)})));
  CHECK_FALSE(o.contains(pt({q(25), q(0)})));
}

TEST_CASE("fibered cell membership around a moving center") {
  int n = 2;
  auto base = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg,
      {OrdPullback{1, Formula::conjunction(
                          {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)),
                           Formula::atom(var(0, 1), Rel::Lt, cst(3, 1))})}}});
  Cell c{n,    base, Expr::variable(0, 1), true, q(5), 1, 1,
         std::nullopt, std::nullopt};
  DefinableSet x{n, cfg, {c}};
  // second coordinate = y + something of angular class 1
  CHECK(x.contains(pt({q(3), q(8)})));     // 3 + 5
  CHECK(x.contains(pt({q(3), q(28)})));    // 3 + 25
  CHECK(x.contains(pt({q(3), q(4)})));     // 3 + 1
  CHECK_FALSE(x.contains(pt({q(3), q(13)})));  // 3 + 2*5: class 2
  CHECK_FALSE(x.contains(pt({q(3), q(3)})));   // zero offset is not in the coset
  CHECK_FALSE(x.contains(pt({q(125), q(126)})));  // base valuation out of range

  // graph cell: lambda = 0 pins the fiber to the center value
  Cell g{n, base, Expr::mul(Expr::variable(0, 1), Expr::variable(0, 1)),
         true, q(0), 1, 1, std::nullopt, std::nullopt};
  DefinableSet graph{n, cfg, {g}};
  CHECK(graph.contains(pt({q(2), q(4)})));
  CHECK(graph.contains(pt({q(5), q(25)})));
  CHECK_FALSE(graph.contains(pt({q(2), q(5)})));

  // strict valuation bounds on the offset
  Cell b{n, base, Expr::zero(1), true, q(1), 1, 1,
         PwlFn::constant(0, 1), PwlFn::constant(3, 1)};
  DefinableSet banded{n, cfg, {b}};
  CHECK(banded.contains(pt({q(1), q(5)})));
  CHECK(banded.contains(pt({q(1), q(25)})));
  CHECK_FALSE(banded.contains(pt({q(1), q(1)})));    // offset valuation 0, not > 0
  CHECK_FALSE(banded.contains(pt({q(1), q(125)})));  // offset valuation 3, not < 3
}

TEST_CASE("closure adds the reachable boundary") {
  // even valuations reach arbitrarily high: 0 joins the closure
  DefinableSet x = even_ord_line();
  DefinableSet cl = closure_of(x);
  CHECK(cl.contains(pt({q(0)})));
  CHECK(cl.contains(pt({q(25)})));
  CHECK_FALSE(cl.contains(pt({q(5)})));

  // a single sphere is already closed
  DefinableSet sphere{
      1, cfg, {OrdPullback{1, Formula::atom(var(0, 1), Rel::Eq, cst(2, 1))}}};
  DefinableSet cls = closure_of(sphere);
  CHECK_FALSE(cls.contains(pt({q(0)})));
  CHECK(cls.contains(pt({q(25)})));

  // strict dominance wedge: only the first coordinate can vanish alone
  int n = 2;
  DefinableSet wedge{
      2, cfg, {OrdPullback{2, Formula::atom(var(0, n), Rel::Lt, var(1, n))}}};
  DefinableSet clw = closure_of(wedge);
  CHECK(clw.contains(pt({q(1), q(0)})));
  CHECK(clw.contains(pt({q(0), q(0)})));
  CHECK_FALSE(clw.contains(pt({q(0), q(1)})));
  CHECK(clw.contains(pt({q(1), q(5)})));

  // centred cell with unbounded valuations closes onto the origin
  CentredCell c;
  c.n = 1;
  c.pinned = {false};
  c.level_m = 1;
  c.pairs.push_back({{2}, Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1))});
  DefinableSet cc{1, cfg, {c}};
  DefinableSet clc = closure_of(cc);
  CHECK(clc.contains(pt({q(0)})));
  CHECK(clc.contains(pt({q(2)})));
  CHECK_FALSE(clc.contains(pt({q(3)})));

  // bounded valuations do not reach the origin
  CentredCell cb = c;
  cb.pairs[0].cond = Formula::conjunction(
      {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)),
       Formula::atom(var(0, 1), Rel::Lt, cst(4, 1))});
  DefinableSet ccb{1, cfg, {cb}};
  CHECK_FALSE(closure_of(ccb).contains(pt({q(0)})));
}

TEST_CASE("closure of an open-above fibered cell gains the graph sheet") {
  int n = 2;
  auto base = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg,
      {OrdPullback{1, Formula::atom(var(0, 1), Rel::Eq, cst(0, 1))}}});
  Cell c{n,    base, Expr::variable(0, 1), true, q(5), 1, 1,
         std::nullopt, std::nullopt};
  DefinableSet x{n, cfg, {c}};
  CHECK_FALSE(x.contains(pt({q(3), q(3)})));
  DefinableSet cl = closure_of(x);
  CHECK(cl.contains(pt({q(3), q(3)})));    // limit of offsets going deep
  CHECK(cl.contains(pt({q(3), q(8)})));    // original points stay
  CHECK_FALSE(cl.contains(pt({q(3), q(13)})));

  // an upper bound on the offset valuation blocks the limit sheet
  Cell bounded{n, base, Expr::variable(0, 1), true, q(5), 1, 1,
               std::nullopt, PwlFn::constant(4, 1)};
  DefinableSet xb{n, cfg, {bounded}};
  DefinableSet clb = closure_of(xb);
  CHECK_FALSE(clb.contains(pt({q(3), q(3)})));
  CHECK(clb.contains(pt({q(3), q(8)})));
}

TEST_CASE("distance valuation to simple sets") {
  DefinableSet x = even_ord_line();
  CHECK(distance_to_set(pt({q(5)}), x) == ExtInt(1));
  CHECK(distance_to_set(pt({q(1, 5)}), x) == ExtInt(-1));
  CHECK(distance_to_set(pt({q(1)}), x) == ExtInt::pos_inf());
  CHECK(distance_to_set(pt({q(0)}), x) == ExtInt::pos_inf());

  // distance to the origin is the valuation itself
  DefinableSet o = times_zero(1, cfg);
  CHECK(distance_to_set(pt({q(5)}), o) == ExtInt(1));
  CHECK(distance_to_set(pt({q(1, 25)}), o) == ExtInt(-2));
  CHECK(distance_to_set(pt({q(3)}), o) == ExtInt(0));
  CHECK(distance_to_set(pt({q(0)}), o) == ExtInt::pos_inf());

  // angular class matters below the threshold
  CentredCell c;
  c.n = 1;
  c.pinned = {false};
  c.level_m = 1;
  c.pairs.push_back({{2}, Formula::congruence(var(0, 1), cst(0, 1), 2)});
  DefinableSet ang{1, cfg, {c}};
  CHECK(distance_to_set(pt({q(3)}), ang) == ExtInt(0));
  CHECK(distance_to_set(pt({q(1, 5)}), ang) == ExtInt(-1));
  CHECK(distance_to_set(pt({q(7)}), ang) == ExtInt::pos_inf());
  CHECK(distance_to_set(pt({q(12)}), ang) == ExtInt::pos_inf());  // 12 = 2 mod 5

  // at level two the second digit participates
  CentredCell c2 = c;
  c2.level_m = 2;
  c2.pairs[0].tuple = {7};  // 2 + 1*5
  DefinableSet ang2{1, cfg, {c2}};
  CHECK(distance_to_set(pt({q(7)}), ang2) == ExtInt::pos_inf());
  CHECK(distance_to_set(pt({q(12)}), ang2) == ExtInt(1));  // splits at digit one
  CHECK(distance_to_set(pt({q(3)}), ang2) == ExtInt(0));   // splits at digit zero

  // closure hint path gives the same answers
  DefinableSet hint = closure_of(ang);
  CHECK(distance_to_set(pt({q(3)}), ang, &hint) == ExtInt(0));
  CHECK(distance_to_set(pt({q(0)}), ang, &hint) == ExtInt::pos_inf());
}

TEST_CASE("distance couples base and fiber for translated cells") {
  int n = 2;
  auto base = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg,
      {OrdPullback{1, Formula::atom(var(0, 1), Rel::Eq, cst(0, 1))}}});
  Cell c{n,    base, Expr::variable(0, 1), true, q(5), 1, 1,
         std::nullopt, std::nullopt};
  DefinableSet x{n, cfg, {c}};
  // (3, 3 + 5) is in the set
  CHECK(distance_to_set(pt({q(3), q(8)}), x) == ExtInt::pos_inf());
  // (3, 3) is a closure point
  CHECK(distance_to_set(pt({q(3), q(3)}), x) == ExtInt::pos_inf());
  // (3, 3 + 2*5): the offset leaves the coset at its first digit
  CHECK(distance_to_set(pt({q(3), q(13)}), x) == ExtInt(1));
  // (25, anything): the base valuation is 2, nearest base point has valuation 0
  CHECK(distance_to_set(pt({q(25), q(30)}), x) == ExtInt(0));
}

TEST_CASE("monomialized cells keep their membership") {
  int n = 2;
  auto base = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg,
      {OrdPullback{1, Formula::conjunction(
                          {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)),
                           Formula::atom(var(0, 1), Rel::Lt, cst(2, 1))})}}});
  Cell c{n,    base, Expr::zero(1), true, q(1), 1, 1,
         PwlFn::linear(var(0, 1)), std::nullopt};
  CentredCell mono = monomialize_cell(c, cfg);
  CHECK(mono.n == 2);
  CHECK(mono.level_m == 1);
  CHECK_FALSE(mono.pinned[0]);
  CHECK_FALSE(mono.pinned[1]);
  std::vector<PAdic> samples = {q(1),  q(2),  q(3),   q(5),  q(7),  q(25),
                                q(10), q(50), q(1, 5), q(75), q(125)};
  for (const auto& a : samples)
    for (const auto& b : samples) {
      Point p = pt({a, b});
      CAPTURE(p.str());
      CHECK(c.contains(p) == mono.contains(p));
    }

  // zero fiber pins the last coordinate
  Cell g{n, base, Expr::zero(1), true, q(0), 1, 1, std::nullopt, std::nullopt};
  CentredCell gm = monomialize_cell(g, cfg);
  CHECK(gm.pinned[1]);
  CHECK(gm.contains(pt({q(1), q(0)})));
  CHECK(gm.contains(pt({q(5), q(0)})));
  CHECK_FALSE(gm.contains(pt({q(25), q(0)})));
  CHECK_FALSE(gm.contains(pt({q(1), q(1)})));

  // a base that reaches a zero coordinate is rejected
  auto zbase = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg, {OrdPullback{1, Formula::verum(1)}}});
  Cell zc{n, zbase, Expr::zero(1), true, q(1), 1, 1, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(monomialize_cell(zc, cfg), UnsupportedInputError);
}

TEST_CASE("monomialization lifts the angular level when needed") {
  int n = 2;
  CentredCell bc;
  bc.n = 1;
  bc.pinned = {false};
  bc.level_m = 1;
  bc.pairs.push_back({{2}, Formula::atom(var(0, 1), Rel::Eq, cst(0, 1))});
  auto base = std::make_shared<DefinableSet>(DefinableSet{1, cfg, {bc}});
  PAdic lam = q(7);  // angular class 7 mod 25
  Cell c{n, base, Expr::zero(1), true, lam, 2, 1, std::nullopt, std::nullopt};
  CentredCell mono = monomialize_cell(c, cfg);
  CHECK(mono.level_m == 2);
  // base class 2 mod 5 lifts to five classes mod 25, fiber stays at one class
  CHECK(mono.pairs.size() == 5);
  std::vector<PAdic> samples = {q(2), q(7), q(12), q(3), q(32), q(57)};
  for (const auto& a : samples)
    for (const auto& b : samples) {
      Point p = pt({a, b});
      CAPTURE(p.str());
      CHECK(c.contains(p) == mono.contains(p));
    }
}

TEST_CASE("valuation images of constituents") {
  Formula f = Formula::congruence(var(0, 1), cst(0, 1), 2);
  Formula img = ord_image(Constituent{OrdPullback{1, f}}, 1);
  CHECK(img.eval(std::vector<ExtInt>{ExtInt(2)}));
  CHECK_FALSE(img.eval(std::vector<ExtInt>{ExtInt(1)}));

  CentredCell c;
  c.n = 2;
  c.pinned = {false, true};
  c.level_m = 1;
  c.pairs.push_back({{2, 0}, Formula::atom(cst(0, 2), Rel::Le, var(0, 2))});
  Formula ci = ord_image(Constituent{c}, 2);
  CHECK(ci.eval(std::vector<ExtInt>{ExtInt(1), ExtInt::pos_inf()}));
  CHECK_FALSE(ci.eval(std::vector<ExtInt>{ExtInt(-1), ExtInt::pos_inf()}));
  CHECK_FALSE(ci.eval(std::vector<ExtInt>{ExtInt(1), ExtInt(3)}));
}

TEST_CASE("expressions evaluate and print") {
  Expr e = Expr::add(Expr::mul(Expr::variable(0, 2), Expr::variable(0, 2)),
                     Expr::variable(1, 2));
  PAdic v = e.eval(pt({q(2), q(3)}), cfg);
  CHECK(v == q(7));
  CHECK_THROWS_AS(Expr::sub(Expr::variable(0, 1), Expr::variable(0, 1))
                      .eval(pt({q(2)}), cfg),
                  PrecisionLossError);

  // p^(pwl of the valuation vector), vanishing whenever an input does
  Expr pw = Expr::pow_ord(PwlFn::linear(var(0, 1).scaled(2).plus_const(1)));
  CHECK(pw.eval(pt({q(5)}), cfg) == PAdic::power_of_p(3, cfg));
  CHECK(pw.eval(pt({q(0)}), cfg).is_zero());

  DefinableFn fn{2, {Expr::variable(1, 2), Expr::variable(0, 2)}};
  Point sw = fn.eval(pt({q(2), q(3)}), cfg);
  CHECK(sw.coords[0] == q(3));
  CHECK(sw.coords[1] == q(2));
  CHECK(fn.str() == "(x2, x1)");
}
