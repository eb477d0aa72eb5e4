#include "doctest.h"

#include <memory>
#include <vector>

#include "qplip/engine.hpp"

using namespace qplip;

namespace {

const FieldConfig cfg{5, 8, -16, 16};

PAdic q(int64_t num, int64_t den = 1) { return PAdic::make(num, den, cfg); }
Point pt(std::initializer_list<PAdic> cs) { return Point{std::vector<PAdic>(cs)}; }

LinTerm var(int i, int n) { return LinTerm::variable(i, n); }
LinTerm cst(int64_t c, int n) { return LinTerm::constant_term(c, n); }

DefinableSet pull1(Formula f) { return DefinableSet{1, cfg, {OrdPullback{1, f}}}; }

// r(r(x)) = r(x), r(x) in the closure, members fixed; pairwise nonexpansive.
void check_retraction_on(const PlanPtr& r, const DefinableSet& s,
                         const std::vector<Point>& sample) {
  DefinableSet cl = closure_of(s);
  std::vector<Point> images;
  for (const Point& x : sample) {
    Point y = r->eval(x, cfg);
    CHECK(cl.contains(y));
    CHECK(r->eval(y, cfg) == y);
    if (s.contains(x)) CHECK(y == x);
    images.push_back(y);
  }
  for (std::size_t i = 0; i < sample.size(); ++i)
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      ExtInt dx = dist(sample[i], sample[j]);
      if (!dx.is_finite()) continue;
      CHECK(dist(images[i], images[j]) >= dx);
    }
}

std::vector<Point> scalar_sample() {
  std::vector<Point> out;
  for (int64_t v : {0L, 1L, 2L, 3L, 4L, 7L, 12L, 5L, 10L, 26L, 25L, 125L, 626L})
    out.push_back(pt({q(v)}));
  out.push_back(pt({q(1, 5)}));
  out.push_back(pt({q(2, 5)}));
  out.push_back(pt({q(1, 25)}));
  return out;
}

}  // namespace

TEST_CASE("one variable bands: the four placements") {
  // no bounds: everything already lies in the closure
  PlanPtr all = build_retraction(pull1(finite_var(0, 1)));
  CHECK(all->eval(pt({q(7)}), cfg) == pt({q(7)}));
  CHECK(all->eval(pt({q(0)}), cfg) == pt({q(0)}));

  // lower bound only: small points collapse to 0
  DefinableSet lower = pull1(Formula::conjunction(
      {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)), finite_var(0, 1)}));
  PlanPtr rl = build_retraction(lower);
  CHECK(rl->eval(pt({q(3)}), cfg) == pt({q(3)}));
  CHECK(rl->eval(pt({q(1, 5)}), cfg) == pt({q(0)}));
  CHECK(rl->eval(pt({q(0)}), cfg) == pt({q(0)}));
  check_retraction_on(rl, lower, scalar_sample());

  // both bounds: outsiders land on the resting point p^(beta-1)
  DefinableSet units = pull1(Formula::conjunction(
      {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)),
       Formula::atom(var(0, 1), Rel::Lt, cst(1, 1))}));
  PlanPtr ru = build_retraction(units);
  CHECK(ru->eval(pt({q(7)}), cfg) == pt({q(7)}));
  CHECK(ru->eval(pt({q(1, 5)}), cfg) == pt({q(1)}));
  CHECK(ru->eval(pt({q(0)}), cfg) == pt({q(1)}));
  CHECK(ru->eval(pt({q(10)}), cfg) == pt({q(1)}));
  check_retraction_on(ru, units, scalar_sample());

  // upper bound only
  DefinableSet big = pull1(Formula::atom(var(0, 1), Rel::Lt, cst(3, 1)));
  PlanPtr rb = build_retraction(big);
  CHECK(rb->eval(pt({q(7)}), cfg) == pt({q(7)}));
  CHECK(rb->eval(pt({q(1, 25)}), cfg) == pt({q(1, 25)}));
  CHECK(rb->eval(pt({q(125)}), cfg) == pt({q(25)}));
  CHECK(rb->eval(pt({q(0)}), cfg) == pt({q(25)}));
  check_retraction_on(rb, big, scalar_sample());
}

TEST_CASE("valuation residue classes are reached by shifting") {
  DefinableSet even = pull1(Formula::congruence(var(0, 1), cst(0, 1), 2));
  PlanPtr r = build_retraction(even);
  CHECK(r->eval(pt({q(5)}), cfg) == pt({q(25)}));
  CHECK(r->eval(pt({q(25)}), cfg) == pt({q(25)}));
  CHECK(r->eval(pt({q(1)}), cfg) == pt({q(1)}));
  CHECK(r->eval(pt({q(0)}), cfg) == pt({q(0)}));  // 0 is a limit of the set
  check_retraction_on(r, even, scalar_sample());
}

TEST_CASE("angular pieces are turned onto their class") {
  CentredCell c;
  c.n = 1;
  c.pinned = {false};
  c.level_m = 1;
  c.pairs.push_back({{1}, Formula::verum(1)});
  DefinableSet s{1, cfg, {c}};
  PlanPtr r = build_retraction(s);
  CHECK(r->eval(pt({q(2)}), cfg) == pt({q(6)}));
  CHECK(r->eval(pt({q(6)}), cfg) == pt({q(6)}));
  CHECK(r->eval(pt({q(0)}), cfg) == pt({q(0)}));
  // touching multipliers stay within distance: |2 - 7| = |r(2) - r(7)|
  Point a = r->eval(pt({q(2)}), cfg);
  Point b = r->eval(pt({q(7)}), cfg);
  CHECK(dist(a, b) == dist(pt({q(2)}), pt({q(7)})));
  check_retraction_on(r, s, scalar_sample());

  // pinned coordinate stays frozen at 0
  CentredCell pc;
  pc.n = 2;
  pc.pinned = {true, false};
  pc.level_m = 1;
  pc.pairs.push_back({{0, 1}, Formula::verum(2)});
  DefinableSet ps{2, cfg, {pc}};
  PlanPtr rp = build_retraction(ps);
  CHECK(rp->eval(pt({q(9), q(2)}), cfg) == pt({q(0), q(6)}));
  CHECK(ps.contains(rp->eval(pt({q(9), q(2)}), cfg)));
}

TEST_CASE("nearest sheet wins, ties go to the first") {
  DefinableSet both{1, cfg,
                    {OrdPullback{1, Formula::atom(cst(0, 1), Rel::Lt, var(0, 1))},
                     OrdPullback{1, Formula::atom(var(0, 1), Rel::Eq, cst(0, 1))}}};
  PlanPtr r = build_retraction(both);
  CHECK(r->eval(pt({q(1)}), cfg) == pt({q(1)}));     // on the unit sheet
  CHECK(r->eval(pt({q(25)}), cfg) == pt({q(25)}));   // inside the small sheet
  CHECK(r->eval(pt({q(0)}), cfg) == pt({q(0)}));
  // 1/5 is at valuation distance -1 from both sheets; the first one wins
  // and sends it to 0
  CHECK(r->eval(pt({q(1, 5)}), cfg) == pt({q(0)}));
  check_retraction_on(r, both, scalar_sample());
}

TEST_CASE("a product with a pinned coordinate") {
  Formula f = Formula::conjunction({Formula::atom(cst(-1, 2), Rel::Lt, var(0, 2)),
                                    finite_var(0, 2), infinite_var(1, 2)});
  DefinableSet s{2, cfg, {OrdPullback{2, f}}};
  PlanPtr r = build_retraction(s);
  CHECK(r->eval(pt({q(3), q(7)}), cfg) == pt({q(3), q(0)}));
  CHECK(r->eval(pt({q(1, 5), q(0)}), cfg) == pt({q(0), q(0)}));
  CHECK(r->eval(pt({q(2), q(0)}), cfg) == pt({q(2), q(0)}));
}

TEST_CASE("fibered band over a base: witness at the top") {
  // 0 < ord x, ord x <= ord y <= 2 ord x
  int n = 2;
  Formula f = Formula::conjunction(
      {Formula::atom(cst(0, n), Rel::Lt, var(0, n)),
       Formula::atom(var(0, n), Rel::Le, var(1, n)),
       Formula::atom(var(1, n), Rel::Le, var(0, n) + var(0, n))});
  DefinableSet s{n, cfg, {OrdPullback{n, f}}};
  PlanPtr r = build_retraction(s);

  CHECK(r->eval(pt({q(5), q(25)}), cfg) == pt({q(5), q(25)}));
  CHECK(r->eval(pt({q(5), q(5)}), cfg) == pt({q(5), q(5)}));
  // fiber valuation too large: pulled back to the top-of-band witness 5^2
  CHECK(r->eval(pt({q(5), q(625)}), cfg) == pt({q(5), q(25)}));
  // far outside: collapses to the origin, which the closure contains
  CHECK(r->eval(pt({q(1, 5), q(7)}), cfg) == pt({q(0), q(0)}));
  CHECK(r->eval(pt({q(0), q(0)}), cfg) == pt({q(0), q(0)}));

  std::vector<Point> sample;
  for (int64_t a : {0L, 1L, 3L, 5L, 7L, 25L, 26L, 125L, 625L})
    for (int64_t b : {0L, 1L, 5L, 25L, 125L, 615L})
      sample.push_back(pt({q(a), q(b)}));
  sample.push_back(pt({q(1, 5), q(7)}));
  check_retraction_on(r, s, sample);
}

TEST_CASE("a top of band that outruns its base is rejected") {
  int n = 2;
  Formula f = Formula::conjunction(
      {Formula::atom(var(0, n), Rel::Le, var(1, n)),
       Formula::atom(var(1, n), Rel::Le, var(0, n) + var(0, n))});
  DefinableSet s{n, cfg, {OrdPullback{n, f}}};
  CHECK_THROWS_AS(build_retraction(s), Condition1Error);
}

TEST_CASE("graphs recenter onto their base") {
  auto base = std::make_shared<DefinableSet>(DefinableSet{
      1, cfg,
      {OrdPullback{1, Formula::conjunction(
                          {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)),
                           Formula::atom(var(0, 1), Rel::Lt, cst(1, 1))})}}});
  Cell g{2, base, Expr::mul(Expr::variable(0, 1), Expr::variable(0, 1)),
         true, q(0), 1, 1, std::nullopt, std::nullopt};
  DefinableSet s{2, cfg, {g}};
  PlanPtr r = build_retraction(s);
  CHECK(r->eval(pt({q(2), q(4)}), cfg) == pt({q(2), q(4)}));
  CHECK(r->eval(pt({q(2), q(0)}), cfg) == pt({q(2), q(4)}));
  CHECK(r->eval(pt({q(1, 5), q(9)}), cfg) == pt({q(1), q(1)}));
  CHECK(s.contains(r->eval(pt({q(3), q(7)}), cfg)));
}

TEST_CASE("coset cells go through the angular rewrite") {
  auto zbase = std::make_shared<DefinableSet>(
      DefinableSet{1, cfg, {OrdPullback{1, infinite_var(0, 1)}}});
  Cell c{2, zbase, Expr::zero(1), true, q(1), 1, 1, std::nullopt, std::nullopt};
  DefinableSet s{2, cfg, {c}};
  PlanPtr r = build_retraction(s);
  // fiber keeps valuation, moves to angular class 1; base coordinate pinned
  CHECK(r->eval(pt({q(9), q(2)}), cfg) == pt({q(0), q(6)}));
  CHECK(r->eval(pt({q(0), q(6)}), cfg) == pt({q(0), q(6)}));
  CHECK(s.contains(r->eval(pt({q(7), q(35)}), cfg)));
  CHECK(r->eval(pt({q(0), q(0)}), cfg) == pt({q(0), q(0)}));
}

TEST_CASE("extending a map beyond its domain") {
  Formula f = Formula::conjunction(
      {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)), finite_var(0, 1)});
  DefinableSet dom = pull1(f);
  PiecewiseFn id;
  id.in_arity = 1;
  id.pieces.push_back({dom, {Expr::variable(0, 1)}});
  ExtendedFn ext = extend_function(id, dom);
  CHECK(ext.eval(pt({q(3)}), cfg) == pt({q(3)}));
  CHECK(ext.eval(pt({q(1, 5)}), cfg) == pt({q(0)}));  // continuous limit value
  CHECK(ext.eval(pt({q(0)}), cfg) == pt({q(0)}));

  PiecewiseFn wrong;
  wrong.in_arity = 2;
  CHECK_THROWS_AS(extend_function(wrong, dom), ArityError);
}

TEST_CASE("plans report their shape") {
  DefinableSet lower = pull1(Formula::conjunction(
      {Formula::atom(cst(-1, 1), Rel::Lt, var(0, 1)), finite_var(0, 1)}));
  PlanPtr r = build_retraction(lower);
  CHECK(r->node_count() >= 1);
  CHECK_FALSE(r->kind_name().empty());
  // evaluating twice exercises the nearest-sheet cache
  DefinableSet both{1, cfg,
                    {OrdPullback{1, Formula::atom(cst(0, 1), Rel::Lt, var(0, 1))},
                     OrdPullback{1, Formula::atom(var(0, 1), Rel::Eq, cst(0, 1))}}};
  PlanPtr g = build_retraction(both);
  Point x = pt({q(1, 5)});
  CHECK(g->eval(x, cfg) == g->eval(x, cfg));
}
