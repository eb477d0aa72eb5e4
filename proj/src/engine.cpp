#include "qplip/engine.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace qplip {

namespace {

int64_t emod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

int64_t fdiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) --q;
  return q;
}

// Exact satisfiability over the (finite) integers.
bool presburger_sat(Formula f) {
  while (f.arity() > 0) f = project_last(f);
  std::vector<int64_t> none;
  return f.eval_int(none);
}

Formula with_fins(Formula f) {
  int n = f.arity();
  std::vector<Formula> c{std::move(f)};
  for (int i = 0; i < n; ++i) c.push_back(finite_var(i, n));
  return Formula::conjunction(std::move(c));
}

// Closing a valuation pullback yields a single pullback again; pull its
// condition back out as a formula.
Formula closure_cond(const Formula& cond, int n, const FieldConfig& cfg) {
  DefinableSet s{n, cfg, {OrdPullback{n, cond}}};
  return std::get<OrdPullback>(closure_of(s).parts.at(0)).cond;
}

std::vector<int> identity_map(int k) {
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 0);
  return m;
}

// Inverse of rotate_var_to_last(axis): rotated slot k came from k (k < axis),
// k + 1 (axis <= k <= n-2) and the last slot from axis.
std::vector<int> unrotate_perm(int axis, int n) {
  std::vector<int> perm(n);
  for (int k = 0; k < n - 1; ++k) perm[k] = k < axis ? k : k + 1;
  perm[n - 1] = axis;
  return perm;
}

// The cell as a membership formula in decomposition order: base variables
// first, the decomposed variable last, every coordinate nonzero.
Formula cell_formula_rot(const PresCell& cell, int n) {
  std::vector<int> idn = identity_map(n - 1);
  std::vector<Formula> conj{cell.base.remapped(idn, n)};
  for (int i = 0; i < n; ++i) conj.push_back(finite_var(i, n));
  if (cell.modulus > 1)
    conj.push_back(Formula::congruence(LinTerm::variable(n - 1, n),
                                       LinTerm::constant_term(cell.residue, n),
                                       cell.modulus));
  if (cell.lower)
    conj.push_back(pwl_cmp_var(*cell.lower, Rel::Lt, n - 1, idn, n));
  if (cell.upper)
    conj.push_back(
        Formula::negation(pwl_cmp_var(*cell.upper, Rel::Le, n - 1, idn, n)));
  return Formula::conjunction(std::move(conj));
}

// The top-of-band witness p^nu is 1-Lipschitz on the base iff nu never drops
// below the valuation at which two base points can differ.  Checked on the
// representable window (subsampled when large); a violation is a structural
// defect of the input set, not of the construction.
void check_condition1(const PwlFn& nu, const Formula& clu, int bn,
                      const FieldConfig& cfg) {
  if (bn == 0) return;
  const int64_t lo = cfg.vmin - 4, hi = cfg.vmax + 4;
  std::vector<std::vector<int64_t>> pts;
  std::vector<int64_t> cur(bn, lo);
  for (;;) {
    if (clu.eval_int(cur)) pts.push_back(cur);
    int k = 0;
    while (k < bn && ++cur[k] > hi) cur[k++] = lo;
    if (k == bn) break;
  }
  if (pts.size() > 256) {
    std::vector<std::vector<int64_t>> keep;
    std::size_t stride = (pts.size() + 255) / 256;
    for (std::size_t i = 0; i < pts.size(); i += stride) keep.push_back(pts[i]);
    keep.push_back(pts.back());
    pts.swap(keep);
  }
  std::vector<int64_t> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = nu.eval_int(pts[i]);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (vals[i] == vals[j]) continue;
      int64_t m = std::numeric_limits<int64_t>::max();
      for (int k = 0; k < bn; ++k)
        if (pts[i][k] != pts[j][k]) m = std::min({m, pts[i][k], pts[j][k]});
      if (m == std::numeric_limits<int64_t>::max()) continue;
      if (std::min(vals[i], vals[j]) < m)
        throw Condition1Error("top of band varies faster than the base allows");
    }
}

PlanPtr plan_finite(const Formula& f, int n, const FieldConfig& cfg);
PlanPtr plan_pullback(const OrdPullback& u, const FieldConfig& cfg);
PlanPtr plan_centred(const CentredCell& c, const FieldConfig& cfg);
PlanPtr plan_cell(const Cell& c, const FieldConfig& cfg);

// One-variable band cell: place the valuation inside the band, then fix the
// residue class.  The band's resting point p^nu already has the right
// residue, so the shift leaves it alone.
PlanPtr plan_one_var_cell(const PresCell& cell) {
  const int64_t a = cell.modulus, b = cell.residue;
  std::vector<int64_t> none;
  std::optional<int64_t> lo, hi;
  if (cell.lower) lo = cell.lower->eval_int(none);
  if (cell.upper) hi = cell.upper->eval_int(none);
  PlanPtr band;
  if (hi) {
    int64_t nu = b + a * fdiv(*hi - 1 - b, a);
    band = lo ? RetractionPlan::band_1d(3, *lo, nu + 1)
              : RetractionPlan::band_1d(4, 0, nu + 1);
  } else {
    band = lo ? RetractionPlan::band_1d(2, *lo, 0) : RetractionPlan::identity(1);
  }
  if (a == 1) return band;
  Formula cf = cell_formula_rot(cell, 1);
  Formula target =
      cell.upper ? cf : Formula::disjunction({cf, infinite_var(0, 1)});
  return RetractionPlan::compose(
      band, RetractionPlan::residue_shift(0, a, b, cf, target, 1));
}

// Fibered band cell in dimension n >= 2 with the decomposed coordinate at
// `axis`.  Points whose valuation vector sits over the (adjusted) band keep
// their fiber coordinate; the rest are routed to the witness section at the
// top of the band (or to the zero section when the band is unbounded above).
// The base coordinates are then retracted onto the closed base and the fiber
// valuation is shifted into its residue class.
PlanPtr plan_band_cell(const PresCell& cell, int axis, int n,
                       const FieldConfig& cfg) {
  const int bn = n - 1;
  const int64_t a = cell.modulus, b = cell.residue;

  Formula ubase = with_fins(cell.base);
  DefinableSet uset{bn, cfg, {OrdPullback{bn, ubase}}};
  PlanPtr sigma = build_retraction(uset);
  Formula clu = closure_cond(ubase, bn, cfg);

  std::vector<int> bmap(bn);
  for (int j = 0; j < bn; ++j) bmap[j] = j < axis ? j : j + 1;
  Formula clu_n = clu.remapped(bmap, n);

  std::vector<bool> fiber_mask(n, false);
  fiber_mask[axis] = true;

  std::vector<Formula> keep{clu_n};
  std::vector<Formula> fib;
  if (cell.lower) {
    Formula above = pwl_cmp_var(*cell.lower, Rel::Lt, axis, bmap, n);
    keep.push_back(above);
    fib.push_back(above);
  }
  PlanPtr hplan;
  if (cell.upper) {
    // largest value <= upper - 1 in the residue class b mod a
    PwlFn nu = cell.upper->floor_div(a, -1 - b).scaled(a).plus_const(b);
    check_condition1(nu, clu, bn, cfg);
    Formula below = Formula::negation(
        pwl_cmp_var(nu.plus_const(1), Rel::Le, axis, bmap, n));
    keep.push_back(below);
    fib.push_back(below);
    hplan = RetractionPlan::recenter(
        axis, DefinableFn{bn, {Expr::pow_ord(nu)}}, sigma,
        RetractionPlan::pin_lift(fiber_mask, sigma));
  } else {
    hplan = RetractionPlan::pin_lift(fiber_mask, sigma);
  }
  Formula keep_cond = Formula::conjunction(keep);

  PlanPtr plan = RetractionPlan::continuous_ext(
      RetractionPlan::fiber_band(axis, keep_cond, hplan));
  plan = RetractionPlan::compose(plan,
                                 RetractionPlan::product_lift(axis, sigma, n));
  if (a > 1) {
    fib.push_back(Formula::congruence(LinTerm::variable(axis, n),
                                      LinTerm::constant_term(b, n), a));
    Formula fiber_cl = Formula::conjunction(fib);
    if (!cell.upper)
      fiber_cl = Formula::disjunction({fiber_cl, infinite_var(axis, n)});
    Formula target_cond = Formula::conjunction({clu_n, fiber_cl});
    plan = RetractionPlan::compose(
        plan,
        RetractionPlan::residue_shift(axis, a, b, keep_cond, target_cond, n));
  }
  return plan;
}

// All coordinates nonzero.  Dimension 1 decomposes directly; higher
// dimensions split by which coordinate carries the maximal valuation and
// decompose that coordinate over the others.
PlanPtr plan_finite(const Formula& f, int n, const FieldConfig& cfg) {
  if (n == 0) return RetractionPlan::identity(0);
  std::vector<PlanPtr> plans;
  std::vector<DefinableSet> targets;
  if (n == 1) {
    for (const auto& cell : decompose_last(f)) {
      if (!presburger_sat(cell.base)) continue;
      plans.push_back(plan_one_var_cell(cell));
      targets.push_back(
          DefinableSet{1, cfg, {OrdPullback{1, cell_formula_rot(cell, 1)}}});
    }
  } else {
    std::vector<Formula> pieces = split_max_coordinate(f);
    for (int i = 0; i < n; ++i) {
      Formula g = rotate_var_to_last(pieces[i], i);
      if (!presburger_sat(g)) continue;
      std::vector<int> perm = unrotate_perm(i, n);
      for (const auto& cell : decompose_last(g)) {
        if (!presburger_sat(cell.base)) continue;
        plans.push_back(plan_band_cell(cell, i, n, cfg));
        targets.push_back(DefinableSet{
            n, cfg,
            {OrdPullback{n, cell_formula_rot(cell, n).remapped(perm, n)}}});
      }
    }
  }
  if (plans.empty()) throw EmptyCellError("no inhabited piece in the decomposition");
  if (plans.size() == 1) return plans[0];
  return RetractionPlan::glue(std::move(plans), std::move(targets));
}

// Split a pullback by the exact zero pattern of the coordinates; each
// pattern freezes its zeros and retracts the remaining coordinates.
PlanPtr plan_pullback(const OrdPullback& u, const FieldConfig& cfg) {
  if (u.n == 0) return RetractionPlan::identity(0);
  const int n = u.n;
  std::vector<PlanPtr> plans;
  std::vector<DefinableSet> targets;
  for (uint32_t bits = 0; bits < (1u << n); ++bits) {
    std::vector<bool> mask(n);
    int pins = 0;
    for (int i = 0; i < n; ++i) {
      mask[i] = (bits >> i) & 1u;
      pins += mask[i] ? 1 : 0;
    }
    Formula f = substitute_infinite(u.cond, mask);
    if (f.is_false()) continue;
    Formula g = f;
    for (int i = n - 1; i >= 0; --i)
      if (mask[i]) g = erase_var(g, i);
    Formula gf = with_fins(std::move(g));
    if (!presburger_sat(gf)) continue;
    PlanPtr inner = plan_finite(gf, n - pins, cfg);
    plans.push_back(pins == 0 ? inner
                              : RetractionPlan::pin_lift(mask, std::move(inner)));
    std::vector<Formula> part{f};
    for (int i = 0; i < n; ++i)
      part.push_back(mask[i] ? infinite_var(i, n) : finite_var(i, n));
    targets.push_back(DefinableSet{
        n, cfg, {OrdPullback{n, Formula::conjunction(std::move(part))}}});
  }
  if (plans.empty()) throw EmptyCellError("empty valuation pullback");
  if (plans.size() == 1) return plans[0];
  return RetractionPlan::glue(std::move(plans), std::move(targets));
}

// A centred cell retracts pairwise: pinned coordinates are frozen, each
// angular pair retracts onto its valuation region and is then turned onto
// its angular class by unit multipliers.
PlanPtr plan_centred(const CentredCell& c, const FieldConfig& cfg) {
  const int n = c.n;
  int pins = static_cast<int>(
      std::count(c.pinned.begin(), c.pinned.end(), true));
  if (pins > 0) {
    CentredCell inner;
    inner.n = n - pins;
    inner.pinned.assign(n - pins, false);
    inner.level_m = c.level_m;
    for (const auto& pr : c.pairs) {
      Formula f = substitute_infinite(pr.cond, c.pinned);
      for (int i = n - 1; i >= 0; --i)
        if (c.pinned[i]) f = erase_var(f, i);
      std::vector<int64_t> tup;
      for (int i = 0; i < n; ++i)
        if (!c.pinned[i]) tup.push_back(pr.tuple[i]);
      inner.pairs.push_back({std::move(tup), std::move(f)});
    }
    PlanPtr ip =
        inner.n == 0 ? RetractionPlan::identity(0) : plan_centred(inner, cfg);
    return RetractionPlan::pin_lift(c.pinned, std::move(ip));
  }
  const int64_t pm = power_int(cfg.p, c.level_m);
  std::vector<PlanPtr> plans;
  std::vector<DefinableSet> targets;
  for (const auto& pr : c.pairs) {
    Formula f = with_fins(pr.cond);
    if (!presburger_sat(f)) continue;
    std::vector<std::vector<int64_t>> table(n, std::vector<int64_t>(pm, 1));
    for (int i = 0; i < n; ++i) {
      if (emod(pr.tuple[i], cfg.p) == 0)
        throw UnsupportedInputError("angular class is not a unit");
      for (int64_t u0 = 1; u0 < pm; ++u0) {
        if (u0 % cfg.p == 0) continue;
        table[i][u0] = u0 == pr.tuple[i]
                           ? 1
                           : emod(pr.tuple[i] * mod_inverse(u0, pm), pm);
      }
    }
    PlanPtr sigma = plan_pullback(OrdPullback{n, f}, cfg);
    plans.push_back(RetractionPlan::compose(
        std::move(sigma),
        RetractionPlan::angular(c.level_m, pr.tuple, std::move(table), f)));
    CentredCell single{n, c.pinned, c.level_m, {pr}};
    targets.push_back(DefinableSet{n, cfg, {std::move(single)}});
  }
  if (plans.empty()) throw EmptyCellError("empty angular piece");
  if (plans.size() == 1) return plans[0];
  return RetractionPlan::glue(std::move(plans), std::move(targets));
}

PlanPtr plan_cell(const Cell& c, const FieldConfig& cfg) {
  const int n = c.n;
  if (!c.base) throw UnsupportedInputError("fibered cell without a base");
  if (!c.center.is_zero_const()) {
    if (!c.center_lipschitz)
      throw UnsupportedInputError("cell center lacks a 1-Lipschitz certificate");
    Cell zc{n,          c.base,      Expr::zero(n - 1), c.center_lipschitz,
            c.coset_lambda, c.level_m, c.modulus_nn,     c.lower,
            c.upper};
    return RetractionPlan::recenter(n - 1, DefinableFn{n - 1, {c.center}},
                                    build_retraction(*c.base),
                                    plan_cell(zc, cfg));
  }
  if (c.coset_lambda.is_zero()) {
    std::vector<bool> mask(n, false);
    mask[n - 1] = true;
    return RetractionPlan::pin_lift(mask, build_retraction(*c.base));
  }
  return plan_centred(monomialize_cell(c, cfg), cfg);
}

}  // namespace

PlanPtr build_retraction(const DefinableSet& s) {
  s.cfg.validate();
  if (s.parts.empty()) throw EmptyCellError("retraction onto an empty set");
  if (s.parts.size() > 1) {
    std::vector<PlanPtr> plans;
    std::vector<DefinableSet> targets;
    for (const auto& part : s.parts) {
      DefinableSet single{s.n, s.cfg, {part}};
      plans.push_back(build_retraction(single));
      targets.push_back(std::move(single));
    }
    return RetractionPlan::glue(std::move(plans), std::move(targets));
  }
  const FieldConfig& cfg = s.cfg;
  if (const auto* p = std::get_if<OrdPullback>(&s.parts[0]))
    return plan_pullback(*p, cfg);
  if (const auto* c = std::get_if<CentredCell>(&s.parts[0]))
    return plan_centred(*c, cfg);
  return plan_cell(std::get<Cell>(s.parts[0]), cfg);
}

int PiecewiseFn::out_arity() const {
  return pieces.empty() ? 0 : static_cast<int>(pieces.front().second.size());
}

Point PiecewiseFn::eval(const Point& x, const FieldConfig& cfg) const {
  for (const auto& [set, outs] : pieces) {
    if (!set.contains(x)) continue;
    Point y;
    y.coords.reserve(outs.size());
    for (const auto& e : outs) y.coords.push_back(e.eval(x, cfg));
    return y;
  }
  throw NoActivePieceError("no piece of the map matches the point");
}

Point ExtendedFn::eval(const Point& x, const FieldConfig& cfg) const {
  Point r = pre->eval(x, cfg);
  for (const auto& [set, outs] : fn.pieces) {
    if (!set.contains(r)) continue;
    Point y;
    for (const auto& e : outs) y.coords.push_back(e.eval(r, cfg));
    return y;
  }
  // Limit points of the domain: evaluate the matching piece's expressions
  // there, which is their continuous extension.
  for (std::size_t i = 0; i < piece_closures.size(); ++i) {
    if (!piece_closures[i].contains(r)) continue;
    Point y;
    for (const auto& e : fn.pieces[i].second) y.coords.push_back(e.eval(r, cfg));
    return y;
  }
  throw NoActivePieceError("retracted point escapes every piece closure");
}

ExtendedFn extend_function(const PiecewiseFn& f, const DefinableSet& dom) {
  if (f.in_arity != dom.n) throw ArityError("extend: domain arity mismatch");
  ExtendedFn e;
  e.pre = build_retraction(dom);
  e.fn = f;
  e.piece_closures.reserve(f.pieces.size());
  for (const auto& pr : f.pieces) e.piece_closures.push_back(closure_of(pr.first));
  return e;
}

}  // namespace qplip
