#include "qplip/defsets.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qplip {

static int64_t emod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// -------------------------------------------------------------------- Expr

struct Expr::Node {
  Kind kind;
  int arity = 0;
  PAdic value;             // Const
  int var = -1;            // Var
  std::vector<Expr> kids;  // Add/Sub/Mul/Neg
  std::optional<PwlFn> exponent;
};

Expr Expr::constant(PAdic v, int arity) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->arity = arity;
  n->value = std::move(v);
  return Expr(std::move(n));
}

Expr Expr::zero(int arity) { return constant(PAdic(), arity); }

Expr Expr::variable(int i, int arity) {
  if (i < 0 || i >= arity) throw ArityError("Expr::variable: index out of range");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->arity = arity;
  n->var = i;
  return Expr(std::move(n));
}

Expr Expr::add(Expr a, Expr b) {
  if (a.arity() != b.arity()) throw ArityError("Expr::add");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Add;
  n->arity = a.arity();
  n->kids = {std::move(a), std::move(b)};
  return Expr(std::move(n));
}

Expr Expr::sub(Expr a, Expr b) {
  if (a.arity() != b.arity()) throw ArityError("Expr::sub");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sub;
  n->arity = a.arity();
  n->kids = {std::move(a), std::move(b)};
  return Expr(std::move(n));
}

Expr Expr::mul(Expr a, Expr b) {
  if (a.arity() != b.arity()) throw ArityError("Expr::mul");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mul;
  n->arity = a.arity();
  n->kids = {std::move(a), std::move(b)};
  return Expr(std::move(n));
}

Expr Expr::negate(Expr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->arity = a.arity();
  n->kids = {std::move(a)};
  return Expr(std::move(n));
}

Expr Expr::pow_ord(PwlFn exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::PowOrd;
  n->arity = exponent.arity();
  n->exponent = std::move(exponent);
  return Expr(std::move(n));
}

int Expr::arity() const { return node_->arity; }
Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero_const() const {
  return node_->kind == Kind::Const && node_->value.is_zero();
}
const PAdic& Expr::const_value() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
const std::vector<Expr>& Expr::children() const { return node_->kids; }
const PwlFn& Expr::exponent() const { return *node_->exponent; }

PAdic Expr::eval(const Point& x, const FieldConfig& cfg) const {
  if (static_cast<int>(x.dim()) != arity()) throw ArityError("Expr::eval");
  switch (kind()) {
    case Kind::Const: {
      // a default-constructed zero adopts the session config
      if (node_->value.is_zero()) return PAdic::zero(cfg);
      return node_->value;
    }
    case Kind::Var: return x.coords[node_->var];
    case Kind::Add: return qplip::add(node_->kids[0].eval(x, cfg), node_->kids[1].eval(x, cfg));
    case Kind::Sub: return qplip::sub(node_->kids[0].eval(x, cfg), node_->kids[1].eval(x, cfg));
    case Kind::Mul: return qplip::mul(node_->kids[0].eval(x, cfg), node_->kids[1].eval(x, cfg));
    case Kind::Neg: return -node_->kids[0].eval(x, cfg);
    case Kind::PowOrd: {
      for (const auto& c : x.coords)
        if (c.is_zero()) return PAdic::zero(cfg);
      int64_t e = node_->exponent->eval(x.ord_vector()).value();
      return PAdic::power_of_p(e, cfg);
    }
  }
  throw InternalError("Expr::eval: bad kind");
}

std::string Expr::str() const {
  switch (kind()) {
    case Kind::Const: return node_->value.str();
    case Kind::Var: return "x" + std::to_string(node_->var + 1);
    case Kind::Add: return "(" + node_->kids[0].str() + " + " + node_->kids[1].str() + ")";
    case Kind::Sub: return "(" + node_->kids[0].str() + " - " + node_->kids[1].str() + ")";
    case Kind::Mul: return "(" + node_->kids[0].str() + " * " + node_->kids[1].str() + ")";
    case Kind::Neg: return "(-" + node_->kids[0].str() + ")";
    case Kind::PowOrd: return "p^{" + node_->exponent->str() + "}";
  }
  return "?";
}

Point DefinableFn::eval(const Point& x, const FieldConfig& cfg) const {
  if (static_cast<int>(x.dim()) != in_arity) throw ArityError("DefinableFn::eval");
  Point out;
  out.coords.reserve(outs.size());
  for (const auto& e : outs) out.coords.push_back(e.eval(x, cfg));
  return out;
}

std::string DefinableFn::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (i) s += ", ";
    s += outs[i].str();
  }
  return s + ")";
}

// ------------------------------------------------------------- membership

bool OrdPullback::contains(const Point& x) const {
  if (static_cast<int>(x.dim()) != n) throw ArityError("OrdPullback::contains");
  return cond.eval(x.ord_vector());
}

bool CentredCell::contains(const Point& x) const {
  if (static_cast<int>(x.dim()) != n) throw ArityError("CentredCell::contains");
  for (int i = 0; i < n; ++i) {
    if (pinned[i] != x.coords[i].is_zero()) return false;
  }
  std::vector<ExtInt> ov = x.ord_vector();
  for (const auto& pr : pairs) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (pinned[i]) continue;
      if (acm(x.coords[i], level_m) != pr.tuple[i]) ok = false;
    }
    if (ok && pr.cond.eval(ov)) return true;
  }
  return false;
}

bool Cell::contains(const Point& x) const {
  if (static_cast<int>(x.dim()) != n) throw ArityError("Cell::contains");
  Point y{std::vector<PAdic>(x.coords.begin(), x.coords.end() - 1)};
  if (!base->contains(y)) return false;
  const FieldConfig& cfg = base->cfg;
  PAdic c = center.eval(y, cfg);
  OrdDiff d = ord_diff(x.coords[n - 1], c);
  if (coset_lambda.is_zero()) return d.kind != OrdDiff::Exact;
  if (d.kind != OrdDiff::Exact) return false;
  PAdic t = sub(x.coords[n - 1], c);
  if (!in_coset(t, coset_lambda, level_m, modulus_nn)) return false;
  if (lower || upper) {
    std::vector<ExtInt> ov = y.ord_vector();
    try {
      if (lower && !(lower->eval(ov) < t.ord())) return false;
      if (upper && !(t.ord() < upper->eval(ov))) return false;
    } catch (const NoActivePieceError&) {
      throw UnsupportedInputError(
          "cell bound does not extend to a base point with a zero coordinate");
    }
  }
  return true;
}

bool DefinableSet::contains(const Point& x) const {
  for (const auto& part : parts)
    if (std::visit([&](const auto& c) { return c.contains(x); }, part)) return true;
  return false;
}

DefinableSet times_zero(int k, const FieldConfig& cfg) {
  CentredCell c;
  c.n = k;
  c.pinned.assign(k, true);
  c.level_m = 1;
  c.pairs.push_back({std::vector<int64_t>(k, 0), Formula::verum(k)});
  return DefinableSet{k, cfg, {std::move(c)}};
}

// ---------------------------------------------------------------- closure

namespace {

// Joint unboundedness above of H in the variable set svars: the result holds
// at u iff points of H agreeing with u outside svars exist with all svars
// coordinates simultaneously arbitrarily large.  The result does not depend
// on the svars coordinates.
Formula ub_in(const Formula& h0, std::vector<int> svars) {
  int n = h0.arity();
  int N = n + 1;  // fresh threshold variable at the top slot
  std::vector<int> lift(n);
  std::iota(lift.begin(), lift.end(), 0);
  std::vector<Formula> parts = {h0.remapped(lift, N)};
  for (int s : svars) {
    parts.push_back(finite_var(s, N));
    parts.push_back(Formula::atom(LinTerm::variable(n, N), Rel::Lt,
                                  LinTerm::variable(s, N)));
  }
  Formula f = Formula::conjunction(std::move(parts));
  std::sort(svars.begin(), svars.end(), std::greater<int>());
  for (int s : svars) f = project_last(rotate_var_to_last(f, s));
  f = unbounded_above_last(f);
  // re-expand to the original arity, the eliminated slots staying unused
  std::sort(svars.begin(), svars.end());
  std::vector<int> expand;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(svars.begin(), svars.end(), i)) expand.push_back(i);
  return f.remapped(expand, n);
}

// Closure of { ord-vector satisfies g } inside (Z cup {+inf})^n.  movable
// lists coordinates that may newly become infinite; vanish_allowed says
// whether finite points of the set may already sit at infinity there (true
// for plain pullbacks, false for centred cells whose coordinates are
// nonzero by definition).
Formula closure_formula(const Formula& g, const std::vector<int>& movable,
                        bool vanish_allowed) {
  int n = g.arity();
  std::vector<Formula> parts = {g};
  int k = static_cast<int>(movable.size());
  for (int zbits = 1; zbits < (1 << k); ++zbits) {
    std::vector<int> z;
    for (int i = 0; i < k; ++i)
      if (zbits & (1 << i)) z.push_back(movable[i]);
    std::vector<Formula> inner;
    int zs = static_cast<int>(z.size());
    int tmax = vanish_allowed ? (1 << zs) - 1 : 0;
    for (int tbits = 0; tbits <= tmax; ++tbits) {
      std::vector<bool> tmask(n, false);
      std::vector<int> s2;
      for (int i = 0; i < zs; ++i) {
        if (tbits & (1 << i)) tmask[z[i]] = true;
        else s2.push_back(z[i]);
      }
      if (s2.empty()) continue;  // all-zero tails are ordinary membership
      Formula gt = tbits ? substitute_infinite(g, tmask) : g;
      Formula u = ub_in(gt, s2);
      if (!u.is_false()) inner.push_back(std::move(u));
    }
    if (inner.empty()) continue;
    std::vector<Formula> conj;
    for (int i : z) conj.push_back(infinite_var(i, n));
    conj.push_back(Formula::disjunction(std::move(inner)));
    parts.push_back(Formula::conjunction(std::move(conj)));
  }
  return Formula::disjunction(std::move(parts));
}

std::vector<Constituent> closure_parts(const OrdPullback& c) {
  std::vector<int> movable(c.n);
  std::iota(movable.begin(), movable.end(), 0);
  return {OrdPullback{c.n, closure_formula(c.cond, movable, true)}};
}

std::vector<Constituent> closure_parts(const CentredCell& c) {
  std::vector<int> un;
  for (int i = 0; i < c.n; ++i)
    if (!c.pinned[i]) un.push_back(i);
  std::vector<Constituent> out;
  int k = static_cast<int>(un.size());
  for (int zbits = 0; zbits < (1 << k); ++zbits) {
    std::vector<int> z;
    for (int i = 0; i < k; ++i)
      if (zbits & (1 << i)) z.push_back(un[i]);
    CentredCell cl;
    cl.n = c.n;
    cl.level_m = c.level_m;
    cl.pinned = c.pinned;
    for (int i : z) cl.pinned[i] = true;
    // pairs merge when their tuples agree after the newly pinned entries
    // are cleared
    std::vector<std::pair<std::vector<int64_t>, std::vector<Formula>>> merged;
    for (const auto& pr : c.pairs) {
      Formula cz = zbits == 0 ? pr.cond : ub_in(pr.cond, z);
      if (cz.is_false()) continue;
      std::vector<int64_t> tup = pr.tuple;
      for (int i : z) tup[i] = 0;
      bool found = false;
      for (auto& [t, fs] : merged)
        if (t == tup) {
          fs.push_back(cz);
          found = true;
          break;
        }
      if (!found) merged.push_back({std::move(tup), {std::move(cz)}});
    }
    for (auto& [t, fs] : merged)
      cl.pairs.push_back({std::move(t), Formula::disjunction(std::move(fs))});
    if (!cl.pairs.empty()) out.push_back(std::move(cl));
  }
  return out;
}

std::vector<Constituent> closure_parts(const Cell& c) {
  auto cl_base = std::make_shared<DefinableSet>(closure_of(*c.base));
  std::vector<Constituent> out;
  if (c.coset_lambda.is_zero()) {
    Cell g = c;
    g.base = cl_base;
    out.push_back(std::move(g));
    return out;
  }
  Cell main = c;
  main.base = cl_base;
  bool open_above = !c.upper.has_value();
  out.push_back(std::move(main));
  if (open_above) {
    // the limit sheet: unbounded fiber valuations accumulate on the graph
    Cell graph{c.n,    cl_base,   c.center,     c.center_lipschitz,
               PAdic(), c.level_m, c.modulus_nn, std::nullopt,
               std::nullopt};
    out.push_back(std::move(graph));
  }
  return out;
}

}  // namespace

DefinableSet closure_of(const DefinableSet& s) {
  DefinableSet out;
  out.n = s.n;
  out.cfg = s.cfg;
  for (const auto& part : s.parts) {
    std::vector<Constituent> cs =
        std::visit([&](const auto& c) { return closure_parts(c); }, part);
    for (auto& c : cs) out.parts.push_back(std::move(c));
  }
  return out;
}

Formula ord_image(const Constituent& c, int n) {
  if (const auto* p = std::get_if<OrdPullback>(&c)) {
    if (p->n != n) throw ArityError("ord_image");
    return p->cond;
  }
  if (const auto* cc = std::get_if<CentredCell>(&c)) {
    if (cc->n != n) throw ArityError("ord_image");
    std::vector<Formula> parts;
    for (const auto& pr : cc->pairs) parts.push_back(pr.cond);
    std::vector<Formula> conj = {Formula::disjunction(std::move(parts))};
    for (int i = 0; i < n; ++i)
      conj.push_back(cc->pinned[i] ? infinite_var(i, n) : finite_var(i, n));
    return Formula::conjunction(std::move(conj));
  }
  throw UnsupportedInputError("ord_image: fibered cells have no direct image");
}

// --------------------------------------------------------------- distance

namespace {

// Exact satisfiability of f over (Z cup {+inf})^arity, where only the
// coordinates flagged in may_inf are allowed to be infinite.  Finite
// satisfiability is decided by eliminating variables one by one.
bool sat_finite(Formula f) {
  while (f.arity() > 0) {
    if (f.is_false()) return false;
    if (f.is_true()) return true;
    f = project_last(f);
  }
  return f.eval(std::span<const ExtInt>{});
}

bool sat_ext(const Formula& f, const std::vector<bool>& may_inf) {
  std::vector<int> opt;
  for (int i = 0; i < f.arity(); ++i)
    if (may_inf[i]) opt.push_back(i);
  int k = static_cast<int>(opt.size());
  for (int bits = 0; bits < (1 << k); ++bits) {
    Formula g = f;
    if (bits) {
      std::vector<bool> mask(f.arity(), false);
      for (int i = 0; i < k; ++i)
        if (bits & (1 << i)) mask[opt[i]] = true;
      g = substitute_infinite(f, mask);
    }
    if (sat_finite(std::move(g))) return true;
  }
  return false;
}

// First digit where two angular classes mod p^m disagree, as a p-valuation.
int64_t class_split_depth(int64_t a, int64_t b, int64_t p, int m) {
  int64_t d = emod(a - b, power_int(p, m));
  if (d == 0) return m;  // no disagreement within the stored window
  int64_t e = 0;
  while (d % p == 0) {
    d /= p;
    ++e;
  }
  return e;
}

bool sat_at_pullback(const OrdPullback& c, const Point& x, int64_t t) {
  int n = c.n;
  std::vector<ExtInt> v = x.ord_vector();
  std::vector<Formula> parts = {c.cond};
  std::vector<bool> may_inf(n, false);
  for (int i = 0; i < n; ++i) {
    if (v[i] < ExtInt(t)) {
      parts.push_back(Formula::atom(LinTerm::variable(i, n), Rel::Eq,
                                    LinTerm::constant_term(v[i].value(), n)));
    } else {
      parts.push_back(Formula::atom(LinTerm::constant_term(t - 1, n), Rel::Lt,
                                    LinTerm::variable(i, n)));
      may_inf[i] = true;
    }
  }
  return sat_ext(Formula::conjunction(std::move(parts)), may_inf);
}

bool sat_at_centred(const CentredCell& c, const Point& x, int64_t t,
                    const FieldConfig& cfg) {
  int n = c.n;
  std::vector<ExtInt> v = x.ord_vector();
  for (int i = 0; i < n; ++i)
    if (c.pinned[i] && v[i] < ExtInt(t)) return false;
  for (const auto& pr : c.pairs) {
    Formula base = substitute_infinite(pr.cond, c.pinned);
    std::vector<Formula> parts = {std::move(base)};
    bool dead = false;
    for (int i = 0; i < n && !dead; ++i) {
      if (c.pinned[i]) continue;
      if (v[i] < ExtInt(t)) {
        int64_t a = acm(x.coords[i], c.level_m);
        if (a != pr.tuple[i] &&
            v[i].value() + class_split_depth(a, pr.tuple[i], cfg.p, c.level_m) < t) {
          dead = true;
          break;
        }
        parts.push_back(Formula::atom(LinTerm::variable(i, n), Rel::Eq,
                                      LinTerm::constant_term(v[i].value(), n)));
      } else {
        parts.push_back(Formula::atom(LinTerm::constant_term(t - 1, n), Rel::Lt,
                                      LinTerm::variable(i, n)));
        parts.push_back(finite_var(i, n));
      }
    }
    if (dead) continue;
    if (sat_ext(Formula::conjunction(std::move(parts)),
                std::vector<bool>(n, false)))
      return true;
  }
  return false;
}

bool sat_at_cell(const Cell& c, const Point& x, int64_t t, const FieldConfig& cfg) {
  if (!c.center_lipschitz)
    throw UnsupportedInputError("distance to a cell needs a short center");
  if (c.base->parts.size() != 1 ||
      !std::holds_alternative<OrdPullback>(c.base->parts[0]))
    throw UnsupportedInputError(
        "distance to a cell needs a single pullback base");
  const Formula& g = std::get<OrdPullback>(c.base->parts[0]).cond;
  int n = c.n;
  int nb = n - 1;
  Point y{std::vector<PAdic>(x.coords.begin(), x.coords.end() - 1)};
  std::vector<ExtInt> v = y.ord_vector();
  PAdic centre = c.center.eval(y, cfg);
  OrdDiff d = ord_diff(x.coords[nb], centre);
  ExtInt vt = d.kind == OrdDiff::Exact ? ExtInt(d.v) : ExtInt::pos_inf();

  std::vector<int> lift(nb);
  std::iota(lift.begin(), lift.end(), 0);

  std::vector<Formula> parts = {g.remapped(lift, n)};
  std::vector<bool> may_inf(n, false);
  for (int i = 0; i < nb; ++i) {
    if (v[i] < ExtInt(t)) {
      parts.push_back(Formula::atom(LinTerm::variable(i, n), Rel::Eq,
                                    LinTerm::constant_term(v[i].value(), n)));
    } else {
      parts.push_back(Formula::atom(LinTerm::constant_term(t - 1, n), Rel::Lt,
                                    LinTerm::variable(i, n)));
      may_inf[i] = true;
    }
  }

  if (c.coset_lambda.is_zero()) {
    // graph sheet: the fiber offset must already be deep enough
    if (vt < ExtInt(t)) return false;
    Formula base_only = erase_var(Formula::conjunction(std::move(parts)), nb);
    may_inf.pop_back();
    return sat_ext(base_only, may_inf);
  }

  parts.push_back(Formula::congruence(
      LinTerm::variable(nb, n),
      LinTerm::constant_term(c.coset_lambda.ord().value(), n), c.modulus_nn));
  if (c.lower)
    parts.push_back(pwl_cmp_var(*c.lower, Rel::Lt, nb, lift, n));
  if (c.upper) {
    // var < upper, phrased from the bound side as upper > var
    std::vector<Formula> ps;
    for (const auto& piece : c.upper->pieces()) {
      LinTerm lifted = piece.numer.remapped(lift, n);
      LinTerm vv = LinTerm::variable(nb, n).scaled(piece.divisor);
      ps.push_back(Formula::conjunction(
          {piece.guard.remapped(lift, n), Formula::atom(vv, Rel::Lt, lifted)}));
    }
    parts.push_back(Formula::disjunction(std::move(ps)));
  }

  if (vt < ExtInt(t)) {
    PAdic offset = sub(x.coords[nb], centre);
    int64_t a = acm(offset, c.level_m);
    int64_t b = acm(c.coset_lambda, c.level_m);
    if (a != b &&
        vt.value() + class_split_depth(a, b, cfg.p, c.level_m) < t)
      return false;
    parts.push_back(Formula::atom(LinTerm::variable(nb, n), Rel::Eq,
                                  LinTerm::constant_term(vt.value(), n)));
  } else {
    parts.push_back(Formula::atom(LinTerm::constant_term(t - 1, n), Rel::Lt,
                                  LinTerm::variable(nb, n)));
  }
  return sat_ext(Formula::conjunction(std::move(parts)), may_inf);
}

bool sat_at(const Constituent& part, const Point& x, int64_t t,
            const FieldConfig& cfg) {
  if (const auto* p = std::get_if<OrdPullback>(&part)) return sat_at_pullback(*p, x, t);
  if (const auto* cc = std::get_if<CentredCell>(&part)) return sat_at_centred(*cc, x, t, cfg);
  return sat_at_cell(std::get<Cell>(part), x, t, cfg);
}

}  // namespace

ExtInt distance_to_set(const Point& x, const DefinableSet& s,
                       const DefinableSet* closure_hint) {
  if (static_cast<int>(x.dim()) != s.n) throw ArityError("distance_to_set");
  if (s.parts.empty()) throw WindowExhaustedError("distance to the empty set");
  if (closure_hint) {
    if (closure_hint->contains(x)) return ExtInt::pos_inf();
  } else {
    if (closure_of(s).contains(x)) return ExtInt::pos_inf();
  }
  int64_t t_hi = s.cfg.vmax + s.cfg.precision + 8;
  int64_t t_lo = s.cfg.vmin - s.cfg.precision - 8;
  auto pred = [&](int64_t t) {
    for (const auto& part : s.parts)
      if (sat_at(part, x, t, s.cfg)) return true;
    return false;
  };
  if (!pred(t_lo))
    throw WindowExhaustedError("no set point within the valuation window");
  if (pred(t_hi))
    throw WindowExhaustedError("distance saturates the valuation window");
  // pred is monotone downward in t; find the largest t where it holds
  int64_t lo = t_lo, hi = t_hi;
  while (hi - lo > 1) {
    int64_t mid = lo + (hi - lo) / 2;
    (pred(mid) ? lo : hi) = mid;
  }
  return ExtInt(lo);
}

// ----------------------------------------------------------- monomialize

namespace {

std::vector<int64_t> unit_lifts(int64_t base_val, int from_m, int to_m, int64_t p) {
  // residues mod p^to_m that are congruent to base_val mod p^from_m
  std::vector<int64_t> out;
  int64_t lowmod = power_int(p, from_m);
  int64_t count = power_int(p, to_m - from_m);
  for (int64_t j = 0; j < count; ++j) out.push_back(base_val + j * lowmod);
  return out;
}

std::vector<int64_t> all_units(int m, int64_t p) {
  std::vector<int64_t> out;
  int64_t mod = power_int(p, m);
  for (int64_t u = 1; u < mod; ++u)
    if (u % p != 0) out.push_back(u);
  return out;
}

bool pullback_reaches_zero(const Formula& g) {
  int n = g.arity();
  for (int bits = 1; bits < (1 << n); ++bits) {
    std::vector<bool> mask(n, false);
    for (int i = 0; i < n; ++i)
      if (bits & (1 << i)) mask[i] = true;
    if (sat_finite(substitute_infinite(g, mask))) return true;
  }
  return false;
}

}  // namespace

CentredCell monomialize_cell(const Cell& cell, const FieldConfig& cfg) {
  if (!cell.center.is_zero_const())
    throw UnsupportedInputError("monomialize: cell must be centred at zero first");
  if (cell.base->parts.size() != 1)
    throw UnsupportedInputError("monomialize: base must be a single constituent");
  int n = cell.n, nb = n - 1;
  bool zero_fiber = cell.coset_lambda.is_zero();

  // base angular data: list of (tuple over nb, pinned mask, cond over nb)
  struct BasePair {
    std::vector<int64_t> tuple;
    Formula cond;
  };
  std::vector<bool> base_pinned(nb, false);
  std::vector<BasePair> base_pairs;
  int base_m = 1;
  if (const auto* p = std::get_if<OrdPullback>(&cell.base->parts[0])) {
    if (pullback_reaches_zero(p->cond))
      throw UnsupportedInputError(
          "monomialize: base contains points with zero coordinates");
    base_pairs.push_back({std::vector<int64_t>(nb, 1), p->cond});
  } else if (const auto* cc = std::get_if<CentredCell>(&cell.base->parts[0])) {
    base_pinned = cc->pinned;
    base_m = cc->level_m;
    for (const auto& pr : cc->pairs) base_pairs.push_back({pr.tuple, pr.cond});
  } else {
    throw UnsupportedInputError("monomialize: nested fibered bases unsupported");
  }
  bool base_is_pullback = std::holds_alternative<OrdPullback>(cell.base->parts[0]);

  int m_star = std::max(zero_fiber ? 1 : cell.level_m, base_m);

  CentredCell out;
  out.n = n;
  out.level_m = m_star;
  out.pinned = base_pinned;
  out.pinned.push_back(zero_fiber);

  std::vector<int> lift(nb);
  std::iota(lift.begin(), lift.end(), 0);

  std::vector<int64_t> fiber_classes;
  Formula fiber_cond = Formula::verum(n);
  if (!zero_fiber) {
    fiber_classes =
        unit_lifts(acm(cell.coset_lambda, cell.level_m), cell.level_m, m_star, cfg.p);
    std::vector<Formula> fc = {Formula::congruence(
        LinTerm::variable(nb, n),
        LinTerm::constant_term(cell.coset_lambda.ord().value(), n),
        cell.modulus_nn)};
    if (cell.lower) fc.push_back(pwl_cmp_var(*cell.lower, Rel::Lt, nb, lift, n));
    if (cell.upper) {
      std::vector<Formula> ps;
      for (const auto& piece : cell.upper->pieces()) {
        LinTerm lifted = piece.numer.remapped(lift, n);
        LinTerm vv = LinTerm::variable(nb, n).scaled(piece.divisor);
        ps.push_back(Formula::conjunction(
            {piece.guard.remapped(lift, n), Formula::atom(vv, Rel::Lt, lifted)}));
      }
      fc.push_back(Formula::disjunction(std::move(ps)));
    }
    fiber_cond = Formula::conjunction(std::move(fc));
  }

  for (const auto& bp : base_pairs) {
    Formula cond = Formula::conjunction({bp.cond.remapped(lift, n), fiber_cond});
    if (cond.is_false()) continue;
    // enumerate angular tuples of the base at the unified level
    std::vector<std::vector<int64_t>> tuples = {{}};
    for (int i = 0; i < nb; ++i) {
      std::vector<int64_t> choices;
      if (base_pinned[i]) choices = {0};
      else if (base_is_pullback) choices = all_units(m_star, cfg.p);
      else choices = unit_lifts(bp.tuple[i], base_m, m_star, cfg.p);
      std::vector<std::vector<int64_t>> next;
      for (const auto& t : tuples)
        for (int64_t u : choices) {
          auto t2 = t;
          t2.push_back(u);
          next.push_back(std::move(t2));
        }
      tuples = std::move(next);
      if (tuples.size() * (zero_fiber ? 1 : fiber_classes.size()) > 100000)
        throw TooLargeError("monomialize: too many angular classes");
    }
    for (const auto& t : tuples) {
      if (zero_fiber) {
        auto t2 = t;
        t2.push_back(0);
        out.pairs.push_back({std::move(t2), cond});
      } else {
        for (int64_t u : fiber_classes) {
          auto t2 = t;
          t2.push_back(u);
          out.pairs.push_back({std::move(t2), cond});
        }
      }
    }
  }
  if (out.pairs.empty()) throw EmptyCellError("monomialize: empty cell");
  return out;
}

std::string DefinableSet::str() const {
  std::ostringstream os;
  os << "set(n=" << n << ", parts=" << parts.size() << ")";
  return os.str();
}

}  // namespace qplip
