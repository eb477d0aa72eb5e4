#include "qplip/presburger.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qplip {

static int64_t emod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

int64_t lcm64(int64_t a, int64_t b) {
  int64_t g = std::gcd(a, b);
  int64_t l = a / g * b;
  if (l > 1000000) throw TooLargeError("modulus lcm too large");
  return l;
}

// ---------------------------------------------------------------- LinTerm

LinTerm LinTerm::variable(int i, int arity) {
  LinTerm t;
  t.coeffs.assign(arity, 0);
  t.coeffs.at(i) = 1;
  return t;
}

LinTerm LinTerm::constant_term(int64_t c, int arity) {
  LinTerm t;
  t.coeffs.assign(arity, 0);
  t.constant = c;
  return t;
}

LinTerm LinTerm::scaled(int64_t k) const {
  LinTerm t = *this;
  for (auto& c : t.coeffs) c *= k;
  t.constant *= k;
  return t;
}

LinTerm LinTerm::plus_const(int64_t c) const {
  LinTerm t = *this;
  t.constant += c;
  return t;
}

static void require_arity(int a, int b, const char* where) {
  if (a != b) throw ArityError(std::string(where) + ": arity mismatch");
}

LinTerm operator+(const LinTerm& a, const LinTerm& b) {
  require_arity(a.arity(), b.arity(), "LinTerm+");
  LinTerm t = a;
  for (int i = 0; i < t.arity(); ++i) t.coeffs[i] += b.coeffs[i];
  t.constant += b.constant;
  return t;
}

LinTerm operator-(const LinTerm& a, const LinTerm& b) { return a + b.negated(); }

ExtInt LinTerm::eval(std::span<const ExtInt> pt) const {
  require_arity(arity(), static_cast<int>(pt.size()), "LinTerm::eval");
  bool pos = false, neg = false;
  __int128 fin = constant;
  for (int i = 0; i < arity(); ++i) {
    if (coeffs[i] == 0) continue;
    const ExtInt& x = pt[i];
    if (x.is_finite()) {
      fin += static_cast<__int128>(coeffs[i]) * x.value();
    } else {
      bool up = x.is_pos_inf() == (coeffs[i] > 0);
      (up ? pos : neg) = true;
    }
  }
  if (pos && neg)
    throw UnsupportedInputError("indeterminate linear term at infinite point");
  if (pos) return ExtInt::pos_inf();
  if (neg) return ExtInt::neg_inf();
  if (fin > INT64_MAX / 2 || fin < INT64_MIN / 2)
    throw TooLargeError("linear term overflow");
  return ExtInt(static_cast<int64_t>(fin));
}

LinTerm LinTerm::remapped(const std::vector<int>& perm, int new_arity) const {
  require_arity(arity(), static_cast<int>(perm.size()), "LinTerm::remapped");
  LinTerm t;
  t.coeffs.assign(new_arity, 0);
  t.constant = constant;
  for (int i = 0; i < arity(); ++i) {
    if (coeffs[i] == 0) continue;
    if (perm[i] < 0) throw InternalError("remap drops a used variable");
    t.coeffs.at(perm[i]) += coeffs[i];
  }
  return t;
}

std::string LinTerm::str() const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < arity(); ++i) {
    if (coeffs[i] == 0) continue;
    int64_t c = coeffs[i];
    if (first) {
      if (c == -1) os << '-';
      else if (c != 1) os << c << '*';
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c != 1 && c != -1) os << std::abs(c) << '*';
    }
    os << 'g' << (i + 1);
    first = false;
  }
  if (first) {
    os << constant;
  } else if (constant != 0) {
    os << (constant < 0 ? " - " : " + ") << std::abs(constant);
  }
  return os.str();
}

// ---------------------------------------------------------------- Formula

struct Formula::Node {
  Kind kind;
  int arity = 0;
  LinTerm lhs, rhs;
  Rel rel = Rel::Lt;
  int64_t modulus = 1;
  std::vector<Formula> children;
};

Formula Formula::verum(int arity) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::True;
  n->arity = arity;
  return Formula(std::move(n));
}

Formula Formula::falsum(int arity) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::False;
  n->arity = arity;
  return Formula(std::move(n));
}

static bool term_is_const(const LinTerm& t) {
  for (int64_t c : t.coeffs)
    if (c != 0) return false;
  return true;
}

Formula Formula::atom(LinTerm lhs, Rel rel, LinTerm rhs) {
  require_arity(lhs.arity(), rhs.arity(), "Formula::atom");
  if (term_is_const(lhs) && term_is_const(rhs)) {
    int64_t a = lhs.constant, b = rhs.constant;
    bool v = rel == Rel::Lt ? a < b : rel == Rel::Le ? a <= b : a == b;
    return v ? verum(lhs.arity()) : falsum(lhs.arity());
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->arity = lhs.arity();
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->rel = rel;
  return Formula(std::move(n));
}

Formula Formula::congruence(LinTerm lhs, LinTerm rhs, int64_t modulus) {
  require_arity(lhs.arity(), rhs.arity(), "Formula::congruence");
  if (modulus < 1) throw UnsupportedInputError("congruence modulus < 1");
  if (term_is_const(lhs) && term_is_const(rhs))
    return emod(lhs.constant - rhs.constant, modulus) == 0 ? verum(lhs.arity())
                                                           : falsum(lhs.arity());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cong;
  n->arity = lhs.arity();
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->modulus = modulus;
  return Formula(std::move(n));
}

Formula Formula::negation(Formula f) {
  if (f.is_true()) return falsum(f.arity());
  if (f.is_false()) return verum(f.arity());
  if (f.kind() == Kind::Not) return f.children()[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->arity = f.arity();
  n->children.push_back(std::move(f));
  return Formula(std::move(n));
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  if (fs.empty()) throw UnsupportedInputError("conjunction of nothing");
  int ar = fs[0].arity();
  std::vector<Formula> kept;
  for (auto& f : fs) {
    require_arity(f.arity(), ar, "conjunction");
    if (f.is_false()) return falsum(ar);
    if (f.is_true()) continue;
    if (f.kind() == Kind::And) {
      for (const auto& c : f.children()) kept.push_back(c);
    } else {
      kept.push_back(std::move(f));
    }
  }
  if (kept.empty()) return verum(ar);
  if (kept.size() == 1) return kept[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->arity = ar;
  n->children = std::move(kept);
  return Formula(std::move(n));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  if (fs.empty()) throw UnsupportedInputError("disjunction of nothing");
  int ar = fs[0].arity();
  std::vector<Formula> kept;
  for (auto& f : fs) {
    require_arity(f.arity(), ar, "disjunction");
    if (f.is_true()) return verum(ar);
    if (f.is_false()) continue;
    if (f.kind() == Kind::Or) {
      for (const auto& c : f.children()) kept.push_back(c);
    } else {
      kept.push_back(std::move(f));
    }
  }
  if (kept.empty()) return falsum(ar);
  if (kept.size() == 1) return kept[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->arity = ar;
  n->children = std::move(kept);
  return Formula(std::move(n));
}

int Formula::arity() const { return node_->arity; }
Formula::Kind Formula::kind() const { return node_->kind; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const LinTerm& Formula::lhs() const { return node_->lhs; }
const LinTerm& Formula::rhs() const { return node_->rhs; }
Rel Formula::rel() const { return node_->rel; }
int64_t Formula::modulus() const { return node_->modulus; }

bool Formula::eval(std::span<const ExtInt> pt) const {
  switch (kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: {
      ExtInt a = lhs().eval(pt), b = rhs().eval(pt);
      switch (rel()) {
        case Rel::Lt: return a < b;
        case Rel::Le: return a <= b;
        case Rel::Eq: return a == b;
      }
      return false;
    }
    case Kind::Cong: {
      ExtInt a = lhs().eval(pt), b = rhs().eval(pt);
      if (!a.is_finite() || !b.is_finite()) return false;
      return emod(a.value() - b.value(), modulus()) == 0;
    }
    case Kind::Not: return !children()[0].eval(pt);
    case Kind::And:
      for (const auto& c : children())
        if (!c.eval(pt)) return false;
      return true;
    case Kind::Or:
      for (const auto& c : children())
        if (c.eval(pt)) return true;
      return false;
  }
  return false;
}

bool Formula::eval_int(std::span<const int64_t> pt) const {
  std::vector<ExtInt> v(pt.begin(), pt.end());
  return eval(v);
}

Formula Formula::remapped(const std::vector<int>& perm, int new_arity) const {
  switch (kind()) {
    case Kind::True: return verum(new_arity);
    case Kind::False: return falsum(new_arity);
    case Kind::Atom:
      return atom(lhs().remapped(perm, new_arity), rel(), rhs().remapped(perm, new_arity));
    case Kind::Cong:
      return congruence(lhs().remapped(perm, new_arity), rhs().remapped(perm, new_arity),
                        modulus());
    case Kind::Not: return negation(children()[0].remapped(perm, new_arity));
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> cs;
      cs.reserve(children().size());
      for (const auto& c : children()) cs.push_back(c.remapped(perm, new_arity));
      return kind() == Kind::And ? conjunction(std::move(cs)) : disjunction(std::move(cs));
    }
  }
  throw InternalError("remap: bad kind");
}

std::string Formula::str() const {
  switch (kind()) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: {
      const char* op = rel() == Rel::Lt ? " < " : rel() == Rel::Le ? " <= " : " = ";
      return lhs().str() + op + rhs().str();
    }
    case Kind::Cong:
      return lhs().str() + " mod " + std::to_string(modulus()) + " = " + rhs().str();
    case Kind::Not: return "!(" + children()[0].str() + ")";
    case Kind::And:
    case Kind::Or: {
      std::string sep = kind() == Kind::And ? " & " : " | ";
      std::string out = "(";
      for (std::size_t i = 0; i < children().size(); ++i) {
        if (i) out += sep;
        out += children()[i].str();
      }
      return out + ")";
    }
  }
  return "?";
}

Formula finite_var(int i, int arity) {
  return Formula::congruence(LinTerm::variable(i, arity),
                             LinTerm::constant_term(0, arity), 1);
}

Formula infinite_var(int i, int arity) {
  return Formula::negation(finite_var(i, arity));
}

// ----------------------------------------------------------------- PwlFn

PwlFn::PwlFn(int arity, std::vector<PwlPiece> pieces)
    : arity_(arity), pieces_(std::move(pieces)) {
  for (const auto& p : pieces_) {
    require_arity(p.guard.arity(), arity_, "PwlFn");
    require_arity(p.numer.arity(), arity_, "PwlFn");
    if (p.divisor < 1) throw UnsupportedInputError("PwlFn divisor < 1");
  }
}

PwlFn PwlFn::linear(LinTerm t) {
  int ar = t.arity();
  std::vector<PwlPiece> ps;
  ps.push_back({Formula::verum(ar), std::move(t), 1});
  return PwlFn(ar, std::move(ps));
}

PwlFn PwlFn::constant(int64_t c, int arity) {
  return linear(LinTerm::constant_term(c, arity));
}

ExtInt PwlFn::eval(std::span<const ExtInt> pt) const {
  bool have = false;
  ExtInt val(0);
  for (const auto& p : pieces_) {
    if (!p.guard.eval(pt)) continue;
    ExtInt raw = p.numer.eval(pt);
    ExtInt v;
    if (raw.is_finite()) {
      if (emod(raw.value(), p.divisor) != 0)
        throw InternalError("PwlFn: divisor does not divide value on guard");
      v = ExtInt(raw.value() / p.divisor);
    } else {
      v = raw;
    }
    if (have && v != val)
      throw OverlappingGuardsError("PwlFn: guards overlap with different values");
    have = true;
    val = v;
  }
  if (!have) throw NoActivePieceError("PwlFn: no active piece");
  return val;
}

int64_t PwlFn::eval_int(std::span<const int64_t> pt) const {
  std::vector<ExtInt> v(pt.begin(), pt.end());
  return eval(v).value();
}

PwlFn PwlFn::plus_const(int64_t c) const {
  std::vector<PwlPiece> ps;
  ps.reserve(pieces_.size());
  for (const auto& p : pieces_)
    ps.push_back({p.guard, p.numer.plus_const(c * p.divisor), p.divisor});
  return PwlFn(arity_, std::move(ps));
}

PwlFn PwlFn::scaled(int64_t k) const {
  std::vector<PwlPiece> ps;
  ps.reserve(pieces_.size());
  for (const auto& p : pieces_) ps.push_back({p.guard, p.numer.scaled(k), p.divisor});
  return PwlFn(arity_, std::move(ps));
}

PwlFn PwlFn::floor_div(int64_t d, int64_t shift) const {
  if (d < 1) throw UnsupportedInputError("floor_div: d < 1");
  if (d == 1) return plus_const(shift);
  std::vector<PwlPiece> ps;
  for (const auto& p : pieces_) {
    int64_t D = p.divisor * d;
    LinTerm shifted = p.numer.plus_const(shift * p.divisor);
    for (int64_t j = 0; j < D; ++j) {
      Formula g = Formula::conjunction(
          {p.guard, Formula::congruence(shifted, LinTerm::constant_term(j, arity_), D)});
      if (g.is_false()) continue;
      ps.push_back({std::move(g), shifted.plus_const(-j), D});
    }
  }
  return PwlFn(arity_, std::move(ps));
}

static Formula piece_cmp(const PwlPiece& a, Rel rel, const PwlPiece& b) {
  return Formula::atom(a.numer.scaled(b.divisor), rel, b.numer.scaled(a.divisor));
}

PwlFn PwlFn::pointwise_max(const PwlFn& a, const PwlFn& b) {
  require_arity(a.arity(), b.arity(), "pointwise_max");
  std::vector<PwlPiece> ps;
  for (const auto& pa : a.pieces()) {
    for (const auto& pb : b.pieces()) {
      Formula both = Formula::conjunction({pa.guard, pb.guard});
      if (both.is_false()) continue;
      Formula ge = piece_cmp(pb, Rel::Le, pa);
      ps.push_back({Formula::conjunction({both, ge}), pa.numer, pa.divisor});
      ps.push_back({Formula::conjunction({both, Formula::negation(ge)}), pb.numer,
                    pb.divisor});
    }
  }
  return PwlFn(a.arity(), std::move(ps));
}

PwlFn PwlFn::pointwise_min(const PwlFn& a, const PwlFn& b) {
  require_arity(a.arity(), b.arity(), "pointwise_min");
  std::vector<PwlPiece> ps;
  for (const auto& pa : a.pieces()) {
    for (const auto& pb : b.pieces()) {
      Formula both = Formula::conjunction({pa.guard, pb.guard});
      if (both.is_false()) continue;
      Formula le = piece_cmp(pa, Rel::Le, pb);
      ps.push_back({Formula::conjunction({both, le}), pa.numer, pa.divisor});
      ps.push_back({Formula::conjunction({both, Formula::negation(le)}), pb.numer,
                    pb.divisor});
    }
  }
  return PwlFn(a.arity(), std::move(ps));
}

PwlFn PwlFn::remapped(const std::vector<int>& perm, int new_arity) const {
  std::vector<PwlPiece> ps;
  ps.reserve(pieces_.size());
  for (const auto& p : pieces_)
    ps.push_back({p.guard.remapped(perm, new_arity), p.numer.remapped(perm, new_arity),
                  p.divisor});
  return PwlFn(new_arity, std::move(ps));
}

std::string PwlFn::str() const {
  std::ostringstream os;
  os << "pwl{";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) os << "; ";
    os << pieces_[i].guard.str() << " -> (" << pieces_[i].numer.str() << ")";
    if (pieces_[i].divisor != 1) os << "/" << pieces_[i].divisor;
  }
  os << "}";
  return os.str();
}

Formula pwl_cmp(const PwlFn& a, Rel rel, const PwlFn& b) {
  require_arity(a.arity(), b.arity(), "pwl_cmp");
  std::vector<Formula> parts;
  for (const auto& pa : a.pieces())
    for (const auto& pb : b.pieces())
      parts.push_back(
          Formula::conjunction({pa.guard, pb.guard, piece_cmp(pa, rel, pb)}));
  return Formula::disjunction(std::move(parts));
}

Formula pwl_cmp_var(const PwlFn& a, Rel rel, int var, const std::vector<int>& var_map,
                    int arity) {
  std::vector<Formula> parts;
  for (const auto& pa : a.pieces()) {
    LinTerm lifted = pa.numer.remapped(var_map, arity);
    LinTerm v = LinTerm::variable(var, arity).scaled(pa.divisor);
    parts.push_back(Formula::conjunction(
        {pa.guard.remapped(var_map, arity), Formula::atom(lifted, rel, v)}));
  }
  return Formula::disjunction(std::move(parts));
}

// ----------------------------------------------------- last-variable cells

namespace {

// Internal literal: strict "t < 0" or congruence "t = r (mod d)".
struct Lit {
  bool cong = false;
  LinTerm t;
  int64_t d = 0, r = 0;
};

using Conj = std::vector<Lit>;

bool lit_const_value(const Lit& l, bool& out) {
  for (int64_t c : l.t.coeffs)
    if (c != 0) return false;
  out = l.cong ? emod(l.t.constant - l.r, l.d) == 0 : l.t.constant < 0;
  return true;
}

// Canonical form: congruences fold the constant into the residue and flip
// the sign so the leading coefficient is positive.
Lit normalize_lit(Lit l) {
  if (!l.cong) return l;
  l.r = emod(l.r - l.t.constant, l.d);
  l.t.constant = 0;
  for (int64_t c : l.t.coeffs) {
    if (c == 0) continue;
    if (c < 0) {
      l.t = l.t.negated();
      l.r = emod(-l.r, l.d);
    }
    break;
  }
  return l;
}

// Append with contradiction/subsumption pruning.  Returns false if the
// conjunction became unsatisfiable.
bool conj_push(Conj& c, const Lit& raw) {
  Lit l = normalize_lit(raw);
  bool cv;
  if (lit_const_value(l, cv)) return cv;
  for (auto& e : c) {
    if (e.cong != l.cong) continue;
    if (l.cong) {
      if (e.t.coeffs != l.t.coeffs) continue;
      int64_t g = std::gcd(e.d, l.d);
      if (emod(e.r - l.r, g) != 0) return false;  // incompatible classes
      if (l.d % e.d == 0) {
        e = l;  // strictly finer class
        return true;
      }
      if (e.d % l.d == 0) return true;  // already finer
      continue;
    }
    if (e.t.coeffs == l.t.coeffs) {
      // two upper bounds on the same term: keep the tighter one
      if (l.t.constant > e.t.constant) e.t.constant = l.t.constant;
      return true;
    }
    if (e.t.coeffs == l.t.negated().coeffs && e.t.constant + l.t.constant >= -1)
      return false;  // t < -c1 together with -t < -c2 leaves no integer
  }
  c.push_back(l);
  return true;
}

std::optional<Conj> conj_merge(const Conj& a, const Conj& b) {
  Conj out = a;
  for (const auto& l : b)
    if (!conj_push(out, l)) return std::nullopt;
  return out;
}

constexpr std::size_t kDnfCap = 200000;

// Disjunction of conjunctions for f (positive) or its complement.
std::vector<Conj> dnf(const Formula& f, bool pos) {
  using K = Formula::Kind;
  auto lit_strict = [](LinTerm t) { return Lit{false, std::move(t), 0, 0}; };
  switch (f.kind()) {
    case K::True: return pos ? std::vector<Conj>{{}} : std::vector<Conj>{};
    case K::False: return pos ? std::vector<Conj>{} : std::vector<Conj>{{}};
    case K::Atom: {
      LinTerm d = f.lhs() - f.rhs();
      switch (f.rel()) {
        case Rel::Lt:
          if (pos) return {{lit_strict(d)}};
          return {{lit_strict(d.negated().plus_const(-1))}};  // rhs <= lhs
        case Rel::Le:
          if (pos) return {{lit_strict(d.plus_const(-1))}};
          return {{lit_strict(d.negated())}};  // rhs < lhs
        case Rel::Eq:
          if (pos) {
            Conj c;
            if (!conj_push(c, lit_strict(d.plus_const(-1)))) return {};
            if (!conj_push(c, lit_strict(d.negated().plus_const(-1)))) return {};
            return {c};
          }
          return {{lit_strict(d)}, {lit_strict(d.negated())}};
      }
      return {};
    }
    case K::Cong: {
      LinTerm t = f.lhs() - f.rhs();
      if (pos) return {{Lit{true, t, f.modulus(), 0}}};
      std::vector<Conj> out;
      for (int64_t r = 1; r < f.modulus(); ++r) out.push_back({Lit{true, t, f.modulus(), r}});
      return out;
    }
    case K::Not: return dnf(f.children()[0], !pos);
    case K::And:
    case K::Or: {
      bool conj_mode = (f.kind() == K::And) == pos;
      std::vector<Conj> acc;
      bool first = true;
      for (const auto& ch : f.children()) {
        std::vector<Conj> part = dnf(ch, pos);
        if (conj_mode) {
          if (first) {
            acc = std::move(part);
            first = false;
          } else {
            std::vector<Conj> next;
            for (const auto& a : acc)
              for (const auto& b : part)
                if (auto m = conj_merge(a, b)) next.push_back(std::move(*m));
            if (next.size() > kDnfCap) throw TooLargeError("dnf blow-up");
            acc = std::move(next);
          }
        } else {
          for (auto& c : part) acc.push_back(std::move(c));
          first = false;
        }
        if (acc.size() > kDnfCap) throw TooLargeError("dnf blow-up");
      }
      if (conj_mode && first) acc = {{}};
      return acc;
    }
  }
  return {};
}

// Pairwise-disjoint refinement of the complement of D ("first failing
// literal" split; congruence negations split into their residue classes).
std::vector<Conj> neg_options(const Conj& D) {
  std::vector<Conj> out;
  Conj prefix;
  for (const auto& l : D) {
    if (l.cong) {
      for (int64_t r = 0; r < l.d; ++r) {
        if (r == l.r) continue;
        Conj c = prefix;
        if (conj_push(c, Lit{true, l.t, l.d, r})) out.push_back(std::move(c));
      }
    } else {
      Conj c = prefix;
      if (conj_push(c, Lit{false, l.t.negated().plus_const(-1), 0, 0}))
        out.push_back(std::move(c));
    }
    if (!conj_push(prefix, l)) break;  // remainder unreachable
  }
  return out;
}

std::vector<Conj> disjoint_dnf(const Formula& f) {
  std::vector<Conj> ds = dnf(f, true);
  std::vector<Conj> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<Conj> cur = {ds[i]};
    for (std::size_t j = 0; j < i && !cur.empty(); ++j) {
      std::optional<std::vector<Conj>> neg;  // expanded only when needed
      std::vector<Conj> next;
      for (const auto& c : cur) {
        if (!conj_merge(c, ds[j])) {
          next.push_back(c);  // provably disjoint already
          continue;
        }
        if (!neg) neg = neg_options(ds[j]);
        for (const auto& n : *neg)
          if (auto m = conj_merge(c, n)) next.push_back(std::move(*m));
      }
      if (next.size() > kDnfCap) throw TooLargeError("disjoint dnf blow-up");
      cur = std::move(next);
    }
    for (auto& c : cur) out.push_back(std::move(c));
  }
  return out;
}

LinTerm drop_last(const LinTerm& t) {
  LinTerm r = t;
  r.coeffs.pop_back();
  return r;
}

Formula lit_formula(const Lit& l, int arity) {
  if (l.cong)
    return Formula::congruence(l.t, LinTerm::constant_term(l.r, arity), l.d);
  return Formula::atom(l.t, Rel::Lt, LinTerm::constant_term(0, arity));
}

void cells_of_conj(const Conj& raw, int n, std::vector<PresCell>& out) {
  Conj C;
  for (const auto& l : raw)
    if (!conj_push(C, l)) return;
  std::vector<Lit> base;
  std::vector<PwlFn> lowers, uppers;
  std::vector<Lit> vcongs;
  for (const auto& l : C) {
    int64_t c = l.t.coeffs[n - 1];
    if (l.cong) {
      if (emod(c, l.d) == 0) {
        Lit b = l;
        b.t.coeffs[n - 1] = 0;
        base.push_back(b);
      } else {
        vcongs.push_back(l);
      }
    } else if (c == 0) {
      base.push_back(l);
    } else {
      LinTerm R = drop_last(l.t);
      R.coeffs.resize(n - 1);
      if (c > 0) {
        // c v + R < 0  <=>  v < floor((-R - 1)/c) + 1
        uppers.push_back(
            PwlFn::linear(R.negated().plus_const(-1)).floor_div(c, 0).plus_const(1));
      } else {
        // c v + R < 0  <=>  v > floor(R / -c)
        lowers.push_back(PwlFn::linear(R).floor_div(-c, 0));
      }
    }
  }
  int64_t A = 1;
  for (const auto& l : vcongs) A = lcm64(A, l.d);

  for (int64_t b = 0; b < A; ++b) {
    std::vector<Formula> parts;
    for (const auto& l : base) {
      Lit bl = l;
      bl.t = drop_last(bl.t);
      parts.push_back(lit_formula(bl, n - 1));
    }
    bool dead = false;
    for (const auto& l : vcongs) {
      int64_t c = l.t.coeffs[n - 1];
      LinTerm R = drop_last(l.t);
      Formula g = Formula::congruence(
          R, LinTerm::constant_term(emod(l.r - c * b, l.d), n - 1), l.d);
      if (g.is_false()) { dead = true; break; }
      parts.push_back(std::move(g));
    }
    if (dead) continue;

    std::optional<PwlFn> lower, upper;
    for (const auto& f : lowers)
      lower = lower ? PwlFn::pointwise_max(*lower, f) : f;
    for (const auto& f : uppers)
      upper = upper ? PwlFn::pointwise_min(*upper, f) : f;

    if (lower && upper) {
      // Some v = b (mod A) strictly between the bounds must exist:
      // floor((upper-1-b)/A) >= floor((lower-b)/A) + 1.
      PwlFn hi = upper->floor_div(A, -1 - b);
      PwlFn lo = lower->floor_div(A, -b).plus_const(1);
      parts.push_back(pwl_cmp(lo, Rel::Le, hi));
    }
    Formula U = parts.empty() ? Formula::verum(n - 1)
                              : Formula::conjunction(std::move(parts));
    if (U.is_false()) continue;
    out.push_back(PresCell{std::move(U), A, b, std::move(lower), std::move(upper)});
  }
}

}  // namespace

std::vector<PresCell> decompose_last(const Formula& f) {
  int n = f.arity();
  if (n < 1) throw ArityError("decompose_last: needs at least one variable");
  std::vector<PresCell> cells;
  for (const Conj& C : disjoint_dnf(f)) cells_of_conj(C, n, cells);
  return cells;
}

bool PresCell::contains(std::span<const ExtInt> pt) const {
  for (const ExtInt& x : pt)
    if (!x.is_finite()) return false;
  std::size_t n = pt.size();
  std::span<const ExtInt> u = pt.first(n - 1);
  if (!base.eval(u)) return false;
  int64_t v = pt[n - 1].value();
  if (emod(v - residue, modulus) != 0) return false;
  if (lower && !(lower->eval(u) < ExtInt(v))) return false;
  if (upper && !(ExtInt(v) < upper->eval(u))) return false;
  return true;
}

std::string PresCell::str() const {
  std::ostringstream os;
  os << "[base " << base.str() << "; v = " << residue << " mod " << modulus;
  if (lower) os << "; " << lower->str() << " < v";
  if (upper) os << "; v < " << upper->str();
  os << "]";
  return os.str();
}

std::vector<Formula> split_max_coordinate(const Formula& g) {
  int n = g.arity();
  std::vector<Formula> out;
  for (int i = 0; i < n; ++i) {
    std::vector<Formula> parts = {g};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      parts.push_back(Formula::atom(LinTerm::variable(j, n), Rel::Le,
                                    LinTerm::variable(i, n)));
    }
    out.push_back(Formula::conjunction(std::move(parts)));
  }
  return out;
}

Formula project_last(const Formula& f) {
  int n = f.arity();
  std::vector<Formula> bases;
  for (auto& c : decompose_last(f)) bases.push_back(std::move(c.base));
  if (bases.empty()) return Formula::falsum(n - 1);
  return Formula::disjunction(std::move(bases));
}

Formula unbounded_above_last(const Formula& f) {
  int n = f.arity();
  std::vector<Formula> bases;
  for (auto& c : decompose_last(f))
    if (!c.upper) bases.push_back(std::move(c.base));
  if (bases.empty()) return Formula::falsum(n - 1);
  return Formula::disjunction(std::move(bases));
}

// ------------------------------------------------- infinite substitution

namespace {

enum class SideKind { Fin, Pos, Neg, Indet };

SideKind side_kind(const LinTerm& t, const std::vector<bool>& mask) {
  bool pos = false, neg = false;
  for (int i = 0; i < t.arity(); ++i) {
    if (!mask[i] || t.coeffs[i] == 0) continue;
    (t.coeffs[i] > 0 ? pos : neg) = true;
  }
  if (pos && neg) return SideKind::Indet;
  if (pos) return SideKind::Pos;
  if (neg) return SideKind::Neg;
  return SideKind::Fin;
}

LinTerm strip_masked(const LinTerm& t, const std::vector<bool>& mask) {
  LinTerm r = t;
  for (int i = 0; i < r.arity(); ++i)
    if (mask[i]) r.coeffs[i] = 0;
  return r;
}

// nullopt = indeterminate
std::optional<Formula> subst_inf(const Formula& f, const std::vector<bool>& mask) {
  using K = Formula::Kind;
  int n = f.arity();
  switch (f.kind()) {
    case K::True:
    case K::False: return f;
    case K::Atom: {
      SideKind a = side_kind(f.lhs(), mask), b = side_kind(f.rhs(), mask);
      if (a == SideKind::Indet || b == SideKind::Indet) return std::nullopt;
      if (a == SideKind::Fin && b == SideKind::Fin)
        return Formula::atom(strip_masked(f.lhs(), mask), f.rel(),
                             strip_masked(f.rhs(), mask));
      auto decided = [&](bool v) {
        return v ? Formula::verum(n) : Formula::falsum(n);
      };
      switch (f.rel()) {
        case Rel::Lt:
          if (a == SideKind::Pos) return decided(false);
          if (a == SideKind::Neg) return decided(b != SideKind::Neg);
          return decided(b == SideKind::Pos);  // a finite
        case Rel::Le:
          if (a == SideKind::Pos) return decided(b == SideKind::Pos);
          if (a == SideKind::Neg) return decided(true);
          return decided(b == SideKind::Pos);
        case Rel::Eq: return decided(a == b);
      }
      return std::nullopt;
    }
    case K::Cong: {
      SideKind a = side_kind(f.lhs(), mask), b = side_kind(f.rhs(), mask);
      if (a == SideKind::Indet || b == SideKind::Indet) return std::nullopt;
      if (a != SideKind::Fin || b != SideKind::Fin) return Formula::falsum(n);
      return Formula::congruence(strip_masked(f.lhs(), mask),
                                 strip_masked(f.rhs(), mask), f.modulus());
    }
    case K::Not: {
      auto c = subst_inf(f.children()[0], mask);
      if (!c) return std::nullopt;
      return Formula::negation(std::move(*c));
    }
    case K::And:
    case K::Or: {
      bool conj = f.kind() == K::And;
      std::vector<Formula> kept;
      bool indet = false;
      for (const auto& ch : f.children()) {
        auto c = subst_inf(ch, mask);
        if (!c) { indet = true; continue; }
        if (conj && c->is_false()) return Formula::falsum(n);
        if (!conj && c->is_true()) return Formula::verum(n);
        kept.push_back(std::move(*c));
      }
      if (indet) return std::nullopt;
      if (kept.empty()) return conj ? Formula::verum(n) : Formula::falsum(n);
      return conj ? Formula::conjunction(std::move(kept))
                  : Formula::disjunction(std::move(kept));
    }
  }
  return std::nullopt;
}

}  // namespace

Formula substitute_infinite(const Formula& f, const std::vector<bool>& mask) {
  if (static_cast<int>(mask.size()) != f.arity())
    throw ArityError("substitute_infinite: mask size");
  auto r = subst_inf(f, mask);
  if (!r)
    throw UnsupportedInputError(
        "substitute_infinite: indeterminate atom at infinite coordinates");
  return *r;
}

Formula erase_var(const Formula& f, int idx) {
  int n = f.arity();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i < idx ? i : i - 1;
  perm[idx] = -1;
  return f.remapped(perm, n - 1);
}

Formula rotate_var_to_last(const Formula& f, int idx) {
  int n = f.arity();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) {
    if (i < idx) perm[i] = i;
    else if (i == idx) perm[i] = n - 1;
    else perm[i] = i - 1;
  }
  return f.remapped(perm, n);
}

// ------------------------------------------------------------- sat_in_box

namespace {

void collect_pins(const Formula& f, std::vector<std::optional<int64_t>>& pins,
                  bool& unsat) {
  using K = Formula::Kind;
  if (f.kind() == K::And) {
    for (const auto& c : f.children()) collect_pins(c, pins, unsat);
    return;
  }
  if (f.kind() != K::Atom || f.rel() != Rel::Eq) return;
  LinTerm d = f.lhs() - f.rhs();
  int var = -1;
  for (int i = 0; i < d.arity(); ++i) {
    if (d.coeffs[i] == 0) continue;
    if (var >= 0) return;  // more than one variable
    var = i;
  }
  if (var < 0) return;
  int64_t c = d.coeffs[var];
  if (d.constant % c != 0) { unsat = true; return; }
  int64_t v = -d.constant / c;
  if (pins[var] && *pins[var] != v) { unsat = true; return; }
  pins[var] = v;
}

bool sat_rec(const Formula& f, std::vector<ExtInt>& pt,
             const std::vector<std::optional<int64_t>>& pins, std::size_t i,
             int64_t lo, int64_t hi) {
  if (i == pt.size()) return f.eval(pt);
  if (pins[i]) {
    pt[i] = ExtInt(*pins[i]);
    return sat_rec(f, pt, pins, i + 1, lo, hi);
  }
  for (int64_t v = lo; v <= hi; ++v) {
    pt[i] = ExtInt(v);
    if (sat_rec(f, pt, pins, i + 1, lo, hi)) return true;
  }
  return false;
}

}  // namespace

bool sat_in_box(const Formula& f, int64_t lo, int64_t hi) {
  if (f.is_false()) return false;
  int n = f.arity();
  if (n == 0) return f.eval(std::span<const ExtInt>{});
  std::vector<std::optional<int64_t>> pins(n);
  bool unsat = false;
  collect_pins(f, pins, unsat);
  if (unsat) return false;
  for (int i = 0; i < n; ++i)
    if (pins[i] && (*pins[i] < lo || *pins[i] > hi)) return false;
  std::vector<ExtInt> pt(n, ExtInt(0));
  return sat_rec(f, pt, pins, 0, lo, hi);
}

namespace {

void margin_walk(const Formula& f, int64_t& maxc, int64_t& l) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::Cong: {
      auto upd = [&](const LinTerm& t) {
        maxc = std::max(maxc, std::abs(t.constant));
        for (int64_t c : t.coeffs) maxc = std::max(maxc, std::abs(c));
      };
      upd(f.lhs());
      upd(f.rhs());
      if (f.kind() == K::Cong) l = lcm64(l, f.modulus());
      break;
    }
    case K::Not:
    case K::And:
    case K::Or:
      for (const auto& c : f.children()) margin_walk(c, maxc, l);
      break;
    default: break;
  }
}

}  // namespace

int64_t box_margin(const Formula& f) {
  int64_t maxc = 0, l = 1;
  margin_walk(f, maxc, l);
  return maxc + l + 4;
}

}  // namespace qplip
