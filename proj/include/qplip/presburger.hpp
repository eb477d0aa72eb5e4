#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qplip/errors.hpp"
#include "qplip/extint.hpp"

namespace qplip {

// Integer linear form  sum coeffs[i] * x_i + constant.
struct LinTerm {
  std::vector<int64_t> coeffs;
  int64_t constant = 0;

  static LinTerm variable(int i, int arity);
  static LinTerm constant_term(int64_t c, int arity);
  int arity() const { return static_cast<int>(coeffs.size()); }

  LinTerm scaled(int64_t k) const;
  LinTerm negated() const { return scaled(-1); }
  LinTerm plus_const(int64_t c) const;
  friend LinTerm operator+(const LinTerm& a, const LinTerm& b);
  friend LinTerm operator-(const LinTerm& a, const LinTerm& b);

  // Evaluation with infinite coordinates.  A coordinate at +-inf contributes
  // sign(coeff) * inf; mixing both directions in one term is indeterminate
  // and throws.
  ExtInt eval(std::span<const ExtInt> pt) const;

  bool depends_on(int i) const { return coeffs.at(i) != 0; }
  // Remap variables: position i moves to perm[i]; perm[i] = -1 asserts the
  // variable is unused.
  LinTerm remapped(const std::vector<int>& perm, int new_arity) const;
  std::string str() const;
  bool operator==(const LinTerm&) const = default;
};

enum class Rel { Lt, Le, Eq };

// Quantifier-free Presburger formula: comparisons and congruences of linear
// forms, closed under and/or/not.  Immutable, shared subtrees.
//
// Comparison atoms are evaluated side by side so that the extended-integer
// conventions apply:  +inf is greater than every integer, +inf = +inf holds,
// and a congruence with an infinite side is false.
class Formula {
 public:
  enum class Kind { True, False, Atom, Cong, Not, And, Or };

  static Formula verum(int arity);
  static Formula falsum(int arity);
  static Formula atom(LinTerm lhs, Rel rel, LinTerm rhs);
  // lhs = rhs (mod modulus), modulus >= 1
  static Formula congruence(LinTerm lhs, LinTerm rhs, int64_t modulus);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);

  int arity() const;
  Kind kind() const;
  const std::vector<Formula>& children() const;  // Not/And/Or
  const LinTerm& lhs() const;
  const LinTerm& rhs() const;
  Rel rel() const;
  int64_t modulus() const;

  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }

  bool eval(std::span<const ExtInt> pt) const;
  bool eval_int(std::span<const int64_t> pt) const;

  Formula remapped(const std::vector<int>& perm, int new_arity) const;
  std::string str() const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// "x_i is finite" and "x_i = +inf" as formulas, via the convention that a
// congruence fails at infinity.
Formula finite_var(int i, int arity);
Formula infinite_var(int i, int arity);

// Piecewise linear function with exact integer division.  Each piece is
// guard -> numer / divisor; construction arranges that the divisor divides
// the value on the guard.  Pieces are expected to be pairwise disjoint;
// evaluation checks and reports ambiguity.
struct PwlPiece {
  Formula guard;
  LinTerm numer;
  int64_t divisor = 1;
};

class PwlFn {
 public:
  PwlFn(int arity, std::vector<PwlPiece> pieces);
  static PwlFn linear(LinTerm t);
  static PwlFn constant(int64_t c, int arity);

  int arity() const { return arity_; }
  const std::vector<PwlPiece>& pieces() const { return pieces_; }

  ExtInt eval(std::span<const ExtInt> pt) const;
  int64_t eval_int(std::span<const int64_t> pt) const;

  PwlFn plus_const(int64_t c) const;
  PwlFn scaled(int64_t k) const;
  // pointwise floor((f + shift) / d), d >= 1
  PwlFn floor_div(int64_t d, int64_t shift) const;
  static PwlFn pointwise_max(const PwlFn& a, const PwlFn& b);
  static PwlFn pointwise_min(const PwlFn& a, const PwlFn& b);
  PwlFn remapped(const std::vector<int>& perm, int new_arity) const;
  std::string str() const;

 private:
  int arity_;
  std::vector<PwlPiece> pieces_;
};

// {pt : a(pt) rel b(pt)} as a formula (exact; divisors cleared by
// cross-multiplication).
Formula pwl_cmp(const PwlFn& a, Rel rel, const PwlFn& b);
// {pt : a(pt_base) rel pt[var]} where the pwl reads its arguments through
// var_map: pwl argument j is pt[var_map[j]].
Formula pwl_cmp_var(const PwlFn& a, Rel rel, int var, const std::vector<int>& var_map,
                    int arity);

// One cell of a last-variable decomposition over Z^n:
//   base(u) and v = residue (mod modulus) and lower(u) < v < upper(u)
// with either bound optional.  base is over the first n-1 variables and
// implies that some v satisfies the cell (surjective projection).
struct PresCell {
  Formula base;
  int64_t modulus = 1;
  int64_t residue = 0;
  std::optional<PwlFn> lower, upper;

  bool contains(std::span<const ExtInt> pt) const;
  std::string str() const;
};

// Partition the integer solution set of f into finitely many cells in the
// last variable.  Cells are pairwise disjoint and cover exactly the
// solutions; bases absorb congruence instantiation and nonemptiness
// conditions.  Finite-integer semantics: callers handle infinite patterns
// separately.
std::vector<PresCell> decompose_last(const Formula& f);

// G_i = G and (x_j <= x_i for all j): cover of G by max-coordinate pieces.
std::vector<Formula> split_max_coordinate(const Formula& g);

// Exists-projection of the last variable (exact).
Formula project_last(const Formula& f);

// Formula over the first n-1 variables: the set of u whose fiber
// {v : f(u, v)} is unbounded above.
Formula unbounded_above_last(const Formula& f);

// Substitute +inf for the variables in mask (size = arity).  The result does
// not depend on masked variables.  Throws if an atom becomes indeterminate
// while still reachable.
Formula substitute_infinite(const Formula& f, const std::vector<bool>& mask);

// Drop variable idx, which the formula must not depend on.
Formula erase_var(const Formula& f, int idx);

// Move variable idx to the last position (used before decompose_last).
Formula rotate_var_to_last(const Formula& f, int idx);

// Bounded satisfiability: any integer point in [lo, hi]^arity?  Conjoined
// equality pins are exploited, otherwise plain enumeration.
bool sat_in_box(const Formula& f, int64_t lo, int64_t hi);

// A box margin that makes sat_in_box conclusive for the formulas built here:
// largest absolute constant plus the lcm of the moduli plus slack.
int64_t box_margin(const Formula& f);

int64_t lcm64(int64_t a, int64_t b);

}  // namespace qplip
