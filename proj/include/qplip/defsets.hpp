#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "qplip/padic.hpp"
#include "qplip/presburger.hpp"

namespace qplip {

// Expression trees for definable maps K^n -> K.  Besides field arithmetic
// there is one transcendental-looking leaf: a power of p whose exponent is a
// piecewise-linear function of the valuation vector of the input point.  That
// leaf sends any point with a zero coordinate to 0, which keeps it continuous
// on the closures it is used on.
class Expr {
 public:
  enum class Kind { Const, Var, Add, Sub, Mul, Neg, PowOrd };

  static Expr constant(PAdic v, int arity);
  static Expr zero(int arity);
  static Expr variable(int i, int arity);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr negate(Expr a);
  static Expr pow_ord(PwlFn exponent);

  int arity() const;
  Kind kind() const;
  bool is_zero_const() const;
  const PAdic& const_value() const;
  int var_index() const;
  const std::vector<Expr>& children() const;
  const PwlFn& exponent() const;

  // Throws PrecisionLossError when cancellation eats the value.
  PAdic eval(const Point& x, const FieldConfig& cfg) const;

  std::string str() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// A definable map K^n -> K^m given coordinatewise by expressions.
struct DefinableFn {
  int in_arity = 0;
  std::vector<Expr> outs;

  int out_arity() const { return static_cast<int>(outs.size()); }
  Point eval(const Point& x, const FieldConfig& cfg) const;
  std::string str() const;
};

// ------------------------------------------------------------ constituents

// Preimage of a valuation-vector condition: { x : cond(ord x_1..ord x_n) }.
// The condition is evaluated with +inf entries for zero coordinates.
struct OrdPullback {
  int n = 0;
  Formula cond;

  bool contains(const Point& x) const;
};

// One angular class of a centred cell: a full-length tuple of angular
// components mod p^level (0 exactly at pinned coordinates) plus a condition
// on the valuation vector.
struct AngularPair {
  std::vector<int64_t> tuple;
  Formula cond;
};

// Finite union of monomial-type pieces around the origin: coordinates in
// `pinned` are frozen to 0, the rest are nonzero with prescribed angular
// component, and the valuations satisfy the pair condition.
struct CentredCell {
  int n = 0;
  std::vector<bool> pinned;
  int level_m = 1;
  std::vector<AngularPair> pairs;

  bool contains(const Point& x) const;
};

struct DefinableSet;

// Fibered piece over a lower-dimensional base: last coordinate sits in
// center(y) + lambda * Q(level_m, modulus_nn) with strict valuation bounds
// (when present) read off the valuation vector of the base point.
// lambda == 0 means the piece is the graph of the center.
struct Cell {
  int n = 0;
  std::shared_ptr<const DefinableSet> base;
  Expr center;
  bool center_lipschitz = true;
  PAdic coset_lambda;
  int level_m = 1;
  int modulus_nn = 1;
  std::optional<PwlFn> lower, upper;

  bool contains(const Point& x) const;
};

using Constituent = std::variant<OrdPullback, CentredCell, Cell>;

struct DefinableSet {
  int n = 0;
  FieldConfig cfg;
  std::vector<Constituent> parts;

  bool contains(const Point& x) const;
  std::string str() const;
};

// The origin of K^k as a definable set.
DefinableSet times_zero(int k, const FieldConfig& cfg);

// Topological closure, constituent by constituent.  Throws
// UnsupportedInputError for cells whose bound functions degenerate on the
// boundary of the base.
DefinableSet closure_of(const DefinableSet& s);

// Valuation-vector image of a pullback or centred constituent as a formula
// over n valuation variables (+inf rows for pinned coordinates).
Formula ord_image(const Constituent& c, int n);

// Valuation of the distance from x to the set: the largest t such that some
// point of the set is within valuation t of x, +inf iff x lies in the
// closure.  `closure_hint`, when given, must be closure_of(s).
ExtInt distance_to_set(const Point& x, const DefinableSet& s,
                       const DefinableSet* closure_hint = nullptr);

// Rewrites a fibered cell with zero center and a single pullback or centred
// base constituent as a centred cell, raising the angular level as needed.
CentredCell monomialize_cell(const Cell& cell, const FieldConfig& cfg);

}  // namespace qplip
