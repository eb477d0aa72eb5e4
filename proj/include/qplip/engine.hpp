#pragma once

#include "qplip/plan.hpp"

namespace qplip {

// Builds a plan whose evaluation retracts K^n onto the closure of s with
// Lipschitz constant 1 (never expanding the sup-metric distance).  The plan
// is the identity on members of s and lands in the closure everywhere.
//
// Throws EmptyCellError when s has no points, Condition1Error when a fibered
// piece's upper bound is not compatible with its base (the top-of-band
// witness would not be 1-Lipschitz), and UnsupportedInputError for shapes
// outside the constructor's reach.
PlanPtr build_retraction(const DefinableSet& s);

// A map given piecewise by coordinate expressions; the first piece whose set
// contains the input wins.
struct PiecewiseFn {
  int in_arity = 0;
  std::vector<std::pair<DefinableSet, std::vector<Expr>>> pieces;

  int out_arity() const;
  // Throws NoActivePieceError when no piece matches.
  Point eval(const Point& x, const FieldConfig& cfg) const;
};

// A total map obtained by precomposing a piecewise map with a retraction
// onto the closure of its domain.  When the original map is 1-Lipschitz on
// the domain, the extension is 1-Lipschitz on all of K^n.
struct ExtendedFn {
  PlanPtr pre;
  PiecewiseFn fn;
  // Closures of the pieces, used to evaluate at limit points of the domain.
  std::vector<DefinableSet> piece_closures;

  Point eval(const Point& x, const FieldConfig& cfg) const;
};

ExtendedFn extend_function(const PiecewiseFn& f, const DefinableSet& dom);

}  // namespace qplip
