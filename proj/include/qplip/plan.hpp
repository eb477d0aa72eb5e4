#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qplip/defsets.hpp"

namespace qplip {

struct RetractionPlan;
using PlanPtr = std::shared_ptr<const RetractionPlan>;

// An executable recipe for a 1-Lipschitz retraction of K^n onto the closure
// of a definable set.  Plans form a tree; every node is total on K^n.
//
// Node shapes:
//   Identity      no data; also the sole inhabitant of dimension 0
//   Compose       children [first, second], evaluated first-then-second
//   Glue          children + per-child target sets (with their closures);
//                 a point goes to the child whose target is nearest, ties
//                 resolved to the lowest index
//   PinLift       freezes the masked coordinates to 0 and retracts the rest
//                 with the inner plan
//   ProductLift   applies the inner plan to every coordinate except `axis`
//   ContinuousExt bookkeeping wrapper: the inner map extends continuously
//   Angular       per-coordinate unit multipliers moving each angular class
//                 onto the target tuple; identity on the target class
//   ResidueShift  multiplies the axis coordinate by p^i, i = (b - ord) mod a,
//                 landing its valuation in the residue class b mod a
//   Band1D        one-variable placement into a constant valuation band
//   Recenter      conjugation by (y, t) -> (y, t - c(sigma(y))): children
//                 [base plan sigma, inner]; the center c rides along
//   FiberBand     keeps the point when its valuation vector satisfies the
//                 closed band condition, otherwise hands it to the witness
//                 plan (children [hplan])
struct RetractionPlan {
  enum class Kind {
    Identity,
    Compose,
    Glue,
    PinLift,
    ProductLift,
    ContinuousExt,
    Angular,
    ResidueShift,
    Band1D,
    Recenter,
    FiberBand
  };

  Kind kind = Kind::Identity;
  int n = 0;

  std::vector<PlanPtr> children;

  // Glue
  std::vector<DefinableSet> targets;
  std::vector<DefinableSet> target_closures;

  // PinLift
  std::vector<bool> pin_mask;

  // ProductLift / ResidueShift / Recenter / FiberBand
  int axis = -1;

  // Angular
  int level_m = 1;
  std::vector<int64_t> target_tuple;
  std::vector<std::vector<int64_t>> mult_table;  // [coord][class mod p^m]
  std::optional<Formula> domain;

  // ResidueShift
  int64_t shift_a = 1, shift_b = 0;
  std::optional<Formula> source_cond, target_cond;  // over n valuations

  // Band1D: 1 identity, 2 lower bound only, 3 both bounds, 4 upper only
  int band_case = 1;
  int64_t alpha = 0, beta = 0;

  // Recenter
  std::optional<DefinableFn> center;

  // FiberBand
  std::optional<Formula> keep_cond;

  Point eval(const Point& x, const FieldConfig& cfg) const;

  static PlanPtr identity(int n);
  static PlanPtr compose(PlanPtr first, PlanPtr second);
  static PlanPtr glue(std::vector<PlanPtr> children, std::vector<DefinableSet> targets);
  static PlanPtr pin_lift(std::vector<bool> mask, PlanPtr inner);
  static PlanPtr product_lift(int axis, PlanPtr inner, int n);
  static PlanPtr continuous_ext(PlanPtr inner);
  static PlanPtr angular(int level_m, std::vector<int64_t> target_tuple,
                         std::vector<std::vector<int64_t>> mult_table,
                         Formula domain);
  static PlanPtr residue_shift(int axis, int64_t a, int64_t b, Formula source_cond,
                               Formula target_cond, int n);
  static PlanPtr band_1d(int band_case, int64_t alpha, int64_t beta);
  static PlanPtr recenter(int axis, DefinableFn center, PlanPtr base_plan,
                          PlanPtr inner);
  static PlanPtr fiber_band(int axis, Formula keep_cond, PlanPtr hplan);

  std::size_t node_count() const;
  std::string kind_name() const;

 private:
  mutable std::unordered_map<std::string, int> glue_cache_;
};

// Difference that treats values equal at the stored precision as equal.
PAdic sub_or_zero(const PAdic& a, const PAdic& b);
PAdic add_or_zero(const PAdic& a, const PAdic& b);

}  // namespace qplip
