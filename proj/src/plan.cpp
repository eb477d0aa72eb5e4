#include "qplip/plan.hpp"

#include <algorithm>

namespace qplip {

static int64_t emod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

PAdic sub_or_zero(const PAdic& a, const PAdic& b) {
  if (ord_diff(a, b).kind != OrdDiff::Exact) return PAdic::zero(a.cfg());
  return sub(a, b);
}

PAdic add_or_zero(const PAdic& a, const PAdic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (ord_diff(a, -b).kind != OrdDiff::Exact) return PAdic::zero(a.cfg());
  return add(a, b);
}

// ------------------------------------------------------------ constructors

static std::shared_ptr<RetractionPlan> node(RetractionPlan::Kind k, int n) {
  auto p = std::make_shared<RetractionPlan>();
  p->kind = k;
  p->n = n;
  return p;
}

PlanPtr RetractionPlan::identity(int n) { return node(Kind::Identity, n); }

PlanPtr RetractionPlan::compose(PlanPtr first, PlanPtr second) {
  if (first->n != second->n) throw ArityError("compose: dimension mismatch");
  if (first->kind == Kind::Identity) return second;
  if (second->kind == Kind::Identity) return first;
  auto p = node(Kind::Compose, first->n);
  p->children = {std::move(first), std::move(second)};
  return p;
}

PlanPtr RetractionPlan::glue(std::vector<PlanPtr> children,
                             std::vector<DefinableSet> targets) {
  if (children.empty() || children.size() != targets.size())
    throw UnsupportedInputError("glue: children and targets must match");
  if (children.size() == 1) return children[0];
  auto p = node(Kind::Glue, children[0]->n);
  for (const auto& c : children)
    if (c->n != p->n) throw ArityError("glue: dimension mismatch");
  p->children = std::move(children);
  p->target_closures.reserve(targets.size());
  for (const auto& t : targets) p->target_closures.push_back(closure_of(t));
  p->targets = std::move(targets);
  return p;
}

PlanPtr RetractionPlan::pin_lift(std::vector<bool> mask, PlanPtr inner) {
  int n = static_cast<int>(mask.size());
  int free = 0;
  for (bool b : mask)
    if (!b) ++free;
  if (inner->n != free) throw ArityError("pin_lift: inner dimension mismatch");
  auto p = node(Kind::PinLift, n);
  p->pin_mask = std::move(mask);
  p->children = {std::move(inner)};
  return p;
}

PlanPtr RetractionPlan::product_lift(int axis, PlanPtr inner, int n) {
  if (inner->n != n - 1) throw ArityError("product_lift: inner dimension mismatch");
  auto p = node(Kind::ProductLift, n);
  p->axis = axis;
  p->children = {std::move(inner)};
  return p;
}

PlanPtr RetractionPlan::continuous_ext(PlanPtr inner) {
  auto p = node(Kind::ContinuousExt, inner->n);
  p->children = {std::move(inner)};
  return p;
}

PlanPtr RetractionPlan::angular(int level_m, std::vector<int64_t> target_tuple,
                                std::vector<std::vector<int64_t>> mult_table,
                                Formula domain) {
  int n = static_cast<int>(target_tuple.size());
  if (static_cast<int>(mult_table.size()) != n)
    throw ArityError("angular: table per coordinate");
  auto p = node(Kind::Angular, n);
  p->level_m = level_m;
  p->target_tuple = std::move(target_tuple);
  p->mult_table = std::move(mult_table);
  p->domain = std::move(domain);
  return p;
}

PlanPtr RetractionPlan::residue_shift(int axis, int64_t a, int64_t b,
                                      Formula source_cond, Formula target_cond,
                                      int n) {
  if (a < 1) throw UnsupportedInputError("residue_shift: modulus < 1");
  auto p = node(Kind::ResidueShift, n);
  p->axis = axis;
  p->shift_a = a;
  p->shift_b = b;
  p->source_cond = std::move(source_cond);
  p->target_cond = std::move(target_cond);
  return p;
}

PlanPtr RetractionPlan::band_1d(int band_case, int64_t alpha, int64_t beta) {
  if (band_case < 1 || band_case > 4) throw UnsupportedInputError("band_1d: case");
  auto p = node(Kind::Band1D, 1);
  p->band_case = band_case;
  p->alpha = alpha;
  p->beta = beta;
  return p;
}

PlanPtr RetractionPlan::recenter(int axis, DefinableFn center, PlanPtr base_plan,
                                 PlanPtr inner) {
  int n = inner->n;
  if (base_plan->n != n - 1) throw ArityError("recenter: base plan dimension");
  if (center.in_arity != n - 1 || center.out_arity() != 1)
    throw ArityError("recenter: center must map the base to one coordinate");
  auto p = node(Kind::Recenter, n);
  p->axis = axis;
  p->center = std::move(center);
  p->children = {std::move(base_plan), std::move(inner)};
  return p;
}

PlanPtr RetractionPlan::fiber_band(int axis, Formula keep_cond, PlanPtr hplan) {
  auto p = node(Kind::FiberBand, hplan->n);
  p->axis = axis;
  p->keep_cond = std::move(keep_cond);
  p->children = {std::move(hplan)};
  return p;
}

// ------------------------------------------------------------------- eval

namespace {

Point drop_coord(const Point& x, int axis) {
  Point y;
  y.coords.reserve(x.dim() - 1);
  for (int i = 0; i < static_cast<int>(x.dim()); ++i)
    if (i != axis) y.coords.push_back(x.coords[i]);
  return y;
}

Point insert_coord(const Point& y, int axis, PAdic v) {
  Point x;
  x.coords.reserve(y.dim() + 1);
  for (int i = 0; i < static_cast<int>(y.dim()) + 1; ++i) {
    if (i == axis) x.coords.push_back(v);
    else x.coords.push_back(y.coords[i < axis ? i : i - 1]);
  }
  return x;
}

}  // namespace

Point RetractionPlan::eval(const Point& x, const FieldConfig& cfg) const {
  if (static_cast<int>(x.dim()) != n) throw ArityError("plan eval: dimension");
  switch (kind) {
    case Kind::Identity:
      return x;

    case Kind::Compose:
      return children[1]->eval(children[0]->eval(x, cfg), cfg);

    case Kind::Glue: {
      std::string key = x.str();
      auto it = glue_cache_.find(key);
      int best = -1;
      if (it != glue_cache_.end()) {
        best = it->second;
      } else {
        ExtInt best_d = ExtInt::neg_inf();
        bool any = false;
        for (std::size_t i = 0; i < targets.size(); ++i) {
          ExtInt d;
          try {
            d = distance_to_set(x, targets[i], &target_closures[i]);
          } catch (const WindowExhaustedError&) {
            continue;  // farther than the window: never the nearest branch
          }
          any = true;
          if (best < 0 || best_d < d) {
            best = static_cast<int>(i);
            best_d = d;
          }
        }
        if (!any)
          throw WindowExhaustedError("glue: no branch target within the window");
        glue_cache_[key] = best;
      }
      return children[best]->eval(x, cfg);
    }

    case Kind::PinLift: {
      Point inner_x;
      for (int i = 0; i < n; ++i)
        if (!pin_mask[i]) inner_x.coords.push_back(x.coords[i]);
      Point inner_y = children[0]->eval(inner_x, cfg);
      Point out;
      int j = 0;
      for (int i = 0; i < n; ++i)
        out.coords.push_back(pin_mask[i] ? PAdic::zero(cfg) : inner_y.coords[j++]);
      return out;
    }

    case Kind::ProductLift: {
      Point y = children[0]->eval(drop_coord(x, axis), cfg);
      return insert_coord(y, axis, x.coords[axis]);
    }

    case Kind::ContinuousExt:
      return children[0]->eval(x, cfg);

    case Kind::Angular: {
      Point out = x;
      for (int i = 0; i < n; ++i) {
        if (x.coords[i].is_zero() || mult_table[i].empty()) continue;
        int64_t c = acm(x.coords[i], level_m);
        int64_t u = mult_table[i].at(c);
        if (u == 1) continue;
        out.coords[i] = mul(x.coords[i], PAdic::make(u, 1, cfg));
      }
      return out;
    }

    case Kind::ResidueShift: {
      const PAdic& v = x.coords[axis];
      Point out = x;
      if (!v.is_zero()) {
        int64_t i = emod(shift_b - v.ord().value(), shift_a);
        if (i != 0) out.coords[axis] = mul(v, PAdic::power_of_p(i, cfg));
      }
      if (target_cond && !target_cond->eval(out.ord_vector()))
        throw NoValidShiftError("residue shift left the target band");
      return out;
    }

    case Kind::Band1D: {
      const PAdic& v = x.coords[0];
      ExtInt o = v.ord();
      switch (band_case) {
        case 1:
          return x;
        case 2:
          if (ExtInt(alpha) < o) return x;
          return Point{{PAdic::zero(cfg)}};
        case 3:
          if (ExtInt(alpha) < o && o < ExtInt(beta)) return x;
          return Point{{PAdic::power_of_p(beta - 1, cfg)}};
        case 4:
          if (o < ExtInt(beta)) return x;
          return Point{{PAdic::power_of_p(beta - 1, cfg)}};
        default:
          throw InternalError("band_1d: bad case");
      }
    }

    case Kind::Recenter: {
      Point y = drop_coord(x, axis);
      PAdic c = center->eval(children[0]->eval(y, cfg), cfg).coords[0];
      Point w = insert_coord(y, axis, sub_or_zero(x.coords[axis], c));
      Point w2 = children[1]->eval(w, cfg);
      Point y2 = drop_coord(w2, axis);
      PAdic c2 = center->eval(children[0]->eval(y2, cfg), cfg).coords[0];
      return insert_coord(y2, axis, add_or_zero(w2.coords[axis], c2));
    }

    case Kind::FiberBand: {
      if (keep_cond->eval(x.ord_vector())) return x;
      return children[0]->eval(x, cfg);
    }
  }
  throw InternalError("plan eval: bad kind");
}

std::size_t RetractionPlan::node_count() const {
  std::size_t c = 1;
  for (const auto& ch : children) c += ch->node_count();
  return c;
}

std::string RetractionPlan::kind_name() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Compose: return "compose";
    case Kind::Glue: return "glue";
    case Kind::PinLift: return "pin";
    case Kind::ProductLift: return "product";
    case Kind::ContinuousExt: return "extend";
    case Kind::Angular: return "angular";
    case Kind::ResidueShift: return "shift";
    case Kind::Band1D: return "band1";
    case Kind::Recenter: return "recenter";
    case Kind::FiberBand: return "band";
    default: return "?";
  }
}

}  // namespace qplip
