#include "mulag/mudiff.hpp"

#include <algorithm>
#include <cmath>

namespace mulag {

const GeneratorSet& HyperPoint::generators() const {
  if (coords.empty()) throw ConfigError("empty HyperPoint");
  return coords.front().generators();
}

int HyperPoint::trunc_order() const {
  if (coords.empty()) throw ConfigError("empty HyperPoint");
  return coords.front().trunc_order();
}

HyperPoint HyperPoint::standard(const std::vector<double>& xs, const GeneratorSet& gens, int k) {
  HyperPoint p;
  p.coords.reserve(xs.size());
  for (double v : xs) p.coords.push_back(Hyperreal::constant(v, gens, k));
  return p;
}

namespace {

struct StepContext {
  GeneratorSet gens;              // point's generators plus the step generator
  int k_eval;                     // K + step_power
  int k_result;                   // original K
  Monomial step_mono;
  Hyperreal step;                 // the step in the evaluation context
  std::vector<Hyperreal> coords;  // lifted point
};

StepContext make_context(const HyperPoint& x, const DiffConfig& cfg) {
  if (cfg.step_power < 1) throw ConfigError("step power must be positive");
  GeneratorSet gens = x.generators().with(cfg.step_name);
  int k_eval = x.trunc_order() + cfg.step_power;
  std::size_t step_index = *gens.index_of(cfg.step_name);
  StepContext c{std::move(gens),
                k_eval,
                x.trunc_order(),
                Monomial::generator(step_index, cfg.step_power),
                Hyperreal(GeneratorSet{}, 0),  // re-set below
                {}};
  c.step = Hyperreal::generator(step_index, c.gens, c.k_eval, cfg.step_power);
  c.coords.reserve(x.coords.size());
  for (const auto& h : x.coords) c.coords.push_back(h.extended(c.gens, c.k_eval));
  return c;
}

// Exact truncated difference quotient. The step^0 part of the numerator
// cancels term-for-term for DSL expressions; div_filtered absorbs the float
// residue of that cancellation and rejects any appreciable remainder.
Hyperreal quotient(const Hyperreal& numerator, const StepContext& c) {
  double noise = 1e-12 * std::max(1.0, numerator.max_abs_coeff());
  return numerator.div_filtered(c.step_mono, noise).truncated(c.k_result);
}

}  // namespace

Hyperreal partial(const Expr& f, const HyperPoint& x, std::size_t i, const DiffConfig& cfg) {
  if (i >= x.arity()) throw ConfigError("partial: variable index out of range");
  StepContext c = make_context(x, cfg);

  std::vector<Hyperreal> shifted = c.coords;
  shifted[i] = shifted[i] + c.step;
  Hyperreal num = eval(f, shifted, c.gens, c.k_eval) - eval(f, c.coords, c.gens, c.k_eval);
  return quotient(num, c);
}

Gradient gradient(const Expr& f, const HyperPoint& x, const DiffConfig& cfg) {
  Gradient g;
  g.step_name = cfg.step_name;
  g.step_power = cfg.step_power;
  g.partials.reserve(x.arity());
  for (std::size_t i = 0; i < x.arity(); ++i) g.partials.push_back(partial(f, x, i, cfg));
  return g;
}

Hyperreal directional(const Expr& f, const HyperPoint& x, const HyperPoint& u,
                      const DiffConfig& cfg) {
  if (u.arity() != x.arity()) throw ConfigError("directional: dimension mismatch");
  StepContext c = make_context(x, cfg);

  std::vector<Hyperreal> shifted = c.coords;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = shifted[i] + c.step * u.coords[i].extended(c.gens, c.k_eval);
  }
  Hyperreal num = eval(f, shifted, c.gens, c.k_eval) - eval(f, c.coords, c.gens, c.k_eval);
  return quotient(num, c);
}

bool is_m_critical(const Expr& f, const HyperPoint& x, const DiffConfig& cfg) {
  for (std::size_t i = 0; i < x.arity(); ++i) {
    if (!partial(f, x, i, cfg).is_infinitesimal(cfg.tol)) return false;
  }
  return true;
}

}  // namespace mulag
