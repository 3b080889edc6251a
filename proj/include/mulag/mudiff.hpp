// Mu-differentiation: infinitesimal difference-quotient partials, gradient
// assembly, directional derivatives, and m-critical-point testing.
//
// The difference quotient (f(x + h e_i) - f(x)) / h is computed exactly in
// the truncated series ring, with h a dedicated step generator appended to
// the problem's generator set. Gradients are meaningful only modulo
// componentwise infinitesimal perturbation; compare with approx_eq.

#pragma once

#include <string>
#include <vector>

#include "mulag/expr.hpp"
#include "mulag/hyperreal.hpp"

namespace mulag {

/// Nearstandard point: all coordinates finite (guaranteed by Hyperreal's
/// representation), sharing one generator set and truncation order.
struct HyperPoint {
  std::vector<Hyperreal> coords;

  std::size_t arity() const { return coords.size(); }
  const GeneratorSet& generators() const;
  int trunc_order() const;

  /// Lift a standard real vector.
  static HyperPoint standard(const std::vector<double>& xs, const GeneratorSet& gens, int k);
};

struct DiffConfig {
  std::string step_name = "h";  // appended to the generator set if absent
  int step_power = 1;           // step monomial = step_name^step_power
  double delta_f = 0.0;         // assumed lower bound on admissible steps; recorded, not checked
  Tolerance tol;
};

struct Gradient {
  std::vector<Hyperreal> partials;
  std::string step_name;
  int step_power = 1;
};

/// The i-th mu-partial of f at x: exact truncated difference quotient.
/// Internally evaluates at truncation order K + step_power so the division
/// by the step loses no retained degree; the result is truncated back to K.
Hyperreal partial(const Expr& f, const HyperPoint& x, std::size_t i, const DiffConfig& cfg = {});

Gradient gradient(const Expr& f, const HyperPoint& x, const DiffConfig& cfg = {});

/// Directional derivative (f(x + h u) - f(x)) / h for finite u.
Hyperreal directional(const Expr& f, const HyperPoint& x, const HyperPoint& u,
                      const DiffConfig& cfg = {});

/// True iff every gradient component is infinitesimal.
bool is_m_critical(const Expr& f, const HyperPoint& x, const DiffConfig& cfg = {});

}  // namespace mulag
