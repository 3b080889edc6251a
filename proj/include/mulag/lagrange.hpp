// Lagrange multipliers for perturbed problems: stationarity of the
// augmented function F = mu*f + sum_j lambda_j*g_j, solved on the standard
// shadows by multistart damped Newton, then lifted back and verified
// against the full hyperreal residual.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mulag/expr.hpp"
#include "mulag/mudiff.hpp"

namespace mulag {

/// Square stationarity system on the shadows. Unknown ordering:
///   normal form:  x_1..x_n, lambda_1..lambda_m           (n+m unknowns)
///   general form: x_1..x_n, lambda_1..lambda_m, mu       (n+m+1 unknowns;
///                 the sphere normalization mu^2 + |lambda|^2 = 1 closes it)
struct AugmentedSystem {
  std::size_t n = 0;
  std::size_t m = 0;
  bool general = false;
  std::vector<Expr::Ptr> residuals;                 // n + m (+1 normalization)
  std::vector<std::vector<Expr::Ptr>> jacobian;     // residuals x unknowns
  std::vector<Expr::Ptr> shadow_constraints;        // g~_j over the x vars only
  std::vector<std::vector<Expr::Ptr>> shadow_constraint_grads;  // m x n
  Expr::Ptr shadow_objective;                       // over the x vars only

  std::size_t unknowns() const { return n + m + (general ? 1 : 0); }
};

struct SolverOptions {
  int seeds = 64;
  double seed_box = 2.0;
  int max_iter = 50;
  double newton_tol = 1e-12;
  double dedup_radius = 1e-6;
  std::uint64_t rng_seed = 7;
};

struct CriticalPoint {
  std::vector<double> point;   // standard coordinates, length n
  double mu = 1.0;             // 1 in normal form
  std::vector<double> lambda;  // length m
  double residual_norm = 0.0;  // max |st| of the lifted hyperreal residual
  double objective_st = 0.0;   // shadow objective value at the point
  bool abnormal = false;                // |mu| below tolerance after normalization
  bool constraint_degenerate = false;   // some shadow constraint gradient vanishes here
  bool candidate_min = false;
  bool candidate_max = false;

  std::string classification() const;  // "candidate-min", "candidate-max",
                                       // "candidate-min,candidate-max" or "unclassified"
};

AugmentedSystem build_augmented(const ProblemDef& p, bool general);

/// Normal form (mu = 1): multistart damped Newton on the shadow system,
/// deduplicated, verified against the lifted hyperreal residual, sorted by
/// shadow objective ascending. m = 0 gives plain critical points.
std::vector<CriticalPoint> solve_normal(const ProblemDef& p, const SolverOptions& opts = {});

/// General form with the multiplier vector (mu, lambda) on the unit sphere;
/// sign-canonicalized (mu >= 0, then first nonzero multiplier >= 0) so the
/// two antipodal solutions deduplicate. Requires m >= 1.
std::vector<CriticalPoint> solve_general(const ProblemDef& p, const SolverOptions& opts = {});

/// Max |st| over the components of mu*grad f + sum_j lambda_j*grad g_j and
/// the constraint values g_j, all evaluated on the unshadowed expressions
/// via the mu-differentiation engine at the lifted standard point.
double verify(const ProblemDef& p, const CriticalPoint& c, const DiffConfig& cfg = {});

/// Label candidates with extreme shadow objective among those found (ties
/// within the problem tolerance share labels). Comparison-among-candidates
/// only; no claim of actual extremality.
std::vector<CriticalPoint> classify(const ProblemDef& p, std::vector<CriticalPoint> points);

}  // namespace mulag
