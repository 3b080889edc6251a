#include "mulag/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mulag {

std::string CriticalPoint::classification() const {
  if (candidate_min && candidate_max) return "candidate-min,candidate-max";
  if (candidate_min) return "candidate-min";
  if (candidate_max) return "candidate-max";
  return "unclassified";
}

AugmentedSystem build_augmented(const ProblemDef& p, bool general) {
  const std::size_t n = p.vars.size();
  const std::size_t m = p.constraints.size();
  if (m >= n) throw ConfigError("too many constraints: need m < n");

  AugmentedSystem sys;
  sys.n = n;
  sys.m = m;
  sys.general = general;
  sys.shadow_objective = shadow(p.objective);
  for (const auto& g : p.constraints) sys.shadow_constraints.push_back(shadow(g));

  for (std::size_t j = 0; j < m; ++j) {
    std::vector<Expr::Ptr> grad_j;
    for (std::size_t i = 0; i < n; ++i) {
      grad_j.push_back(symbolic_diff(sys.shadow_constraints[j], i));
    }
    sys.shadow_constraint_grads.push_back(std::move(grad_j));
  }

  const std::size_t mu_index = n + m;  // general form only
  for (std::size_t i = 0; i < n; ++i) {
    Expr::Ptr df = symbolic_diff(sys.shadow_objective, i);
    Expr::Ptr r = general ? Expr::mul(Expr::variable(mu_index), df) : df;
    for (std::size_t j = 0; j < m; ++j) {
      r = Expr::add(r, Expr::mul(Expr::variable(n + j), sys.shadow_constraint_grads[j][i]));
    }
    sys.residuals.push_back(r);
  }
  for (std::size_t j = 0; j < m; ++j) sys.residuals.push_back(sys.shadow_constraints[j]);
  if (general) {
    Expr::Ptr norm = Expr::pow_int(Expr::variable(mu_index), 2);
    for (std::size_t j = 0; j < m; ++j) {
      norm = Expr::add(norm, Expr::pow_int(Expr::variable(n + j), 2));
    }
    sys.residuals.push_back(Expr::sub(norm, Expr::constant(Hyperreal::real(1.0))));
  }

  for (const auto& r : sys.residuals) {
    std::vector<Expr::Ptr> row;
    for (std::size_t k = 0; k < sys.unknowns(); ++k) row.push_back(symbolic_diff(r, k));
    sys.jacobian.push_back(std::move(row));
  }
  return sys;
}

namespace {

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-14) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t k = ri + 1; k < n; ++k) s -= a[ri][k] * out[k];
    out[ri] = s / a[ri][ri];
  }
  return true;
}

double residual_norm2(const AugmentedSystem& sys, const std::vector<double>& z,
                      std::vector<double>* out = nullptr) {
  double s = 0.0;
  if (out) out->clear();
  for (const auto& r : sys.residuals) {
    double v = eval_real(*r, z);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    if (out) out->push_back(v);
    s += v * v;
  }
  return std::sqrt(s);
}

// Damped Newton from one seed; true iff converged to newton_tol.
bool newton(const AugmentedSystem& sys, const SolverOptions& opts, std::vector<double>& z) {
  const std::size_t dim = sys.unknowns();
  std::vector<double> r, d;
  for (int it = 0; it < opts.max_iter; ++it) {
    double nr;
    try {
      nr = residual_norm2(sys, z, &r);
    } catch (const std::runtime_error&) {
      return false;
    }
    if (!std::isfinite(nr)) return false;
    if (nr <= opts.newton_tol) return true;

    std::vector<std::vector<double>> jac(dim, std::vector<double>(dim));
    try {
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t k = 0; k < dim; ++k) jac[i][k] = eval_real(*sys.jacobian[i][k], z);
      }
    } catch (const std::runtime_error&) {
      return false;
    }
    std::vector<double> rhs(r);
    for (double& v : rhs) v = -v;
    if (!solve_linear(std::move(jac), std::move(rhs), d)) return false;

    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving <= 30; ++halving) {
      std::vector<double> z2(z);
      for (std::size_t k = 0; k < dim; ++k) z2[k] += t * d[k];
      double nr2;
      try {
        nr2 = residual_norm2(sys, z2);
      } catch (const std::runtime_error&) {
        nr2 = std::numeric_limits<double>::infinity();
      }
      if (nr2 < nr) {
        z = std::move(z2);
        accepted = true;
        break;
      }
      t /= 2;
    }
    if (!accepted) return false;
  }
  try {
    return residual_norm2(sys, z) <= opts.newton_tol;
  } catch (const std::runtime_error&) {
    return false;
  }
}

// mu >= 0; when mu is (numerically) zero, first appreciable lambda >= 0.
void canonicalize_multiplier_sign(std::vector<double>& z, std::size_t n, std::size_t m,
                                  double tol) {
  double mu = z[n + m];
  bool flip = false;
  if (mu < -tol) {
    flip = true;
  } else if (std::abs(mu) <= tol) {
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(z[n + j]) > tol) {
        flip = z[n + j] < 0;
        break;
      }
    }
  }
  if (flip) {
    for (std::size_t k = n; k < n + m + 1; ++k) z[k] = -z[k];
  }
}

std::vector<CriticalPoint> run_solver(const ProblemDef& p, const SolverOptions& opts,
                                      bool general) {
  AugmentedSystem sys = build_augmented(p, general);
  const std::size_t n = sys.n, m = sys.m;

  std::mt19937_64 rng(opts.rng_seed);
  std::uniform_real_distribution<double> box(-opts.seed_box, opts.seed_box);

  std::vector<CriticalPoint> found;
  for (int s = 0; s < opts.seeds; ++s) {
    std::vector<double> z(sys.unknowns());
    for (double& v : z) v = box(rng);
    if (!newton(sys, opts, z)) continue;
    if (general) canonicalize_multiplier_sign(z, n, m, p.tol.tol);

    CriticalPoint c;
    c.point.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
    c.lambda.assign(z.begin() + static_cast<std::ptrdiff_t>(n),
                    z.begin() + static_cast<std::ptrdiff_t>(n + m));
    c.mu = general ? z[n + m] : 1.0;
    c.abnormal = general && std::abs(c.mu) <= p.tol.tol;
    c.objective_st = eval_real(*sys.shadow_objective, c.point);
    for (std::size_t j = 0; j < m; ++j) {
      double gmax = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gmax = std::max(gmax, std::abs(eval_real(*sys.shadow_constraint_grads[j][i], c.point)));
      }
      if (gmax <= p.tol.tol) c.constraint_degenerate = true;
    }
    c.residual_norm = verify(p, c);
    if (c.residual_norm > p.tol.tol) continue;

    // Dedup on x-coordinates; keep the copy with the smaller residual.
    bool merged = false;
    for (auto& other : found) {
      double dist = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist = std::max(dist, std::abs(other.point[i] - c.point[i]));
      }
      if (dist <= opts.dedup_radius) {
        if (c.residual_norm < other.residual_norm) other = c;
        merged = true;
        break;
      }
    }
    if (!merged) found.push_back(std::move(c));
  }

  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.objective_st != b.objective_st) return a.objective_st < b.objective_st;
    return a.point < b.point;
  });
  return found;
}

}  // namespace

std::vector<CriticalPoint> solve_normal(const ProblemDef& p, const SolverOptions& opts) {
  return run_solver(p, opts, false);
}

std::vector<CriticalPoint> solve_general(const ProblemDef& p, const SolverOptions& opts) {
  if (p.constraints.empty()) throw ConfigError("general form requires at least one constraint");
  return run_solver(p, opts, true);
}

double verify(const ProblemDef& p, const CriticalPoint& c, const DiffConfig& cfg) {
  const std::size_t n = p.vars.size();
  HyperPoint x = HyperPoint::standard(c.point, p.generators, p.trunc_order);

  Gradient gf = gradient(*p.objective, x, cfg);
  std::vector<Gradient> gg;
  gg.reserve(p.constraints.size());
  for (const auto& g : p.constraints) gg.push_back(gradient(*g, x, cfg));

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = c.mu * gf.partials[i].st();
    for (std::size_t j = 0; j < p.constraints.size(); ++j) {
      r += c.lambda[j] * gg[j].partials[i].st();
    }
    worst = std::max(worst, std::abs(r));
  }
  for (const auto& g : p.constraints) {
    worst = std::max(worst,
                     std::abs(eval(*g, x.coords, p.generators, p.trunc_order).st()));
  }
  return worst;
}

std::vector<CriticalPoint> classify(const ProblemDef& p, std::vector<CriticalPoint> points) {
  if (points.empty()) return points;
  double lo = points.front().objective_st, hi = points.front().objective_st;
  for (const auto& c : points) {
    lo = std::min(lo, c.objective_st);
    hi = std::max(hi, c.objective_st);
  }
  for (auto& c : points) {
    c.candidate_min = std::abs(c.objective_st - lo) <= p.tol.tol;
    c.candidate_max = std::abs(c.objective_st - hi) <= p.tol.tol;
  }
  return points;
}

}  // namespace mulag
