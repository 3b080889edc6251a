// Shared generators and comparison helpers for the test suites.

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mulag/expr.hpp"
#include "mulag/hyperreal.hpp"

namespace testutil {

using mulag::Expr;
using mulag::GeneratorSet;
using mulag::Hyperreal;
using mulag::Monomial;

inline GeneratorSet eps_delta() { return GeneratorSet({"eps", "delta"}); }

constexpr int kTrunc = 4;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random series over the given generators: a standard part plus a few
/// random monomial terms of positive degree.
inline Hyperreal random_hyperreal(std::mt19937_64& rng, const GeneratorSet& gens, int k,
                                  bool nonzero_st = false) {
  double st = uniform(rng, -2.0, 2.0);
  if (nonzero_st && std::abs(st) < 0.25) st = st < 0 ? st - 0.25 : st + 0.25;
  Hyperreal h = Hyperreal::constant(st, gens, k);
  int terms = uniform_int(rng, 0, 4);
  for (int t = 0; t < terms; ++t) {
    Hyperreal mono = Hyperreal::constant(uniform(rng, -1.0, 1.0), gens, k);
    int deg = uniform_int(rng, 1, k);
    for (int d = 0; d < deg; ++d) {
      std::size_t g = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(gens.size()) - 1));
      mono = mono * Hyperreal::generator(g, gens, k);
    }
    h = h + mono;
  }
  return h;
}

/// Exact-shape comparison of term maps with relative coefficient tolerance.
inline bool terms_close(const Hyperreal& a, const Hyperreal& b, double rel, int max_degree = -1) {
  auto within = [&](double x, double y) {
    double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return std::abs(x - y) <= rel * scale;
  };
  for (const auto& [m, c] : a.terms()) {
    if (max_degree >= 0 && m.total_degree() > max_degree) continue;
    auto it = b.terms().find(m);
    if (!within(c, it == b.terms().end() ? 0.0 : it->second)) return false;
  }
  for (const auto& [m, c] : b.terms()) {
    if (max_degree >= 0 && m.total_degree() > max_degree) continue;
    if (a.terms().find(m) == a.terms().end() && !within(0.0, c)) return false;
  }
  return true;
}

struct ExprGenOptions {
  int max_depth = 4;
  bool allow_div = false;   // division only by unit constants when enabled
  bool allow_generators = true;
  double coeff_range = 2.0;
};

/// Random DSL expression over n variables.
inline Expr::Ptr random_expr(std::mt19937_64& rng, std::size_t n, const GeneratorSet& gens,
                             const ExprGenOptions& o = {}, int depth = 0) {
  if (depth >= o.max_depth || uniform_int(rng, 0, 3) == 0) {
    int pick = uniform_int(rng, 0, o.allow_generators && gens.size() > 0 ? 2 : 1);
    if (pick == 0 && n > 0) {
      return Expr::variable(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1)));
    }
    if (pick == 2) {
      std::size_t g = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(gens.size()) - 1));
      return Expr::constant(Hyperreal::generator(g, gens, kTrunc));
    }
    return Expr::constant(Hyperreal::real(uniform(rng, -o.coeff_range, o.coeff_range)));
  }
  int op = uniform_int(rng, 0, o.allow_div ? 5 : 4);
  switch (op) {
    case 0:
      return Expr::add(random_expr(rng, n, gens, o, depth + 1), random_expr(rng, n, gens, o, depth + 1));
    case 1:
      return Expr::sub(random_expr(rng, n, gens, o, depth + 1), random_expr(rng, n, gens, o, depth + 1));
    case 2:
      return Expr::mul(random_expr(rng, n, gens, o, depth + 1), random_expr(rng, n, gens, o, depth + 1));
    case 3:
      return Expr::neg(random_expr(rng, n, gens, o, depth + 1));
    case 4:
      return Expr::pow_int(random_expr(rng, n, gens, o, depth + 1), uniform_int(rng, 0, 3));
    default: {
      // Divisor: unit constant, possibly with an infinitesimal part.
      double c = uniform(rng, 0.5, 2.0) * (uniform_int(rng, 0, 1) ? 1.0 : -1.0);
      Hyperreal d = Hyperreal::constant(c, gens, kTrunc);
      if (o.allow_generators && gens.size() > 0 && uniform_int(rng, 0, 1)) {
        d = d + Hyperreal::generator(0, gens, kTrunc).scaled(uniform(rng, -0.5, 0.5));
      }
      return Expr::div(random_expr(rng, n, gens, o, depth + 1), Expr::constant(d));
    }
  }
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t n, double box = 1.5) {
  std::vector<double> p(n);
  for (auto& v : p) v = uniform(rng, -box, box);
  return p;
}

}  // namespace testutil
