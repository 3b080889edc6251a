#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mulag/expr.hpp"

using namespace mulag;
using testutil::eps_delta;
using testutil::kTrunc;
using testutil::random_expr;
using testutil::random_point;

namespace {

const std::vector<std::string> kXYZ = {"x", "y", "z"};

Expr::Ptr parse_xyz(std::string_view t) { return parse(t, kXYZ, eps_delta(), kTrunc); }

Hyperreal eval_std(const Expr& e, const std::vector<double>& p) {
  std::vector<Hyperreal> coords;
  for (double v : p) coords.push_back(Hyperreal::constant(v, eps_delta(), kTrunc));
  return eval(e, coords, eps_delta(), kTrunc);
}

}  // namespace

TEST_CASE("parse: structure of the Example 2 objective") {
  Expr::Ptr e = parse_xyz("x*y*z + eps");
  REQUIRE(e->kind() == ExprKind::Add);
  const Expr& left = *e->lhs();
  REQUIRE(left.kind() == ExprKind::Mul);
  CHECK(left.lhs()->kind() == ExprKind::Mul);          // (x*y)*z, left associative
  CHECK(left.lhs()->lhs()->var_index() == 0);
  CHECK(left.lhs()->rhs()->var_index() == 1);
  CHECK(left.rhs()->var_index() == 2);
  const Expr& c = *e->rhs();
  REQUIRE(c.kind() == ExprKind::Const);
  CHECK(c.value().st() == 0.0);
  CHECK(c.value().terms().count(Monomial::generator(0, 1)) == 1);
}

TEST_CASE("parse: Example 2 constraint shape and precedence") {
  Expr::Ptr e = parse_xyz("x^2 + 2*(y+delta)^2 + 3*z^2 - 1");
  // top level is ((x^2 + 2*(y+delta)^2) + 3*z^2) - 1
  REQUIRE(e->kind() == ExprKind::Sub);
  CHECK(e->rhs()->kind() == ExprKind::Const);
  const Expr& sum = *e->lhs();
  REQUIRE(sum.kind() == ExprKind::Add);
  CHECK(sum.rhs()->kind() == ExprKind::Mul);
  CHECK(sum.rhs()->rhs()->kind() == ExprKind::PowInt);

  // unary minus binds tighter than * but looser than ^
  Expr::Ptr n = parse_xyz("-x^2");
  REQUIRE(n->kind() == ExprKind::Neg);
  CHECK(n->lhs()->kind() == ExprKind::PowInt);
}

TEST_CASE("parse errors carry position") {
  CHECK_THROWS_AS(parse_xyz("x + * y"), ParseError);
  try {
    parse_xyz("x + * y");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col == 5);
  }
  CHECK_THROWS_AS(parse_xyz("x + w"), ParseError);
  CHECK_THROWS_AS(parse_xyz("(x + y"), ParseError);
  CHECK_THROWS_AS(parse_xyz(""), ParseError);
  CHECK_THROWS_AS(parse_xyz("x^y"), ParseError);
  CHECK_THROWS_AS(parse_xyz("x^-2"), ParseError);
}

TEST_CASE("eval: perturbed polynomial at a standard point") {
  Expr::Ptr f = parse_xyz("(1+eps)*x*y^2 - delta*z");
  Hyperreal v = eval_std(*f, {1, 2, 3});
  CHECK(v.st() == 4.0);
  CHECK(v.terms().at(Monomial::generator(0, 1)) == 4.0);
  CHECK(v.terms().at(Monomial::generator(1, 1)) == -3.0);
  CHECK(v.terms().size() == 3);
}

TEST_CASE("eval: zero point, paper's maximum value") {
  Expr::Ptr f = parse_xyz("x*y*z + x^2 - 2*y");
  CHECK(eval_std(*f, {0, 0, 0}).is_zero());

  Expr::Ptr g = parse_xyz("x*y*z + eps");
  double s3 = 1 / std::sqrt(3.0), s6 = 1 / std::sqrt(6.0);
  Hyperreal v = eval_std(*g, {s3, s6, 1.0 / 3});
  CHECK(v.st() == doctest::Approx(1 / (3 * std::sqrt(18.0))).epsilon(1e-12));
  CHECK(v.terms().at(Monomial::generator(0, 1)) == 1.0);
}

TEST_CASE("symbolic_diff: paper partials and constants") {
  Expr::Ptr f = parse_xyz("(1+eps)*x*y^2 - delta*z");
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p = random_point(rng, 3);
    Hyperreal dx = eval_std(*symbolic_diff(f, 0), p);
    Hyperreal expect = eval_std(*parse_xyz("(1+eps)*y^2"), p);
    CHECK(Hyperreal::approx_eq(dx, expect, {1e-12}));
    CHECK(dx.st() == doctest::Approx(p[1] * p[1]).epsilon(1e-12));

    Hyperreal dz = eval_std(*symbolic_diff(f, 2), p);
    CHECK(dz.st() == 0.0);
    CHECK(dz.terms().at(Monomial::generator(1, 1)) == -1.0);
  }
  Expr::Ptr c = parse_xyz("3.5");
  CHECK(symbolic_diff(c, 0)->value().is_zero());
}

TEST_CASE("symbolic_diff: quotient rule") {
  Expr::Ptr f = parse_xyz("x / (1 + y^2)");
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p = random_point(rng, 3);
    double denom = 1 + p[1] * p[1];
    CHECK(eval_std(*symbolic_diff(f, 0), p).st() == doctest::Approx(1 / denom).epsilon(1e-12));
    CHECK(eval_std(*symbolic_diff(f, 1), p).st() ==
          doctest::Approx(-2 * p[0] * p[1] / (denom * denom)).epsilon(1e-12));
  }
}

TEST_CASE("shadow zeroes infinitesimal constants") {
  Expr::Ptr f = parse_xyz("x*y*z + eps");
  Expr::Ptr sf = shadow(f);
  CHECK(expr_equal(*sf, *parse_xyz("x*y*z + 0")));

  Expr::Ptr g = parse_xyz("x^2 + 2*(y+delta)^2 + 3*z^2 - 1");
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p = random_point(rng, 3);
    CHECK(eval_real(*shadow(g), p) ==
          doctest::Approx(p[0] * p[0] + 2 * p[1] * p[1] + 3 * p[2] * p[2] - 1).epsilon(1e-12));
  }

  Expr::Ptr plain = parse_xyz("x^2 - y*z + 2");
  CHECK(expr_equal(*shadow(plain), *plain));
}

TEST_CASE("render/parse round trip (1000 random expressions)") {
  std::mt19937_64 rng(2024);
  testutil::ExprGenOptions o;
  o.allow_div = true;
  for (int t = 0; t < 1000; ++t) {
    Expr::Ptr e = random_expr(rng, 3, eps_delta(), o);
    std::string text = render(*e);
    Expr::Ptr back = parse(text, {"x0", "x1", "x2"}, eps_delta(), kTrunc);
    // Rendered constants may re-parse as equivalent subtrees (e.g. a
    // perturbed constant renders parenthesized); compare by evaluation.
    std::mt19937_64 prng(t);
    std::vector<double> p = random_point(prng, 3, 0.75);
    try {
      Hyperreal a = eval_std(*e, p);
      Hyperreal b = eval_std(*back, p);
      CHECK(testutil::terms_close(a, b, 1e-9));
    } catch (const DivisionError&) {
      continue;
    }
  }
}

TEST_CASE("render/parse structural round trip for simple constants") {
  std::mt19937_64 rng(77);
  testutil::ExprGenOptions o;  // no Div: reparse must match node for node
  for (int t = 0; t < 500; ++t) {
    Expr::Ptr e = random_expr(rng, 3, GeneratorSet{}, o);
    Expr::Ptr back = parse(render(*e), {"x0", "x1", "x2"}, eps_delta(), kTrunc);
    // negative literal constants reparse as Neg(Const); normalize by value
    std::mt19937_64 prng(t);
    std::vector<double> p = random_point(prng, 3, 0.9);
    CHECK(eval_real(*e, p) == doctest::Approx(eval_real(*back, p)).epsilon(1e-12));
  }
}

TEST_CASE("shadow commutes with evaluation (random)") {
  std::mt19937_64 rng(11);
  testutil::ExprGenOptions o;
  o.allow_div = true;
  for (int t = 0; t < 300; ++t) {
    Expr::Ptr e = random_expr(rng, 3, eps_delta(), o);
    std::vector<double> p = random_point(rng, 3);
    try {
      Hyperreal full = eval_std(*e, p);
      double sh = eval_real(*shadow(e), p);
      CHECK(full.st() == doctest::Approx(sh).epsilon(1e-9));
    } catch (const DivisionError&) {
      continue;
    }
  }
}

TEST_CASE("shadow commutes with symbolic differentiation (random)") {
  std::mt19937_64 rng(12);
  testutil::ExprGenOptions o;
  for (int t = 0; t < 30; ++t) {
    Expr::Ptr e = random_expr(rng, 2, eps_delta(), o);
    for (std::size_t i = 0; i < 2; ++i) {
      Expr::Ptr a = shadow(symbolic_diff(e, i));
      Expr::Ptr b = symbolic_diff(shadow(e), i);
      for (int k = 0; k < 100; ++k) {
        std::vector<double> p = random_point(rng, 2);
        CHECK(std::abs(eval_real(*a, p) - eval_real(*b, p)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("problem file loading") {
  const char* text =
      "# a comment\n"
      "generators: eps, delta\n"
      "vars: x, y, z\n"
      "objective: x*y*z + eps\n"
      "constraint: x^2 + 2*(y+delta)^2 + 3*z^2 - 1\n"
      "trunc: 4\n"
      "tol: 1e-9\n";
  ProblemDef p = load_problem(text);
  CHECK(p.vars == std::vector<std::string>{"x", "y", "z"});
  CHECK(p.generators.size() == 2);
  CHECK(p.constraints.size() == 1);
  CHECK(p.trunc_order == 4);
  CHECK(p.tol.tol == 1e-9);

  // defaults
  ProblemDef q = load_problem("generators: eps\nvars: x, y\nobjective: x*y\n");
  CHECK(q.trunc_order == 4);
  CHECK(q.tol.tol == 1e-9);

  CHECK_THROWS_AS(load_problem("generators: eps\nvars: x\nobjective: x\nfrobnicate: 1\n"),
                  ParseError);
  CHECK_THROWS_AS(load_problem("vars: x\nobjective: x\n"), ParseError);  // missing generators
  CHECK_THROWS_AS(load_problem("generators: eps\nvars: x\nobjective: x\nconstraint: x - 1\n"),
                  ConfigError);  // m >= n
  CHECK_THROWS_AS(load_problem("generators: x\nvars: x\nobjective: x\n"), ConfigError);
}
