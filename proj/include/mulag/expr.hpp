// Arithmetic DSL for internal functions *R^n -> *R: parser, evaluators,
// exact symbolic differentiation and the standard-shadow transform.
//
// Grammar (precedence low to high): + -  |  * /  |  unary -  |  ^ (integer
// exponent, nonnegative)  |  atoms: decimal literal, variable, generator,
// parenthesized expression.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mulag/hyperreal.hpp"

namespace mulag {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExprKind { Const, Var, Add, Sub, Mul, Div, Neg, PowInt };

/// Immutable AST node. Children are shared; whole trees are safely
/// shareable across threads.
class Expr {
 public:
  using Ptr = std::shared_ptr<const Expr>;

  static Ptr constant(Hyperreal value);
  static Ptr variable(std::size_t index);
  static Ptr add(Ptr a, Ptr b);
  static Ptr sub(Ptr a, Ptr b);
  static Ptr mul(Ptr a, Ptr b);
  static Ptr div(Ptr a, Ptr b);
  static Ptr neg(Ptr a);
  static Ptr pow_int(Ptr base, int exponent);

  ExprKind kind() const { return kind_; }
  const Hyperreal& value() const { return *value_; }      // Const
  std::size_t var_index() const { return var_index_; }    // Var
  const Ptr& lhs() const { return lhs_; }                 // binary / Neg / PowInt base
  const Ptr& rhs() const { return rhs_; }                 // binary
  int exponent() const { return exponent_; }              // PowInt

 private:
  Expr() = default;
  ExprKind kind_ = ExprKind::Const;
  std::shared_ptr<const Hyperreal> value_;
  std::size_t var_index_ = 0;
  Ptr lhs_, rhs_;
  int exponent_ = 0;
};

/// Structural equality; Const nodes compare by generator names and exact
/// coefficients.
bool expr_equal(const Expr& a, const Expr& b);

/// Parse `text` over the given variable names and generators. Numeric
/// literals become standard constants; a generator identifier becomes that
/// generator to the first power (truncation order `trunc`).
Expr::Ptr parse(std::string_view text, const std::vector<std::string>& vars,
                const GeneratorSet& generators, int trunc = 4);

/// Bottom-up hyperreal evaluation; constants are embedded into the
/// (generators, trunc) context, which must name every generator they use.
Hyperreal eval(const Expr& e, std::span<const Hyperreal> coords,
               const GeneratorSet& generators, int trunc);

/// Plain-double evaluation of the standard parts (used on shadow
/// expressions, where it coincides with hyperreal evaluation + st).
double eval_real(const Expr& e, std::span<const double> coords);

/// Exact AST derivative with respect to variable i.
Expr::Ptr symbolic_diff(const Expr::Ptr& e, std::size_t i);

/// Standard shadow: every constant replaced by its standard part.
Expr::Ptr shadow(const Expr::Ptr& e);

/// Render to parseable text (17 significant digits, so parse(render(e))
/// round-trips exactly).
std::string render(const Expr& e);

struct ProblemDef {
  GeneratorSet generators;
  std::vector<std::string> vars;
  Expr::Ptr objective;
  std::vector<Expr::Ptr> constraints;
  int trunc_order = 4;
  Tolerance tol;
};

/// Parse the line-oriented problem-file format:
///   generators: eps, delta
///   vars: x, y, z
///   objective: x*y*z + eps
///   constraint: x^2 + 2*(y+delta)^2 + 3*z^2 - 1
///   trunc: 4
///   tol: 1e-9
/// `#` starts a comment; unknown keys are rejected; requires m < n.
ProblemDef load_problem(std::string_view text);
ProblemDef load_problem_file(const std::string& path);

}  // namespace mulag
