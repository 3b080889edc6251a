#include "mulag/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mulag {

Expr::Ptr Expr::constant(Hyperreal value) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Const;
  e->value_ = std::make_shared<const Hyperreal>(std::move(value));
  return e;
}

Expr::Ptr Expr::variable(std::size_t index) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Var;
  e->var_index_ = index;
  return e;
}

static Expr::Ptr finish(std::shared_ptr<Expr> e) { return e; }

Expr::Ptr Expr::add(Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Add;
  e->lhs_ = std::move(a);
  e->rhs_ = std::move(b);
  return finish(e);
}

Expr::Ptr Expr::sub(Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Sub;
  e->lhs_ = std::move(a);
  e->rhs_ = std::move(b);
  return finish(e);
}

Expr::Ptr Expr::mul(Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Mul;
  e->lhs_ = std::move(a);
  e->rhs_ = std::move(b);
  return finish(e);
}

Expr::Ptr Expr::div(Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Div;
  e->lhs_ = std::move(a);
  e->rhs_ = std::move(b);
  return finish(e);
}

Expr::Ptr Expr::neg(Ptr a) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Neg;
  e->lhs_ = std::move(a);
  return finish(e);
}

Expr::Ptr Expr::pow_int(Ptr base, int exponent) {
  if (exponent < 0) throw ConfigError("PowInt exponent must be nonnegative");
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::PowInt;
  e->lhs_ = std::move(base);
  e->exponent_ = exponent;
  return finish(e);
}

namespace {

bool const_equal(const Hyperreal& a, const Hyperreal& b) {
  if (a.terms().size() != b.terms().size()) return false;
  auto name_of = [](const Hyperreal& h, const Monomial& m) {
    std::string s;
    for (const auto& [i, e] : m.factors()) {
      s += h.generators().name(i) + "^" + std::to_string(e) + ";";
    }
    return s;
  };
  std::map<std::string, double> ta, tb;
  for (const auto& [m, c] : a.terms()) ta[name_of(a, m)] = c;
  for (const auto& [m, c] : b.terms()) tb[name_of(b, m)] = c;
  return ta == tb;
}

}  // namespace

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Const:
      return const_equal(a.value(), b.value());
    case ExprKind::Var:
      return a.var_index() == b.var_index();
    case ExprKind::Neg:
      return expr_equal(*a.lhs(), *b.lhs());
    case ExprKind::PowInt:
      return a.exponent() == b.exponent() && expr_equal(*a.lhs(), *b.lhs());
    default:
      return expr_equal(*a.lhs(), *b.lhs()) && expr_equal(*a.rhs(), *b.rhs());
  }
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        advance();
      }
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t save = pos_;
        advance();
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            advance();
          }
        } else {
          pos_ = save;  // 'e' begins an identifier, not an exponent
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(text_.substr(start, pos_ - start));
      char* end = nullptr;
      t.number = std::strtod(t.text.c_str(), &end);
      if (end != t.text.c_str() + t.text.size()) {
        throw ParseError("malformed number '" + t.text + "'", t.line, t.col);
      }
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        advance();
      }
      t.kind = Tok::Ident;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    advance();
    switch (c) {
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '^': t.kind = Tok::Caret; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.col);
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      advance();
    }
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars,
         const GeneratorSet& generators, int trunc)
      : lexer_(text), vars_(vars), gens_(generators), trunc_(trunc) {
    cur_ = lexer_.next();
  }

  Expr::Ptr parse_all() {
    Expr::Ptr e = parse_sum();
    if (cur_.kind != Tok::End) {
      throw ParseError("unexpected trailing input '" + describe(cur_) + "'", cur_.line, cur_.col);
    }
    return e;
  }

 private:
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::Number: return t.text;
      case Tok::Ident: return t.text;
      case Tok::Plus: return "+";
      case Tok::Minus: return "-";
      case Tok::Star: return "*";
      case Tok::Slash: return "/";
      case Tok::Caret: return "^";
      case Tok::LParen: return "(";
      case Tok::RParen: return ")";
      case Tok::End: return "<end of input>";
    }
    return "?";
  }

  void bump() { cur_ = lexer_.next(); }

  Expr::Ptr parse_sum() {
    Expr::Ptr e = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      bool plus = cur_.kind == Tok::Plus;
      bump();
      Expr::Ptr r = parse_term();
      e = plus ? Expr::add(e, r) : Expr::sub(e, r);
    }
    return e;
  }

  Expr::Ptr parse_term() {
    Expr::Ptr e = parse_unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      bool star = cur_.kind == Tok::Star;
      bump();
      Expr::Ptr r = parse_unary();
      e = star ? Expr::mul(e, r) : Expr::div(e, r);
    }
    return e;
  }

  Expr::Ptr parse_unary() {
    if (cur_.kind == Tok::Minus) {
      bump();
      return Expr::neg(parse_unary());
    }
    return parse_power();
  }

  Expr::Ptr parse_power() {
    Expr::Ptr base = parse_atom();
    if (cur_.kind != Tok::Caret) return base;
    bump();
    if (cur_.kind != Tok::Number) {
      throw ParseError("expected integer exponent after '^', got '" + describe(cur_) + "'",
                       cur_.line, cur_.col);
    }
    double v = cur_.number;
    int e = static_cast<int>(v);
    if (v != static_cast<double>(e) || e < 0) {
      throw ParseError("exponent must be a nonnegative integer", cur_.line, cur_.col);
    }
    bump();
    return Expr::pow_int(base, e);
  }

  Expr::Ptr parse_atom() {
    if (cur_.kind == Tok::Number) {
      double v = cur_.number;
      bump();
      return Expr::constant(Hyperreal::real(v));
    }
    if (cur_.kind == Tok::Ident) {
      Token t = cur_;
      bump();
      auto vit = std::find(vars_.begin(), vars_.end(), t.text);
      if (vit != vars_.end()) {
        return Expr::variable(static_cast<std::size_t>(vit - vars_.begin()));
      }
      if (auto gi = gens_.index_of(t.text)) {
        return Expr::constant(Hyperreal::generator(*gi, gens_, trunc_));
      }
      throw ParseError("unknown identifier '" + t.text + "'", t.line, t.col);
    }
    if (cur_.kind == Tok::LParen) {
      bump();
      Expr::Ptr e = parse_sum();
      if (cur_.kind != Tok::RParen) {
        throw ParseError("expected ')', got '" + describe(cur_) + "'", cur_.line, cur_.col);
      }
      bump();
      return e;
    }
    throw ParseError("expected expression, got '" + describe(cur_) + "'", cur_.line, cur_.col);
  }

  Lexer lexer_;
  Token cur_;
  const std::vector<std::string>& vars_;
  const GeneratorSet& gens_;
  int trunc_;
};

}  // namespace

Expr::Ptr parse(std::string_view text, const std::vector<std::string>& vars,
                const GeneratorSet& generators, int trunc) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ParseError("empty expression", 1, 1);
  }
  Parser p(text, vars, generators, trunc);
  return p.parse_all();
}

// ---------------------------------------------------------------------------
// Evaluation

Hyperreal eval(const Expr& e, std::span<const Hyperreal> coords,
               const GeneratorSet& generators, int trunc) {
  switch (e.kind()) {
    case ExprKind::Const:
      return e.value().extended(generators, trunc);
    case ExprKind::Var:
      if (e.var_index() >= coords.size()) throw EvalError("variable index out of range");
      return coords[e.var_index()];
    case ExprKind::Add:
      return eval(*e.lhs(), coords, generators, trunc) + eval(*e.rhs(), coords, generators, trunc);
    case ExprKind::Sub:
      return eval(*e.lhs(), coords, generators, trunc) - eval(*e.rhs(), coords, generators, trunc);
    case ExprKind::Mul:
      return eval(*e.lhs(), coords, generators, trunc) * eval(*e.rhs(), coords, generators, trunc);
    case ExprKind::Div:
      return eval(*e.lhs(), coords, generators, trunc)
          .div(eval(*e.rhs(), coords, generators, trunc));
    case ExprKind::Neg:
      return -eval(*e.lhs(), coords, generators, trunc);
    case ExprKind::PowInt:
      return eval(*e.lhs(), coords, generators, trunc).pow_int(e.exponent());
  }
  throw EvalError("corrupt expression node");
}

double eval_real(const Expr& e, std::span<const double> coords) {
  switch (e.kind()) {
    case ExprKind::Const:
      return e.value().st();
    case ExprKind::Var:
      if (e.var_index() >= coords.size()) throw EvalError("variable index out of range");
      return coords[e.var_index()];
    case ExprKind::Add:
      return eval_real(*e.lhs(), coords) + eval_real(*e.rhs(), coords);
    case ExprKind::Sub:
      return eval_real(*e.lhs(), coords) - eval_real(*e.rhs(), coords);
    case ExprKind::Mul:
      return eval_real(*e.lhs(), coords) * eval_real(*e.rhs(), coords);
    case ExprKind::Div: {
      double d = eval_real(*e.rhs(), coords);
      if (d == 0.0) throw DivisionError("division by zero");
      return eval_real(*e.lhs(), coords) / d;
    }
    case ExprKind::Neg:
      return -eval_real(*e.lhs(), coords);
    case ExprKind::PowInt: {
      double b = eval_real(*e.lhs(), coords);
      double r = 1.0;
      for (int i = 0; i < e.exponent(); ++i) r *= b;
      return r;
    }
  }
  throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Symbolic differentiation and shadow

namespace {

Expr::Ptr zero_expr() { return Expr::constant(Hyperreal::real(0.0)); }
Expr::Ptr one_expr() { return Expr::constant(Hyperreal::real(1.0)); }

bool is_zero_const(const Expr::Ptr& e) {
  return e->kind() == ExprKind::Const && e->value().is_zero();
}

// Light simplification only where it keeps derivative trees from exploding.
Expr::Ptr s_add(Expr::Ptr a, Expr::Ptr b) {
  if (is_zero_const(a)) return b;
  if (is_zero_const(b)) return a;
  return Expr::add(std::move(a), std::move(b));
}

Expr::Ptr s_sub(Expr::Ptr a, Expr::Ptr b) {
  if (is_zero_const(b)) return a;
  if (is_zero_const(a)) return Expr::neg(std::move(b));
  return Expr::sub(std::move(a), std::move(b));
}

Expr::Ptr s_mul(Expr::Ptr a, Expr::Ptr b) {
  if (is_zero_const(a) || is_zero_const(b)) return zero_expr();
  if (a->kind() == ExprKind::Const && a->value().terms().size() == 1 && a->value().st() == 1.0) {
    return b;
  }
  if (b->kind() == ExprKind::Const && b->value().terms().size() == 1 && b->value().st() == 1.0) {
    return a;
  }
  return Expr::mul(std::move(a), std::move(b));
}

}  // namespace

Expr::Ptr symbolic_diff(const Expr::Ptr& e, std::size_t i) {
  switch (e->kind()) {
    case ExprKind::Const:
      return zero_expr();
    case ExprKind::Var:
      return e->var_index() == i ? one_expr() : zero_expr();
    case ExprKind::Add:
      return s_add(symbolic_diff(e->lhs(), i), symbolic_diff(e->rhs(), i));
    case ExprKind::Sub:
      return s_sub(symbolic_diff(e->lhs(), i), symbolic_diff(e->rhs(), i));
    case ExprKind::Mul:
      return s_add(s_mul(symbolic_diff(e->lhs(), i), e->rhs()),
                   s_mul(e->lhs(), symbolic_diff(e->rhs(), i)));
    case ExprKind::Div: {
      // (u/v)' = (u'v - uv') / v^2
      Expr::Ptr num = s_sub(s_mul(symbolic_diff(e->lhs(), i), e->rhs()),
                            s_mul(e->lhs(), symbolic_diff(e->rhs(), i)));
      if (is_zero_const(num)) return zero_expr();
      return Expr::div(num, Expr::pow_int(e->rhs(), 2));
    }
    case ExprKind::Neg:
      return Expr::neg(symbolic_diff(e->lhs(), i));
    case ExprKind::PowInt: {
      if (e->exponent() == 0) return zero_expr();
      Expr::Ptr inner = symbolic_diff(e->lhs(), i);
      if (is_zero_const(inner)) return zero_expr();
      Expr::Ptr scaled = s_mul(Expr::constant(Hyperreal::real(e->exponent())),
                               Expr::pow_int(e->lhs(), e->exponent() - 1));
      return s_mul(scaled, inner);
    }
  }
  throw EvalError("corrupt expression node");
}

Expr::Ptr shadow(const Expr::Ptr& e) {
  switch (e->kind()) {
    case ExprKind::Const:
      return Expr::constant(Hyperreal::real(e->value().st()));
    case ExprKind::Var:
      return e;
    case ExprKind::Add:
      return Expr::add(shadow(e->lhs()), shadow(e->rhs()));
    case ExprKind::Sub:
      return Expr::sub(shadow(e->lhs()), shadow(e->rhs()));
    case ExprKind::Mul:
      return Expr::mul(shadow(e->lhs()), shadow(e->rhs()));
    case ExprKind::Div:
      return Expr::div(shadow(e->lhs()), shadow(e->rhs()));
    case ExprKind::Neg:
      return Expr::neg(shadow(e->lhs()));
    case ExprKind::PowInt:
      return Expr::pow_int(shadow(e->lhs()), e->exponent());
  }
  throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::PowInt: return 4;
    default: return 5;
  }
}

std::string render_const(const Hyperreal& h) {
  if (h.is_zero()) return "0";
  // Bare nonnegative real or single first-power generator render without
  // parentheses; anything richer is wrapped so it re-parses as one node.
  if (h.terms().size() == 1) {
    const auto& [m, c] = *h.terms().begin();
    if (m.is_unit() && c >= 0.0) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", c);
      return buf;
    }
    if (m.factors().size() == 1 && m.factors()[0].second == 1 && c == 1.0) {
      return h.generators().name(m.factors()[0].first);
    }
  }
  return "(" + h.to_string(17) + ")";
}

void render_node(const Expr& e, const std::vector<std::string>* var_names, std::string& out);

void render_child(const Expr& child, int parent_prec, bool needs_strict,
                  const std::vector<std::string>* var_names, std::string& out) {
  int p = precedence(child.kind());
  bool parens = needs_strict ? (p <= parent_prec) : (p < parent_prec);
  if (parens) out += "(";
  render_node(child, var_names, out);
  if (parens) out += ")";
}

void render_node(const Expr& e, const std::vector<std::string>* var_names, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Const:
      out += render_const(e.value());
      return;
    case ExprKind::Var:
      if (var_names && e.var_index() < var_names->size()) {
        out += (*var_names)[e.var_index()];
      } else {
        out += "x" + std::to_string(e.var_index());
      }
      return;
    case ExprKind::Add:
      render_child(*e.lhs(), 1, false, var_names, out);
      out += " + ";
      render_child(*e.rhs(), 1, true, var_names, out);
      return;
    case ExprKind::Sub:
      render_child(*e.lhs(), 1, false, var_names, out);
      out += " - ";
      render_child(*e.rhs(), 1, true, var_names, out);
      return;
    case ExprKind::Mul:
      render_child(*e.lhs(), 2, false, var_names, out);
      out += "*";
      render_child(*e.rhs(), 2, true, var_names, out);
      return;
    case ExprKind::Div:
      render_child(*e.lhs(), 2, false, var_names, out);
      out += "/";
      render_child(*e.rhs(), 2, true, var_names, out);
      return;
    case ExprKind::Neg:
      out += "-";
      render_child(*e.lhs(), 3, true, var_names, out);
      return;
    case ExprKind::PowInt:
      render_child(*e.lhs(), 4, true, var_names, out);
      out += "^" + std::to_string(e.exponent());
      return;
  }
}

}  // namespace

std::string render(const Expr& e) {
  std::string out;
  render_node(e, nullptr, out);
  return out;
}

// ---------------------------------------------------------------------------
// Problem files

namespace {

std::string trimmed(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trimmed(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

ProblemDef load_problem(std::string_view text) {
  std::string gens_line, vars_line, objective_line, trunc_line, tol_line;
  bool have_gens = false, have_vars = false, have_objective = false;
  std::vector<std::string> constraint_lines;

  std::stringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = trimmed(raw);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ParseError("expected 'key: value'", lineno, 1);
    }
    std::string key = trimmed(line.substr(0, colon));
    std::string value = trimmed(line.substr(colon + 1));
    auto set_once = [&](std::string& slot, bool& have, const char* name) {
      if (have) throw ParseError(std::string("duplicate key '") + name + "'", lineno, 1);
      slot = value;
      have = true;
    };
    if (key == "generators") {
      set_once(gens_line, have_gens, "generators");
    } else if (key == "vars") {
      set_once(vars_line, have_vars, "vars");
    } else if (key == "objective") {
      set_once(objective_line, have_objective, "objective");
    } else if (key == "constraint") {
      constraint_lines.push_back(value);
    } else if (key == "trunc") {
      bool have_trunc = !trunc_line.empty();
      set_once(trunc_line, have_trunc, "trunc");
    } else if (key == "tol") {
      bool have_tol = !tol_line.empty();
      set_once(tol_line, have_tol, "tol");
    } else {
      throw ParseError("unknown key '" + key + "'", lineno, 1);
    }
  }

  if (!have_gens) throw ParseError("missing required key 'generators'", lineno, 1);
  if (!have_vars) throw ParseError("missing required key 'vars'", lineno, 1);
  if (!have_objective) throw ParseError("missing required key 'objective'", lineno, 1);

  ProblemDef p;
  p.generators = GeneratorSet(split_names(gens_line));
  p.vars = split_names(vars_line);
  if (p.vars.empty()) throw ConfigError("problem needs at least one variable");
  for (const auto& v : p.vars) {
    if (!is_valid_identifier(v)) throw ConfigError("invalid variable name: '" + v + "'");
    if (p.generators.contains(v)) {
      throw ConfigError("name '" + v + "' is both a variable and a generator");
    }
  }
  for (std::size_t i = 0; i < p.vars.size(); ++i) {
    for (std::size_t j = i + 1; j < p.vars.size(); ++j) {
      if (p.vars[i] == p.vars[j]) throw ConfigError("duplicate variable name: '" + p.vars[i] + "'");
    }
  }

  if (!trunc_line.empty()) {
    p.trunc_order = std::stoi(trunc_line);
    if (p.trunc_order < 1) throw ConfigError("trunc must be a positive integer");
  }
  if (!tol_line.empty()) {
    p.tol.tol = std::stod(tol_line);
    if (p.tol.tol < 0) throw ConfigError("tol must be nonnegative");
  }

  p.objective = parse(objective_line, p.vars, p.generators, p.trunc_order);
  for (const auto& c : constraint_lines) {
    p.constraints.push_back(parse(c, p.vars, p.generators, p.trunc_order));
  }
  if (p.constraints.size() >= p.vars.size()) {
    throw ConfigError("too many constraints: need m < n");
  }
  return p;
}

ProblemDef load_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open problem file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_problem(ss.str());
}

}  // namespace mulag
