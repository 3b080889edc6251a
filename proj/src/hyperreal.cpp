#include "mulag/hyperreal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace mulag {

bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

GeneratorSet::GeneratorSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!is_valid_identifier(names_[i])) {
      throw ConfigError("invalid generator name: '" + names_[i] + "'");
    }
    for (std::size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j]) {
        throw ConfigError("duplicate generator name: '" + names_[i] + "'");
      }
    }
  }
}

std::optional<std::size_t> GeneratorSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

GeneratorSet GeneratorSet::with(std::string_view name) const {
  if (contains(name)) return *this;
  auto names = names_;
  names.emplace_back(name);
  return GeneratorSet(std::move(names));
}

Monomial Monomial::generator(std::size_t index, int power) {
  if (power <= 0) throw ConfigError("generator power must be positive");
  Monomial m;
  m.factors_.emplace_back(index, power);
  m.degree_ = power;
  return m;
}

int Monomial::exponent(std::size_t index) const {
  for (const auto& [i, e] : factors_) {
    if (i == index) return e;
  }
  return 0;
}

Monomial Monomial::times(const Monomial& o) const {
  Monomial r;
  std::size_t a = 0, b = 0;
  while (a < factors_.size() || b < o.factors_.size()) {
    if (b == o.factors_.size() || (a < factors_.size() && factors_[a].first < o.factors_[b].first)) {
      r.factors_.push_back(factors_[a++]);
    } else if (a == factors_.size() || o.factors_[b].first < factors_[a].first) {
      r.factors_.push_back(o.factors_[b++]);
    } else {
      int e = factors_[a].second + o.factors_[b].second;
      if (e != 0) r.factors_.emplace_back(factors_[a].first, e);
      ++a;
      ++b;
    }
  }
  r.degree_ = degree_ + o.degree_;
  return r;
}

bool Monomial::divides(const Monomial& o) const {
  for (const auto& [i, e] : factors_) {
    if (o.exponent(i) < e) return false;
  }
  return true;
}

Monomial Monomial::quotient_into(const Monomial& o) const {
  Monomial r;
  for (const auto& [i, e] : o.factors_) {
    int q = e - exponent(i);
    if (q < 0) throw DivisionError("monomial does not divide");
    if (q > 0) r.factors_.emplace_back(i, q);
  }
  r.degree_ = o.degree_ - degree_;
  if (r.degree_ < 0) throw DivisionError("monomial does not divide");
  return r;
}

bool Monomial::operator<(const Monomial& o) const {
  if (degree_ != o.degree_) return degree_ < o.degree_;
  std::size_t a = 0, b = 0;
  while (a < factors_.size() && b < o.factors_.size()) {
    if (factors_[a].first != o.factors_[b].first) {
      // The monomial owning the earlier generator has a larger exponent there.
      return factors_[a].first < o.factors_[b].first;
    }
    if (factors_[a].second != o.factors_[b].second) {
      return factors_[a].second > o.factors_[b].second;
    }
    ++a;
    ++b;
  }
  return false;  // equal (degrees match, one cannot be a strict prefix)
}

Monomial Monomial::remapped(const std::vector<std::size_t>& index_map) const {
  std::vector<std::pair<std::size_t, int>> mapped;
  mapped.reserve(factors_.size());
  for (const auto& [i, e] : factors_) mapped.emplace_back(index_map.at(i), e);
  std::sort(mapped.begin(), mapped.end());
  Monomial r;
  r.factors_ = std::move(mapped);
  r.degree_ = degree_;
  return r;
}

Hyperreal::Hyperreal(GeneratorSet gens, int k) : gens_(std::move(gens)), k_(k) {
  if (k_ < 0) throw ConfigError("truncation order must be nonnegative");
}

Hyperreal Hyperreal::real(double value) {
  Hyperreal h(GeneratorSet{}, 0);
  h.insert(Monomial{}, value);
  return h;
}

Hyperreal Hyperreal::constant(double value, GeneratorSet gens, int k) {
  Hyperreal h(std::move(gens), k);
  h.insert(Monomial{}, value);
  return h;
}

Hyperreal Hyperreal::generator(std::size_t index, GeneratorSet gens, int k, int power) {
  if (index >= gens.size()) throw ConfigError("generator index out of range");
  Hyperreal h(std::move(gens), k);
  h.insert(Monomial::generator(index, power), 1.0);
  return h;
}

void Hyperreal::insert(const Monomial& m, double c) {
  if (c == 0.0) return;
  if (m.total_degree() > k_) return;
  if (m.total_degree() < 0) throw DivisionError("negative-degree (infinite) term");
  auto [it, fresh] = terms_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Hyperreal::require_compatible(const Hyperreal& a, const Hyperreal& b) {
  if (a.gens_ != b.gens_) throw ConfigError("generator-set mismatch");
  if (a.k_ != b.k_) throw ConfigError("truncation-order mismatch");
}

double Hyperreal::st() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? 0.0 : it->second;
}

bool Hyperreal::is_infinitesimal(Tolerance t) const { return std::abs(st()) <= t.tol; }

Hyperreal Hyperreal::operator+(const Hyperreal& o) const {
  require_compatible(*this, o);
  Hyperreal r = *this;
  for (const auto& [m, c] : o.terms_) r.insert(m, c);
  return r;
}

Hyperreal Hyperreal::operator-(const Hyperreal& o) const {
  require_compatible(*this, o);
  Hyperreal r = *this;
  for (const auto& [m, c] : o.terms_) r.insert(m, -c);
  return r;
}

Hyperreal Hyperreal::operator-() const { return scaled(-1.0); }

Hyperreal Hyperreal::scaled(double c) const {
  Hyperreal r(gens_, k_);
  if (c == 0.0) return r;
  for (const auto& [m, v] : terms_) r.insert(m, v * c);
  return r;
}

Hyperreal Hyperreal::operator*(const Hyperreal& o) const {
  require_compatible(*this, o);
  Hyperreal r(gens_, k_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      if (ma.total_degree() + mb.total_degree() > k_) continue;
      r.insert(ma.times(mb), ca * cb);
    }
  }
  return r;
}

Hyperreal Hyperreal::pow_int(int e) const {
  if (e < 0) throw ConfigError("pow_int exponent must be nonnegative");
  Hyperreal r = Hyperreal::constant(1.0, gens_, k_);
  for (int i = 0; i < e; ++i) r = r * *this;
  return r;
}

Hyperreal Hyperreal::div(const Hyperreal& o) const {
  require_compatible(*this, o);
  if (o.terms_.empty()) throw DivisionError("division by zero");
  double s = o.st();
  if (s != 0.0) {
    // o = s * (1 + u) with u infinitesimal; invert by geometric series.
    Hyperreal u = o.scaled(1.0 / s) - Hyperreal::constant(1.0, gens_, k_);
    Hyperreal inv = Hyperreal::constant(1.0, gens_, k_);
    Hyperreal upow = Hyperreal::constant(1.0, gens_, k_);
    for (int j = 1; j <= k_; ++j) {
      upow = upow * u;
      if (upow.is_zero()) break;
      inv = (j % 2 == 1) ? inv - upow : inv + upow;
    }
    return *this * inv.scaled(1.0 / s);
  }
  if (o.terms_.size() == 1) {
    const auto& [m, c] = *o.terms_.begin();
    Hyperreal r(gens_, k_);
    for (const auto& [ma, ca] : terms_) {
      if (!m.divides(ma)) throw DivisionError("nonunit divisor");
      r.insert(m.quotient_into(ma), ca / c);
    }
    return r;
  }
  throw DivisionError("nonunit divisor");
}

Hyperreal Hyperreal::div_filtered(const Monomial& m, double noise) const {
  Hyperreal r(gens_, k_);
  for (const auto& [mono, c] : terms_) {
    if (m.divides(mono)) {
      r.insert(m.quotient_into(mono), c);
    } else if (std::abs(c) > noise) {
      throw DivisionError("nonunit divisor");
    }
  }
  return r;
}

bool Hyperreal::approx_eq(const Hyperreal& a, const Hyperreal& b, Tolerance t) {
  return (a - b).is_infinitesimal(t);
}

Hyperreal Hyperreal::truncated(int k) const {
  Hyperreal r(gens_, k);
  for (const auto& [m, c] : terms_) r.insert(m, c);
  return r;
}

Hyperreal Hyperreal::extended(const GeneratorSet& target, int k) const {
  std::vector<std::size_t> index_map(gens_.size());
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    auto j = target.index_of(gens_.name(i));
    if (!j) throw ConfigError("generator '" + gens_.name(i) + "' missing from target set");
    index_map[i] = *j;
  }
  Hyperreal r(target, k);
  for (const auto& [m, c] : terms_) r.insert(m.remapped(index_map), c);
  return r;
}

Hyperreal Hyperreal::cleaned(double threshold) const {
  Hyperreal r(gens_, k_);
  for (const auto& [m, c] : terms_) {
    if (std::abs(c) > threshold) r.insert(m, c);
  }
  return r;
}

double Hyperreal::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [_, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

namespace {

std::string format_coeff(double c, int sig_digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, c);
  return buf;
}

}  // namespace

std::string Hyperreal::to_string(int sig_digits) const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    double a = std::abs(c);
    if (first) {
      if (c < 0) out += "-";
      first = false;
    } else {
      out += (c < 0) ? " - " : " + ";
    }
    if (m.is_unit()) {
      out += format_coeff(a, sig_digits);
    } else {
      out += format_coeff(a, sig_digits);
      for (const auto& [i, e] : m.factors()) {
        out += "*" + gens_.name(i);
        if (e != 1) out += "^" + std::to_string(e);
      }
    }
  }
  return out;
}

}  // namespace mulag
