// Truncated formal-series arithmetic over named infinitesimal generators.
//
// A Hyperreal is a finite sum  c0 + sum_i c_i * m_i  where each m_i is a
// monomial in the generators (eps, delta, ...) with positive total degree,
// truncated at a fixed total degree K. The degree-zero coefficient is the
// standard part. Values with negative-degree terms (infinite hyperreals)
// are unrepresentable; operations that would create one throw.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mulag {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered set of infinitesimal generator names. Declaration order is the
/// canonical monomial ordering and is immutable after construction.
class GeneratorSet {
 public:
  GeneratorSet() = default;
  explicit GeneratorSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  /// New set with `name` appended (no-op clone if already present).
  GeneratorSet with(std::string_view name) const;

  bool operator==(const GeneratorSet&) const = default;

 private:
  std::vector<std::string> names_;
};

bool is_valid_identifier(std::string_view s);

/// Product of generator powers, stored sparse. Exponents are strictly
/// positive; the empty monomial is the real unit.
class Monomial {
 public:
  Monomial() = default;
  static Monomial generator(std::size_t index, int power = 1);

  int total_degree() const { return degree_; }
  bool is_unit() const { return factors_.empty(); }
  int exponent(std::size_t index) const;
  const std::vector<std::pair<std::size_t, int>>& factors() const { return factors_; }

  Monomial times(const Monomial& o) const;
  bool divides(const Monomial& o) const;  // exponent-wise <=
  Monomial quotient_into(const Monomial& o) const;  // o / *this, requires divides(o)

  /// Graded ordering: by total degree, then lexicographic by declaration
  /// order (larger exponent on an earlier generator sorts first).
  bool operator<(const Monomial& o) const;
  bool operator==(const Monomial& o) const {
    return degree_ == o.degree_ && factors_ == o.factors_;
  }

  /// Remap generator indices (used when embedding into a larger set).
  Monomial remapped(const std::vector<std::size_t>& index_map) const;

 private:
  std::vector<std::pair<std::size_t, int>> factors_;  // sorted by index, exp > 0
  int degree_ = 0;
};

struct Tolerance {
  double tol = 1e-9;
};

class Hyperreal {
 public:
  /// Zero over the given generators, truncated at total degree k.
  Hyperreal(GeneratorSet gens, int k);

  /// A plain real (empty generator set, degree 0). Embeds into any context.
  static Hyperreal real(double value);
  static Hyperreal constant(double value, GeneratorSet gens, int k);
  static Hyperreal generator(std::size_t index, GeneratorSet gens, int k, int power = 1);

  const GeneratorSet& generators() const { return gens_; }
  int trunc_order() const { return k_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double st() const;
  bool is_infinitesimal(Tolerance t = {}) const;

  Hyperreal operator+(const Hyperreal& o) const;
  Hyperreal operator-(const Hyperreal& o) const;
  Hyperreal operator-() const;
  Hyperreal operator*(const Hyperreal& o) const;
  Hyperreal scaled(double c) const;
  Hyperreal pow_int(int e) const;  // e >= 0

  /// Division. Either the divisor is a unit (nonzero standard part, inverted
  /// by a truncated geometric series) or a single monomial dividing every
  /// term of the dividend. Anything else would leave the representable
  /// (finite) domain and throws DivisionError("nonunit divisor").
  Hyperreal div(const Hyperreal& o) const;

  /// Divide by a pure monomial, dropping non-divisible terms whose
  /// coefficient magnitude is <= noise (exact cancellation residue); a
  /// larger non-divisible term throws DivisionError.
  Hyperreal div_filtered(const Monomial& m, double noise) const;

  static bool approx_eq(const Hyperreal& a, const Hyperreal& b, Tolerance t = {});

  /// Copy truncated at a (usually lower) total degree.
  Hyperreal truncated(int k) const;

  /// Embed into a superset of generators at truncation order k. Every
  /// generator used here must exist (by name) in `target`.
  Hyperreal extended(const GeneratorSet& target, int k) const;

  /// Drop terms with |coefficient| <= threshold.
  Hyperreal cleaned(double threshold) const;

  double max_abs_coeff() const;

  /// Canonical text form, terms in graded order, 12 significant digits:
  /// "4 + 4*eps - 3*delta". Pass 17 for exact round-tripping.
  std::string to_string(int sig_digits = 12) const;

 private:
  void insert(const Monomial& m, double c);
  static void require_compatible(const Hyperreal& a, const Hyperreal& b);

  GeneratorSet gens_;
  int k_ = 0;
  std::map<Monomial, double> terms_;
};

}  // namespace mulag
