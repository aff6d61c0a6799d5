#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shscert {

/// Sign decisions and degree truncation treat magnitudes at or below this as zero.
inline constexpr double kZeroTol = 1e-12;

using Exponents = std::vector<unsigned>;
using Assignment = std::map<std::string, double>;

/// Sparse multivariate polynomial over an ordered list of named variables.
///
/// Exponent vectors are indexed by position in vars(). Binary operations on
/// polynomials with different variable lists work over the union of both
/// lists (left operand's order first). Terms whose coefficient becomes exactly
/// zero are erased, so the zero polynomial has no terms.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<std::string> vars);

  static Polynomial constant(double c, std::vector<std::string> vars = {});
  static Polynomial variable(const std::string& name,
                             std::vector<std::string> vars = {});
  /// c[0] + c[1] v + c[2] v^2 + ...
  static Polynomial univariate(const std::string& var,
                               std::span<const double> ascending);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }

  /// Accumulates c into the term with exponents e (sized to vars()).
  void add_term(const Exponents& e, double c);

  bool is_zero() const { return terms_.empty(); }
  std::optional<std::size_t> var_index(const std::string& name) const;
  bool has_var(const std::string& name) const { return var_index(name).has_value(); }

  /// Variables that appear with a nonzero exponent in some term.
  std::vector<std::string> used_vars() const;
  int degree() const;
  int degree_in(const std::string& var) const;
  double coefficient(const Exponents& e) const;
  /// Constant term (all exponents zero).
  double constant_term() const;
  /// Largest absolute coefficient.
  double max_abs_coefficient() const;

  /// Re-expresses the polynomial over `vars`, which must contain every used variable.
  Polynomial with_vars(std::vector<std::string> vars) const;
  /// Drops declared variables that no term uses.
  Polynomial pruned() const;

  double eval(const Assignment& point) const;
  /// Values given in vars() order.
  double eval(std::span<const double> values) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  Polynomial pow(unsigned k) const;

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator+(Polynomial a, double c);
  friend Polynomial operator+(double c, Polynomial a) { return std::move(a) + c; }
  friend Polynomial operator-(Polynomial a, double c) { return std::move(a) + (-c); }
  friend Polynomial operator-(double c, const Polynomial& a) { return (-a) + c; }

  /// Exact structural equality of variable lists and coefficients.
  bool operator==(const Polynomial& o) const = default;

 private:
  std::vector<std::string> vars_;
  std::map<Exponents, double> terms_;
};

/// Max |coefficient difference| after aligning variable lists.
double max_coefficient_distance(const Polynomial& a, const Polynomial& b);

std::vector<std::string> merge_vars(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b);

Polynomial derivative(const Polynomial& p, const std::string& var);
Polynomial second_derivative(const Polynomial& p, const std::string& v1,
                             const std::string& v2);

/// Exact composition p(var := q).
Polynomial substitute(const Polynomial& p, const std::string& var,
                      const Polynomial& q);
/// Simultaneous substitution of several variables.
Polynomial compose(const Polynomial& p,
                   const std::map<std::string, Polynomial>& replacements);

/// Raw moments m_0..m_d of one scalar noise component.
struct NoiseMoments {
  std::vector<double> moments;

  /// Standard normal: 1, 0, 1, 0, 3, 0, 15, ...
  static NoiseMoments gaussian(unsigned max_order);
  /// Uniform on [-sqrt(3), sqrt(3)] (unit variance).
  static NoiseMoments uniform_unit_variance(unsigned max_order);
  /// Symmetric +-1.
  static NoiseMoments rademacher(unsigned max_order);

  unsigned max_order() const {
    return moments.empty() ? 0 : static_cast<unsigned>(moments.size() - 1);
  }
  /// Empty when m0 = 1 and m2 - m1^2 >= 0 (when m2 is present).
  std::vector<std::string> violations() const;
};

/// Replaces each noise monomial by the product of its component moments.
/// The result has no noise variables. Throws std::out_of_range when a
/// required moment order is missing.
Polynomial expect(const Polynomial& p,
                  const std::map<std::string, NoiseMoments>& noise);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box over named variables.
struct IntervalBox {
  std::vector<std::string> vars;
  std::vector<Interval> bounds;

  std::size_t dim() const { return vars.size(); }
  std::optional<Interval> bound_of(const std::string& var) const;
  bool contains(std::span<const double> x) const;
  /// Every interval of `inner` lies inside the same-named interval here.
  bool contains_box(const IntervalBox& inner) const;
  /// Canonical inequalities g_i(x) = (x_i - lo_i)(hi_i - x_i) >= 0.
  std::vector<Polynomial> constraint_polynomials() const;
  bool operator==(const IntervalBox&) const = default;
};

// ---------------------------------------------------------------------------
// Univariate machinery. Dense coefficient vectors are ascending by power.

using Dense = std::vector<double>;

/// Dense coefficients of a polynomial using at most one variable.
/// Throws std::invalid_argument for multivariate input.
Dense to_dense(const Polynomial& p);
double horner(std::span<const double> c, double x);

/// Number of distinct real roots in (a, b]. Endpoints may be infinite.
/// Throws std::invalid_argument for the zero polynomial or a >= b.
int sturm_root_count(const Dense& p, double a, double b);
int sturm_root_count(const Polynomial& p, double a, double b);

/// Distinct real roots in (a, b), each located to width <= tol.
std::vector<double> isolate_roots(const Dense& p, double a, double b,
                                  double tol = 1e-10);

struct MinResult {
  double value = 0.0;
  double argmin = 0.0;
};

/// Minimum over [a, b]: endpoints plus isolated critical points.
/// Ties are broken toward the smaller argument.
MinResult min_on_interval(const Dense& p, double a, double b);
MinResult min_on_interval(const Polynomial& p, double a, double b);

enum class Verdict { holds, fails, inconclusive };
const char* to_string(Verdict v);

struct NonnegReport {
  Verdict verdict = Verdict::inconclusive;
  /// Minimum found (exact for univariate, grid minimum otherwise).
  double margin = 0.0;
  /// Point (in box variable order) where the margin is attained.
  std::vector<double> witness;
  bool exact = false;
};

struct GridOptions {
  /// Upper bound on the number of grid points for multivariate checks.
  std::size_t max_points = 200000;
};

/// Nonnegativity of p on `box`. Exact for polynomials in at most one variable;
/// multivariate input uses a grid with a Lipschitz safety margin.
NonnegReport nonneg_on_box(const Polynomial& p, const IntervalBox& box,
                           const GridOptions& grid = {});

/// Minimum of p over the box: exact univariate, grid-based otherwise.
MinResult box_minimum(const Polynomial& p, const IntervalBox& box,
                             std::vector<double>* witness = nullptr,
                             const GridOptions& grid = {});

/// Flat evaluator for hot loops. Variables are bound by position.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  CompiledPolynomial(const Polynomial& p, const std::vector<std::string>& order);
  double operator()(std::span<const double> values) const;

 private:
  std::size_t nvars_ = 0;
  std::vector<double> coefs_;
  std::vector<unsigned> exps_;  // nterms * nvars_
  unsigned max_exp_ = 0;
};

}  // namespace shscert
