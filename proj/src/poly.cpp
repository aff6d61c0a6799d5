#include "shscert/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace shscert {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<std::string> vars) : vars_(std::move(vars)) {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    for (std::size_t j = i + 1; j < vars_.size(); ++j) {
      if (vars_[i] == vars_[j]) {
        throw std::invalid_argument("duplicate variable '" + vars_[i] + "'");
      }
    }
  }
}

Polynomial Polynomial::constant(double c, std::vector<std::string> vars) {
  Polynomial p(std::move(vars));
  p.add_term(Exponents(p.vars_.size(), 0), c);
  return p;
}

Polynomial Polynomial::variable(const std::string& name, std::vector<std::string> vars) {
  if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);
  Polynomial p(std::move(vars));
  Exponents e(p.vars_.size(), 0);
  e[*p.var_index(name)] = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::univariate(const std::string& var, std::span<const double> ascending) {
  Polynomial p({var});
  for (std::size_t k = 0; k < ascending.size(); ++k) {
    p.add_term({static_cast<unsigned>(k)}, ascending[k]);
  }
  return p;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (e.size() != vars_.size()) {
    throw std::invalid_argument("exponent vector length " + std::to_string(e.size()) +
                                " does not match " + std::to_string(vars_.size()) +
                                " declared variables");
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

std::optional<std::size_t> Polynomial::var_index(const std::string& name) const {
  auto it = std::find(vars_.begin(), vars_.end(), name);
  if (it == vars_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vars_.begin());
}

std::vector<std::string> Polynomial::used_vars() const {
  std::vector<bool> used(vars_.size(), false);
  for (const auto& [e, c] : terms_) {
    for (std::size_t i = 0; i < e.size(); ++i) used[i] = used[i] || e[i] > 0;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (used[i]) out.push_back(vars_[i]);
  }
  return out;
}

int Polynomial::degree() const {
  if (terms_.empty()) return -1;
  int d = 0;
  for (const auto& [e, c] : terms_) {
    d = std::max(d, static_cast<int>(std::accumulate(e.begin(), e.end(), 0u)));
  }
  return d;
}

int Polynomial::degree_in(const std::string& var) const {
  auto idx = var_index(var);
  if (!idx || terms_.empty()) return terms_.empty() ? -1 : 0;
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[*idx]));
  return d;
}

double Polynomial::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const {
  return coefficient(Exponents(vars_.size(), 0));
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::with_vars(std::vector<std::string> vars) const {
  Polynomial out(std::move(vars));
  std::vector<std::size_t> map(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    auto j = out.var_index(vars_[i]);
    if (!j) {
      bool used = std::any_of(terms_.begin(), terms_.end(),
                              [i](const auto& t) { return t.first[i] > 0; });
      if (used) {
        throw std::invalid_argument("variable '" + vars_[i] +
                                    "' is used but missing from the target variable list");
      }
      map[i] = std::numeric_limits<std::size_t>::max();
    } else {
      map[i] = *j;
    }
  }
  for (const auto& [e, c] : terms_) {
    Exponents f(out.vars_.size(), 0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] > 0) f[map[i]] = e[i];
    }
    out.add_term(f, c);
  }
  return out;
}

Polynomial Polynomial::pruned() const { return with_vars(used_vars()); }

double Polynomial::eval(const Assignment& point) const {
  std::vector<double> values(vars_.size(), 0.0);
  std::vector<bool> used(vars_.size(), false);
  for (const auto& [e, c] : terms_) {
    for (std::size_t i = 0; i < e.size(); ++i) used[i] = used[i] || e[i] > 0;
  }
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    auto it = point.find(vars_[i]);
    if (it != point.end()) {
      values[i] = it->second;
    } else if (used[i]) {
      throw std::invalid_argument("variable '" + vars_[i] + "' is not assigned");
    }
  }
  return eval(std::span<const double>(values));
}

double Polynomial::eval(std::span<const double> values) const {
  if (values.size() != vars_.size()) {
    throw std::invalid_argument("expected " + std::to_string(vars_.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (unsigned k = 0; k < e[i]; ++k) t *= values[i];
    }
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::operator-() const {
  Polynomial out = *this;
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

std::vector<std::string> merge_vars(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  for (const auto& v : b) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (vars_ != o.vars_) {
    auto merged = merge_vars(vars_, o.vars_);
    if (merged != vars_) *this = with_vars(merged);
    Polynomial rhs = o.with_vars(merged);
    for (const auto& [e, c] : rhs.terms_) add_term(e, c);
    return *this;
  }
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) { return *this += -o; }

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Polynomial operator+(Polynomial a, double c) {
  a.add_term(Exponents(a.vars_.size(), 0), c);
  return a;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  auto merged = merge_vars(a.vars_, b.vars_);
  const Polynomial lhs = a.vars_ == merged ? a : a.with_vars(merged);
  const Polynomial rhs = b.vars_ == merged ? b : b.with_vars(merged);
  Polynomial out(merged);
  Exponents e(merged.size());
  for (const auto& [ea, ca] : lhs.terms_) {
    for (const auto& [eb, cb] : rhs.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial result = constant(1.0, vars_);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

double max_coefficient_distance(const Polynomial& a, const Polynomial& b) {
  Polynomial d = a - b;
  return d.max_abs_coefficient();
}

Polynomial derivative(const Polynomial& p, const std::string& var) {
  Polynomial out(p.vars());
  auto idx = p.var_index(var);
  if (!idx) return out;
  for (const auto& [e, c] : p.terms()) {
    if (e[*idx] == 0) continue;
    Exponents f = e;
    f[*idx] -= 1;
    out.add_term(f, c * e[*idx]);
  }
  return out;
}

Polynomial second_derivative(const Polynomial& p, const std::string& v1,
                             const std::string& v2) {
  return derivative(derivative(p, v1), v2);
}

Polynomial compose(const Polynomial& p,
                   const std::map<std::string, Polynomial>& replacements) {
  // Result variables: p's untouched variables plus those of the replacements.
  std::vector<std::string> keep;
  for (const auto& v : p.vars()) {
    if (!replacements.count(v)) keep.push_back(v);
  }
  std::vector<std::string> vars = keep;
  for (const auto& [v, q] : replacements) vars = merge_vars(vars, q.vars());

  const std::size_t n = p.vars().size();
  std::vector<const Polynomial*> repl(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = replacements.find(p.vars()[i]);
    if (it != replacements.end()) repl[i] = &it->second;
  }
  // Power caches per substituted variable.
  std::vector<std::vector<Polynomial>> powers(n);
  auto power = [&](std::size_t i, unsigned k) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(Polynomial::constant(1.0, vars));
    while (cache.size() <= k) cache.push_back(cache.back() * repl[i]->with_vars(vars));
    return cache[k];
  };

  Polynomial out(vars);
  for (const auto& [e, c] : p.terms()) {
    Polynomial term(vars);
    Exponents base(vars.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!repl[i] && e[i] > 0) {
        base[*term.var_index(p.vars()[i])] = e[i];
      }
    }
    term.add_term(base, c);
    for (std::size_t i = 0; i < n; ++i) {
      if (repl[i] && e[i] > 0) term = term * power(i, e[i]);
    }
    out += term;
  }
  return out;
}

Polynomial substitute(const Polynomial& p, const std::string& var, const Polynomial& q) {
  return compose(p, {{var, q}});
}

// ---------------------------------------------------------------------------
// Noise moments

NoiseMoments NoiseMoments::gaussian(unsigned max_order) {
  NoiseMoments m;
  m.moments.assign(max_order + 1, 0.0);
  m.moments[0] = 1.0;
  for (unsigned k = 2; k <= max_order; k += 2) {
    m.moments[k] = m.moments[k - 2] * static_cast<double>(k - 1);
  }
  return m;
}

NoiseMoments NoiseMoments::uniform_unit_variance(unsigned max_order) {
  NoiseMoments m;
  m.moments.assign(max_order + 1, 0.0);
  const double a = std::sqrt(3.0);
  for (unsigned k = 0; k <= max_order; k += 2) {
    m.moments[k] = std::pow(a, static_cast<double>(k)) / (k + 1.0);
  }
  return m;
}

NoiseMoments NoiseMoments::rademacher(unsigned max_order) {
  NoiseMoments m;
  m.moments.assign(max_order + 1, 0.0);
  for (unsigned k = 0; k <= max_order; k += 2) m.moments[k] = 1.0;
  return m;
}

std::vector<std::string> NoiseMoments::violations() const {
  std::vector<std::string> out;
  if (moments.empty() || moments[0] != 1.0) out.emplace_back("m0 = 1");
  if (moments.size() > 2 && moments[2] - moments[1] * moments[1] < 0.0) {
    out.emplace_back("m2 - m1^2 >= 0");
  }
  return out;
}

Polynomial expect(const Polynomial& p, const std::map<std::string, NoiseMoments>& noise) {
  std::vector<std::string> keep;
  std::vector<const NoiseMoments*> mom(p.vars().size(), nullptr);
  for (std::size_t i = 0; i < p.vars().size(); ++i) {
    auto it = noise.find(p.vars()[i]);
    if (it == noise.end()) {
      keep.push_back(p.vars()[i]);
    } else {
      mom[i] = &it->second;
    }
  }
  Polynomial out(keep);
  for (const auto& [e, c] : p.terms()) {
    double factor = c;
    Exponents f;
    f.reserve(keep.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!mom[i]) {
        f.push_back(e[i]);
        continue;
      }
      if (e[i] >= mom[i]->moments.size()) {
        throw std::out_of_range("expectation needs moment of order " + std::to_string(e[i]) +
                                " for noise variable '" + p.vars()[i] + "' (have up to " +
                                std::to_string(mom[i]->max_order()) + ")");
      }
      factor *= mom[i]->moments[e[i]];
    }
    out.add_term(f, factor);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boxes

std::optional<Interval> IntervalBox::bound_of(const std::string& var) const {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] == var) return bounds[i];
  }
  return std::nullopt;
}

bool IntervalBox::contains(std::span<const double> x) const {
  if (x.size() != bounds.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!bounds[i].contains(x[i])) return false;
  }
  return true;
}

bool IntervalBox::contains_box(const IntervalBox& inner) const {
  for (std::size_t i = 0; i < inner.vars.size(); ++i) {
    auto outer = bound_of(inner.vars[i]);
    if (!outer) return false;
    if (inner.bounds[i].lo < outer->lo || inner.bounds[i].hi > outer->hi) return false;
  }
  return true;
}

std::vector<Polynomial> IntervalBox::constraint_polynomials() const {
  std::vector<Polynomial> g;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Polynomial x = Polynomial::variable(vars[i], vars);
    g.push_back((x - bounds[i].lo) * (bounds[i].hi - x));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Univariate: Sturm sequences and root isolation

Dense to_dense(const Polynomial& p) {
  auto used = p.used_vars();
  if (used.size() > 1) {
    throw std::invalid_argument("expected a univariate polynomial, got variables in " +
                                std::to_string(used.size()) + " dimensions");
  }
  if (p.is_zero()) return {};
  if (used.empty()) return {p.constant_term()};
  const std::size_t idx = *p.var_index(used.front());
  Dense d(static_cast<std::size_t>(p.degree_in(used.front())) + 1, 0.0);
  for (const auto& [e, c] : p.terms()) d[e[idx]] += c;
  return d;
}

double horner(std::span<const double> c, double x) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

namespace {

double max_abs(const Dense& p) {
  double m = 0.0;
  for (double c : p) m = std::max(m, std::abs(c));
  return m;
}

/// Scales to unit max-norm and drops leading coefficients at or below kZeroTol.
void normalize(Dense& p) {
  const double m = max_abs(p);
  if (m == 0.0) {
    p.clear();
    return;
  }
  for (double& c : p) c /= m;
  while (!p.empty() && std::abs(p.back()) <= kZeroTol) p.pop_back();
}

Dense deriv(const Dense& p) {
  if (p.size() <= 1) return {};
  Dense d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = p[k] * static_cast<double>(k);
  return d;
}

/// Long division a = q b + r. Both inputs normalized, b nonzero.
std::pair<Dense, Dense> divmod(const Dense& a, const Dense& b) {
  if (a.size() < b.size()) return {{}, a};
  Dense r = a;
  Dense q(a.size() - b.size() + 1, 0.0);
  const std::size_t db = b.size() - 1;
  for (std::size_t i = a.size(); i-- > db;) {
    const double coef = r[i] / b[db];
    q[i - db] = coef;
    for (std::size_t j = 0; j <= db; ++j) r[i - db + j] -= coef * b[j];
    r[i] = 0.0;
  }
  r.resize(db);
  return {q, r};
}

/// Remainder with entries at or below kZeroTol (relative to unit-normalized
/// operands) treated as zero; returned normalized.
Dense remainder(const Dense& a, const Dense& b) {
  Dense r = divmod(a, b).second;
  for (double& c : r) {
    if (std::abs(c) <= kZeroTol) c = 0.0;
  }
  normalize(r);
  return r;
}

Dense gcd(Dense a, Dense b) {
  normalize(a);
  normalize(b);
  while (!b.empty()) {
    Dense r = remainder(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

Dense square_free(const Dense& p) {
  Dense q = p;
  normalize(q);
  Dense g = gcd(q, deriv(q));
  if (g.size() <= 1) return q;
  Dense sf = divmod(q, g).first;
  normalize(sf);
  return sf;
}

std::vector<Dense> sturm_sequence(const Dense& sf) {
  std::vector<Dense> seq{sf};
  Dense d = deriv(sf);
  normalize(d);
  if (d.empty()) return seq;
  seq.push_back(d);
  while (seq.back().size() > 1) {
    Dense r = remainder(seq[seq.size() - 2], seq.back());
    if (r.empty()) break;
    for (double& c : r) c = -c;
    seq.push_back(std::move(r));
  }
  return seq;
}

int sign_at(const Dense& q, double x) {
  if (q.empty()) return 0;
  if (std::isinf(x)) {
    const bool odd = (q.size() - 1) % 2 == 1;
    int s = q.back() > 0 ? 1 : -1;
    return (x < 0 && odd) ? -s : s;
  }
  double v = 0.0;
  double mag = 0.0;
  const double ax = std::abs(x);
  for (auto it = q.rbegin(); it != q.rend(); ++it) {
    v = v * x + *it;
    mag = mag * ax + std::abs(*it);
  }
  if (std::abs(v) <= kZeroTol * mag) return 0;
  return v > 0 ? 1 : -1;
}

int variations(const std::vector<Dense>& seq, double x) {
  int count = 0;
  int prev = 0;
  for (const auto& q : seq) {
    const int s = sign_at(q, x);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

struct Isolator {
  Dense sf;
  std::vector<Dense> seq;
  double tol;
  std::vector<double> roots;

  void run(double lo, double hi, int vlo, int vhi, int depth) {
    const int n = vlo - vhi;
    if (n <= 0) return;
    if (hi - lo <= tol || depth > 200) {
      roots.push_back(0.5 * (lo + hi));
      return;
    }
    if (n == 1) {
      const int slo = sign_at(sf, lo);
      const int shi = sign_at(sf, hi);
      if (shi == 0) {
        roots.push_back(hi);
        return;
      }
      if (slo != 0 && slo != shi) {
        double a = lo;
        double b = hi;
        while (b - a > tol) {
          const double m = 0.5 * (a + b);
          const int sm = sign_at(sf, m);
          if (sm == 0) {
            a = b = m;
            break;
          }
          (sm == slo ? a : b) = m;
        }
        roots.push_back(0.5 * (a + b));
        return;
      }
    }
    const double mid = 0.5 * (lo + hi);
    const int vmid = variations(seq, mid);
    run(lo, mid, vlo, vmid, depth + 1);
    run(mid, hi, vmid, vhi, depth + 1);
  }
};

/// Finite bracket for all real roots (Cauchy bound) intersected with [a, b].
std::pair<double, double> finite_bracket(const Dense& p, double a, double b) {
  double bound = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    bound = std::max(bound, std::abs(p[k] / p.back()));
  }
  bound += 1.0;
  return {std::max(a, -bound), std::min(b, bound)};
}

}  // namespace

int sturm_root_count(const Dense& p, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("sturm_root_count requires a < b");
  Dense q = p;
  normalize(q);
  if (q.empty()) throw std::invalid_argument("sturm_root_count: zero polynomial");
  if (q.size() == 1) return 0;
  const auto seq = sturm_sequence(square_free(q));
  return variations(seq, a) - variations(seq, b);
}

int sturm_root_count(const Polynomial& p, double a, double b) {
  return sturm_root_count(to_dense(p), a, b);
}

std::vector<double> isolate_roots(const Dense& p, double a, double b, double tol) {
  Dense q = p;
  normalize(q);
  if (q.size() <= 1 || !(a < b)) return {};
  Isolator iso{square_free(q), {}, tol, {}};
  iso.seq = sturm_sequence(iso.sf);
  auto [lo, hi] = finite_bracket(iso.sf, a, b);
  if (!(lo < hi)) return {};
  iso.run(lo, hi, variations(iso.seq, lo), variations(iso.seq, hi), 0);
  std::vector<double> out;
  for (double r : iso.roots) {
    if (r > a && r < b) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MinResult min_on_interval(const Dense& p, double a, double b) {
  if (a > b) throw std::invalid_argument("min_on_interval requires a <= b");
  MinResult best{horner(p, a), a};
  if (a == b) return best;
  for (double r : isolate_roots(deriv(p), a, b)) {
    const double v = horner(p, r);
    if (v < best.value) best = {v, r};
  }
  const double vb = horner(p, b);
  if (vb < best.value) best = {vb, b};
  return best;
}

MinResult min_on_interval(const Polynomial& p, double a, double b) {
  return min_on_interval(to_dense(p), a, b);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Box checks

namespace {

void require_box_covers(const Polynomial& p, const IntervalBox& box) {
  for (const auto& v : p.used_vars()) {
    if (!box.bound_of(v)) {
      throw std::invalid_argument("variable '" + v + "' is not bounded by the box");
    }
  }
}

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  double cell_radius = 0.0;  // max distance from any box point to the grid
};

GridMin grid_minimum(const Polynomial& p, const IntervalBox& box, const GridOptions& grid) {
  const std::size_t k = box.dim();
  GridMin out;
  const auto per_dim = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(
             std::pow(static_cast<double>(grid.max_points), 1.0 / static_cast<double>(k)))));
  std::vector<double> step(k);
  double r2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    step[i] = box.bounds[i].width() / static_cast<double>(per_dim - 1);
    r2 += step[i] * step[i];
  }
  out.cell_radius = 0.5 * std::sqrt(r2);
  CompiledPolynomial f(p, box.vars);
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> pt(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) {
      pt[i] = box.bounds[i].lo + step[i] * static_cast<double>(idx[i]);
    }
    const double v = f(pt);
    if (v < out.value) {
      out.value = v;
      out.point = pt;
    }
    std::size_t d = 0;
    while (d < k && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == k) break;
  }
  return out;
}

/// Bound on the gradient norm over the box from absolute coefficient sums.
double lipschitz_bound(const Polynomial& p, const IntervalBox& box) {
  double total = 0.0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    Polynomial d = derivative(p, box.vars[i]);
    double li = 0.0;
    for (const auto& [e, c] : d.terms()) {
      double t = std::abs(c);
      for (std::size_t j = 0; j < e.size(); ++j) {
        auto b = box.bound_of(d.vars()[j]);
        const double m = b ? std::max(std::abs(b->lo), std::abs(b->hi)) : 0.0;
        t *= std::pow(m, static_cast<double>(e[j]));
      }
      li += t;
    }
    total += li * li;
  }
  return std::sqrt(total);
}

}  // namespace

MinResult box_minimum(const Polynomial& p, const IntervalBox& box,
                      std::vector<double>* witness, const GridOptions& grid) {
  require_box_covers(p, box);
  const auto used = p.used_vars();
  std::vector<double> w(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) w[i] = box.bounds[i].lo;
  MinResult r;
  if (used.empty()) {
    r = {p.constant_term(), w.empty() ? 0.0 : w[0]};
  } else if (used.size() == 1) {
    const auto iv = *box.bound_of(used[0]);
    r = min_on_interval(p, iv.lo, iv.hi);
    for (std::size_t i = 0; i < box.dim(); ++i) {
      if (box.vars[i] == used[0]) w[i] = r.argmin;
    }
  } else {
    auto g = grid_minimum(p.pruned().with_vars(box.vars), box, grid);
    r = {g.value, g.point.empty() ? 0.0 : g.point[0]};
    w = g.point;
  }
  if (witness) *witness = std::move(w);
  return r;
}

NonnegReport nonneg_on_box(const Polynomial& p, const IntervalBox& box, const GridOptions& grid) {
  require_box_covers(p, box);
  NonnegReport rep;
  const double zero = kZeroTol * std::max(1.0, p.max_abs_coefficient());
  if (p.used_vars().size() <= 1) {
    const MinResult m = box_minimum(p, box, &rep.witness, grid);
    rep.exact = true;
    rep.margin = m.value;
    rep.verdict = m.value >= -zero ? Verdict::holds : Verdict::fails;
    return rep;
  }
  const Polynomial q = p.pruned().with_vars(box.vars);
  const GridMin g = grid_minimum(q, box, grid);
  rep.margin = g.value;
  rep.witness = g.point;
  if (g.value < -zero) {
    rep.verdict = Verdict::fails;
  } else if (g.value >= lipschitz_bound(q, box) * g.cell_radius) {
    rep.verdict = Verdict::holds;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

// ---------------------------------------------------------------------------

CompiledPolynomial::CompiledPolynomial(const Polynomial& p, const std::vector<std::string>& order)
    : nvars_(order.size()) {
  const Polynomial q = p.pruned().with_vars(order);
  for (const auto& [e, c] : q.terms()) {
    coefs_.push_back(c);
    for (std::size_t i = 0; i < nvars_; ++i) {
      exps_.push_back(e[i]);
      max_exp_ = std::max(max_exp_, e[i]);
    }
  }
}

double CompiledPolynomial::operator()(std::span<const double> values) const {
  double sum = 0.0;
  const unsigned* e = exps_.data();
  for (double c : coefs_) {
    double t = c;
    for (std::size_t i = 0; i < nvars_; ++i, ++e) {
      for (unsigned k = 0; k < *e; ++k) t *= values[i];
    }
    sum += t;
  }
  return sum;
}

}  // namespace shscert
