#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "shscert/augment.hpp"
#include "shscert/certify.hpp"
#include "shscert/model.hpp"
#include "shscert/poly.hpp"

namespace testing {

using namespace shscert;

struct CaseData {
  double a1, b1, a2, b2;
  double barrier[5];  // ascending
  double flow_slope, flow_offset;
  double jump_slope, jump_offset;
  double alpha_bar, eta_bar, gamma1, gamma2, kappa1, kappa2;
};

inline const CaseData& case_data(int k) {
  static const CaseData cases[3] = {
      {-0.4, 0.5, 0.01, 0.06, {0.0369, -0.0849, 0.0814, -0.0345, 0.0054}, -0.05152, 3.0,
       -0.06145, 2.6, 0.13, 4.4, 0.0015, 0.0012, 0.01, 0.99},
      {-0.3, 0.2, 1.01, 1.0, {0.0617, -0.1375, 0.1163, -0.0438, 0.0061}, -0.02152, 4.0, -0.99,
       2.0, 0.12, 4.6, 0.0025, 0.003, 0.04547, 1.00001},
      {0.01, 0.7, 0.02, 0.9, {0.1581, -0.3031, 0.2158, -0.0673, 0.0077}, -0.2852, 2.5, -0.19,
       3.0, 0.16, 4.2, 0.003, 0.003, -0.0005, 0.98},
  };
  return cases[k - 1];
}

inline IntervalBox box1(double lo, double hi) { return IntervalBox{{"x"}, {{lo, hi}}}; }

inline Polynomial affine_x(double slope, double offset) {
  const double c[2] = {offset, slope};
  return Polynomial::univariate("x", c).with_vars({"x"});
}

/// Scalar SHS: dx = (a1 x^3 + b1 nu) dt + 0.6 dW + 0.5 dP (lambda 0.5),
/// x+ = a2 x^3 + b2 nu + 0.5 varsigma, built term by term.
inline ShsModel case_model(int k) {
  const CaseData& d = case_data(k);
  ShsModel m;
  m.state_vars = {"x"};
  m.input_vars = {"nu"};
  m.noise_vars = {"varsigma"};
  Polynomial f1({"x", "nu"});
  f1.add_term({3, 0}, d.a1);
  f1.add_term({0, 1}, d.b1);
  m.drift = {f1};
  m.diffusion = {{Polynomial::constant(0.6, {"x"})}};
  m.reset = {{Polynomial::constant(0.5, {"x"})}};
  m.poisson_rates = {0.5};
  Polynomial f2({"x", "nu", "varsigma"});
  f2.add_term({3, 0, 0}, d.a2);
  f2.add_term({0, 1, 0}, d.b2);
  f2.add_term({0, 0, 1}, 0.5);
  m.jump_map = {f2};
  m.noise = {NoiseComponent{}};
  m.jump = {0.1, 1, 7};
  m.state_set = box1(0, 8);
  m.initial_set = box1(0, 1.5);
  m.unsafe_set = box1(7, 8);
  return m;
}

inline CbcCandidate case_candidate(int k) {
  const CaseData& d = case_data(k);
  CbcCandidate c;
  c.barrier = Polynomial::univariate("x", d.barrier).with_vars({"x"});
  c.kappa1 = d.kappa1;
  c.kappa2 = d.kappa2;
  c.gamma1 = d.gamma1;
  c.gamma2 = d.gamma2;
  c.alpha_bar = d.alpha_bar;
  c.eta_bar = d.eta_bar;
  c.nu_flow = {affine_x(d.flow_slope, d.flow_offset)};
  c.nu_jump = {affine_x(d.jump_slope, d.jump_offset)};
  return c;
}

// ---------------------------------------------------------------------------
// Independent scalar oracles on plain coefficient arrays.

inline double power_sum(const std::vector<double>& asc, double x) {
  double s = 0.0;
  for (std::size_t i = 0; i < asc.size(); ++i) s += asc[i] * std::pow(x, static_cast<double>(i));
  return s;
}

inline double horner_desc(std::initializer_list<double> desc, double x) {
  double s = 0.0;
  for (double c : desc) s = s * x + c;
  return s;
}

/// Number of sign changes of p between consecutive grid points of (a, b].
inline int scan_root_count(const std::vector<double>& asc, double a, double b, int points) {
  int count = 0;
  double prev = power_sum(asc, a);
  for (int i = 1; i <= points; ++i) {
    const double x = a + (b - a) * i / points;
    const double v = power_sum(asc, x);
    if (v == 0.0) {
      ++count;
      // skip the exact zero so it is not counted twice
      prev = power_sum(asc, x + (b - a) / points * 0.5);
      continue;
    }
    if ((prev < 0.0 && v > 0.0) || (prev > 0.0 && v < 0.0)) ++count;
    prev = v;
  }
  return count;
}

template <class F>
double scan_min(F&& f, double a, double b, int points) {
  double m = f(a);
  for (int i = 1; i <= points; ++i) m = std::min(m, f(a + (b - a) * i / points));
  return m;
}

/// Product of (x - r_i) times lead, ascending coefficients.
inline std::vector<double> from_roots(const std::vector<double>& roots, double lead) {
  std::vector<double> p{lead};
  for (double r : roots) {
    std::vector<double> q(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i + 1] += p[i];
      q[i] -= r * p[i];
    }
    p = q;
  }
  return p;
}

struct Rng64 {
  std::mt19937_64 gen;
  explicit Rng64(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
};

/// Mean and standard error of a sample.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

inline Estimate estimate(const std::vector<double>& xs) {
  double s = 0.0, s2 = 0.0;
  for (double x : xs) s += x;
  const double n = static_cast<double>(xs.size());
  const double mean = s / n;
  for (double x : xs) s2 += (x - mean) * (x - mean);
  return {mean, std::sqrt(s2 / (n - 1.0) / n)};
}

}  // namespace testing
