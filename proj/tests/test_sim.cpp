#include <doctest.h>

#include <cmath>
#include <set>

#include "shscert/sim.hpp"
#include "support.hpp"

using namespace shscert;
using namespace testing;

namespace {

/// dx = (a x + c + b nu) dt + sigma dW + rho dP (rate lambda), x+ = g x + h nu + s varsigma.
struct Scalar {
  double a = 0.0, c = 0.0, b = 0.0;
  double sigma = 0.0, rho = 0.0, lambda = 0.0;
  double g = 1.0, h = 0.0, s = 0.0;
};

ShsModel scalar_model(const Scalar& p, JumpParams jp = {0.1, 1, 7}) {
  ShsModel m;
  m.state_vars = {"x"};
  m.input_vars = {"nu"};
  m.noise_vars = {"varsigma"};
  Polynomial f1({"x", "nu"});
  f1.add_term({1, 0}, p.a);
  f1.add_term({0, 0}, p.c);
  f1.add_term({0, 1}, p.b);
  m.drift = {f1};
  m.diffusion = {{Polynomial::constant(p.sigma, {"x"})}};
  m.reset = {{Polynomial::constant(p.rho, {"x"})}};
  m.poisson_rates = {p.lambda};
  Polynomial f2({"x", "nu", "varsigma"});
  f2.add_term({1, 0, 0}, p.g);
  f2.add_term({0, 1, 0}, p.h);
  f2.add_term({0, 0, 1}, p.s);
  m.jump_map = {f2};
  m.noise = {NoiseComponent{}};
  m.jump = jp;
  m.state_set = box1(-100, 100);
  m.initial_set = box1(0, 1);
  m.unsafe_set = box1(50, 100);
  return m;
}

Controllers constant_controllers(double flow, double jump) {
  return {{Polynomial::constant(flow, {"x"})}, {Polynomial::constant(jump, {"x"})}};
}

std::vector<double> flow_samples(const ShsModel& m, double x, double nu, double tau, int substeps,
                                 int n, std::uint64_t seed) {
  const CompiledDynamics dyn(m);
  Rng rng(seed);
  std::vector<double> out(n);
  const double xs[1] = {x};
  const double us[1] = {nu};
  for (int i = 0; i < n; ++i) out[i] = dyn.flow_step(xs, us, tau, substeps, rng)[0];
  return out;
}

std::vector<double> squares(std::vector<double> v) {
  for (double& d : v) d *= d;
  return v;
}

// Exact second moment of dx = (-x + nu) dt + sigma dW + rho dP over time t.
double linear_second_moment(double x, double nu, double sigma, double rho, double lambda, double t) {
  const double c = nu + lambda * rho;
  const double mean = c + (x - c) * std::exp(-t);
  const double var = (sigma * sigma + lambda * rho * rho) / 2.0 * (1.0 - std::exp(-2.0 * t));
  return mean * mean + var;
}

double log_binom_pmf(int n, int i, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
         (n - i) * std::log1p(-p);
}

double binom_cdf(int n, int k, double p) {
  double s = 0.0;
  for (int i = 0; i <= k; ++i) s += std::exp(log_binom_pmf(n, i, p));
  return s;
}

}  // namespace

TEST_CASE("zero dynamics leave the state unchanged") {
  const ShsModel m = scalar_model({});
  for (double x : {-3.0, 0.0, 2.5}) {
    const auto v = flow_samples(m, x, 0.0, 0.1, 20, 5, 1);
    for (double y : v) CHECK(y == doctest::Approx(x).epsilon(1e-15));
  }
}

TEST_CASE("constant drift integrates exactly") {
  const ShsModel m = scalar_model({.c = 1.5});
  for (int substeps : {1, 7, 20}) {
    const auto v = flow_samples(m, 2.0, 0.0, 0.1, substeps, 3, 2);
    for (double y : v) CHECK(y == doctest::Approx(2.15).epsilon(1e-13));
  }
  const ShsModel mb = scalar_model({.b = 2.0});
  CHECK(flow_samples(mb, 0.0, 3.0, 0.1, 20, 1, 3)[0] == doctest::Approx(0.6));
}

TEST_CASE("brownian increment variance") {
  const ShsModel m = scalar_model({.sigma = 0.6});
  const auto v = flow_samples(m, 0.0, 0.0, 0.1, 20, 100000, 4);
  const Estimate mean = estimate(v);
  const Estimate sq = estimate(squares(v));
  CHECK(std::abs(mean.mean) < 4.0 * mean.se);
  CHECK(std::abs(sq.mean - 0.036) < 0.05 * 0.036);
}

TEST_CASE("poisson increment moments") {
  const ShsModel m = scalar_model({.rho = 0.5, .lambda = 0.5});
  const auto v = flow_samples(m, 1.0, 0.0, 0.1, 20, 100000, 5);
  const Estimate e = estimate(v);
  CHECK(std::abs(e.mean - 1.025) < 3.0 * e.se);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - 1.025) * (v[i] - 1.025);
  CHECK(std::abs(estimate(d).mean - 0.0125) < 0.05 * 0.0125);
  for (double y : v) {
    const double jumps = (y - 1.0) / 0.5;
    CHECK(std::abs(jumps - std::round(jumps)) < 1e-12);
  }
}

TEST_CASE("ornstein-uhlenbeck second moment") {
  const ShsModel m = scalar_model({.a = -1.0, .sigma = 0.6});
  const auto v = flow_samples(m, 1.0, 0.0, 1.0, 100, 100000, 6);
  const double exact = std::exp(-2.0) + 0.18 * (1.0 - std::exp(-2.0));
  CHECK(std::abs(estimate(squares(v)).mean - exact) < 0.05 * exact);
}

TEST_CASE("case-one jump map moments") {
  const ShsModel m = case_model(1);
  const CbcCandidate c = case_candidate(1);
  const CompiledDynamics dyn(m);
  Rng rng(7);
  const double x[1] = {0.0};
  const double nu[1] = {c.nu_jump[0].eval(std::vector<double>{0.0})};
  CHECK(nu[0] == doctest::Approx(2.6));
  std::vector<double> v(100000), noise(100000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dyn.jump_step(x, nu, rng)[0];
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = 0.5 * dyn.sample_noise(0, rng);
  const Estimate e = estimate(v);
  CHECK(std::abs(e.mean - 0.156) < 3.0 * e.se);
  const Estimate n = estimate(noise);
  CHECK(std::abs(n.mean) < 3.0 * n.se);
}

TEST_CASE("noise samplers have unit variance") {
  ShsModel m = scalar_model({});
  for (NoiseSampler s : {NoiseSampler::gaussian, NoiseSampler::uniform, NoiseSampler::rademacher}) {
    m.noise[0].sampler = s;
    const CompiledDynamics dyn(m);
    Rng rng(11);
    std::vector<double> v(50000);
    for (double& d : v) d = dyn.sample_noise(0, rng);
    CHECK(std::abs(estimate(squares(v)).mean - 1.0) < 0.03);
  }
}

TEST_CASE("deterministic contraction matches the closed form") {
  const ShsModel m = scalar_model({.a = -1.0, .g = 0.5}, {0.1, 2, 2});
  SimConfig cfg;
  cfg.horizon = 9;
  cfg.substeps_per_tau = 10;
  cfg.schedule = FixedGap{2};
  cfg.x0 = std::vector<double>{1.0};
  const Trajectory t = simulate(m, constant_controllers(0.0, 0.0), cfg);
  REQUIRE(t.points.size() == 10);
  double x = 1.0;
  const double per_flow = std::pow(1.0 - 0.01, 10);
  for (int k = 1; k <= 9; ++k) {
    x *= (k % 3 == 0) ? 0.5 : per_flow;
    CHECK(t.points[k].state.x[0] == doctest::Approx(x).epsilon(1e-13));
  }
  CHECK_FALSE(t.first_unsafe.has_value());
  CHECK_FALSE(t.first_exit.has_value());
  CHECK_FALSE(t.blowup.has_value());
}

TEST_CASE("transition bookkeeping under a fixed gap") {
  const ShsModel m = scalar_model({.a = -1.0, .sigma = 0.1});
  SimConfig cfg;
  cfg.horizon = 20;
  cfg.schedule = FixedGap{3};
  const Trajectory t = simulate(m, constant_controllers(0.0, 0.0), cfg, 3);
  CHECK(t.jump_count == 5);
  CHECK(t.flow_count == 15);
  REQUIRE(t.points.size() == 21);
  CHECK_FALSE(t.points[0].scenario.has_value());
  CHECK(t.points[0].state.z == 0);
  int flows = 0;
  for (int k = 1; k <= 20; ++k) {
    const auto& p = t.points[k];
    CHECK(p.k == k);
    const bool jump = k % 4 == 0;
    CHECK(*p.scenario == (jump ? Scenario::jump : Scenario::flow));
    CHECK(p.state.z == (jump ? 0 : k % 4));
    flows += !jump;
    CHECK(p.time == doctest::Approx(flows * 0.1));
  }
}

TEST_CASE("uniform schedule gaps stay admissible") {
  const ShsModel m = scalar_model({.a = -1.0}, {0.1, 2, 5});
  SimConfig cfg;
  cfg.horizon = 400;
  std::set<int> seen;
  for (std::size_t idx = 0; idx < 5; ++idx) {
    const Trajectory t = simulate(m, constant_controllers(0.0, 0.0), cfg, idx);
    int run = 0;
    for (std::size_t k = 1; k < t.points.size(); ++k) {
      if (*t.points[k].scenario == Scenario::jump) {
        CHECK(run >= 2);
        CHECK(run <= 5);
        seen.insert(run);
        run = 0;
      } else {
        ++run;
      }
      CHECK(t.points[k].state.z <= 5);
    }
  }
  CHECK(seen == std::set<int>{2, 3, 4, 5});
}

TEST_CASE("trajectory seeds and reproducibility") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(trajectory_seed(42, i));
  CHECK(seeds.size() == 1000);
  CHECK(trajectory_seed(1, 0) != trajectory_seed(2, 0));

  const ShsModel m = case_model(1);
  const Controllers ctrl = controllers_of(case_candidate(1));
  SimConfig cfg;
  cfg.horizon = 50;
  cfg.master_seed = 9;
  const Trajectory a = simulate(m, ctrl, cfg, 4);
  const Trajectory b = simulate(m, ctrl, cfg, 4);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].state.x == b.points[k].state.x);
  CHECK(a.points[0].state.x[0] >= 0.0);
  CHECK(a.points[0].state.x[0] <= 1.5);
}

TEST_CASE("monte carlo is independent of the worker count") {
  const ShsModel m = case_model(2);
  const CbcCandidate c = case_candidate(2);
  const Acbc a = construct_acbc(c, m.jump, 0.1, 8.0);
  SimConfig cfg;
  cfg.n_trajectories = 200;
  cfg.master_seed = 5;
  cfg.workers = 1;
  const MonteCarloReport r1 = monte_carlo(m, controllers_of(c), a, cfg);
  cfg.workers = 4;
  const MonteCarloReport r4 = monte_carlo(m, controllers_of(c), a, cfg);
  CHECK(r1.exceed_count == r4.exceed_count);
  CHECK(r1.unsafe_count == r4.unsafe_count);
  CHECK(r1.exit_count == r4.exit_count);
  CHECK(r1.n == 200);
}

TEST_CASE("case-one monte carlo stays below its bound") {
  const ShsModel m = case_model(1);
  const CbcCandidate c = case_candidate(1);
  const Acbc a = construct_acbc(c, m.jump, 0.1, 8.0);
  SimConfig cfg;
  cfg.n_trajectories = 300;
  cfg.master_seed = 1;
  const MonteCarloReport r = monte_carlo(m, controllers_of(c), a, cfg);
  CHECK(r.p_unsafe <= r.p_exceed);
  CHECK(r.ci_exceed.lo <= r.bound.delta);
  CHECK_FALSE(r.violation);
  CHECK(r.ci_exceed.lo <= r.p_exceed);
  CHECK(r.p_exceed <= r.ci_exceed.hi);
}

TEST_CASE("blow-up is recorded and stops the path") {
  ShsModel m = scalar_model({});
  Polynomial f1({"x", "nu"});
  f1.add_term({5, 0}, 1.0);
  m.drift = {f1};
  m.state_set = box1(-1e300, 1e300);
  SimConfig cfg;
  cfg.horizon = 50;
  cfg.substeps_per_tau = 1;
  cfg.x0 = std::vector<double>{1e3};
  const Trajectory t = simulate(m, constant_controllers(0.0, 0.0), cfg);
  REQUIRE(t.blowup.has_value());
  CHECK(t.points.size() == static_cast<std::size_t>(*t.blowup));
  const CompiledDynamics dyn(m);
  Rng rng(0);
  const double x[1] = {1e80};
  const double nu[1] = {0.0};
  CHECK_THROWS_AS(dyn.flow_step(x, nu, 0.1, 1, rng), BlowUpError);
}

TEST_CASE("simulation config validation") {
  const ShsModel m = case_model(1);
  SimConfig cfg;
  CHECK(validate(cfg, m).empty());
  cfg.substeps_per_tau = 0;
  CHECK_FALSE(validate(cfg, m).empty());
  cfg = SimConfig{};
  cfg.x0 = std::vector<double>{0.0, 1.0};
  CHECK_FALSE(validate(cfg, m).empty());
  cfg = SimConfig{};
  cfg.schedule = FixedGap{9};
  CHECK_FALSE(validate(cfg, m).empty());
  CHECK_THROWS_AS(simulate(m, controllers_of(case_candidate(1)), cfg), std::invalid_argument);
  CHECK_THROWS_AS(simulate(m, Controllers{}, SimConfig{}), std::invalid_argument);
}

TEST_CASE("clopper-pearson against the binomial distribution") {
  const BinomialInterval z = clopper_pearson(0, 1000, 0.99);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == doctest::Approx(1.0 - std::pow(0.005, 1.0 / 1000.0)).epsilon(1e-10));
  CHECK(std::abs(z.hi - 0.0053) < 1e-4);
  const BinomialInterval all = clopper_pearson(40, 40, 0.95);
  CHECK(all.hi == 1.0);
  CHECK(all.lo == doctest::Approx(std::pow(0.025, 1.0 / 40.0)).epsilon(1e-10));

  Rng64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(2, 60);
    const int k = rng.integer(1, n - 1);
    const BinomialInterval ci = clopper_pearson(k, n, 0.99);
    CHECK(binom_cdf(n, k, ci.hi) == doctest::Approx(0.005).epsilon(1e-6));
    CHECK(1.0 - binom_cdf(n, k - 1, ci.lo) == doctest::Approx(0.005).epsilon(1e-6));
    const BinomialInterval mirror = clopper_pearson(n - k, n, 0.99);
    CHECK(mirror.lo == doctest::Approx(1.0 - ci.hi).epsilon(1e-9));
  }
  CHECK_THROWS(clopper_pearson(1, 0, 0.99));
  CHECK_THROWS(clopper_pearson(5, 4, 0.99));
  CHECK_THROWS(clopper_pearson(1, 4, 1.0));
}

TEST_CASE("flow bound on a linear system by exact moments") {
  // B = x^2, f1 = -x + 1, sigma 0.6, rho 0.5, lambda 0.5:
  // LB = -2x^2 + 2.5x + 0.485 <= -k1 x^2 + 0.485 + 2.5^2 / (4 (2 - k1))
  auto gamma1 = [](double k1) { return 0.485 + 6.25 / (4.0 * (2.0 - k1)); };
  auto slack = [&](double k1, double x) {
    return std::exp(-k1 * 0.1) * (x * x + 0.1 * gamma1(k1)) -
           linear_second_moment(x, 1.0, 0.6, 0.5, 0.5, 0.1);
  };
  CHECK(scan_min([&](double x) { return slack(0.1, x); }, -3.0, 3.0, 6000) > 0.003);
  CHECK(slack(1.0, 1.25) < -0.007);
  CHECK(slack(0.5, 0.812) < 0.0);

  // The generator inequality itself holds for both decay rates.
  for (double k1 : {0.1, 0.5, 1.0}) {
    const double worst = scan_min(
        [&](double x) { return -k1 * x * x + gamma1(k1) - (-2.0 * x * x + 2.5 * x + 0.485); }, -3.0,
        3.0, 6000);
    CHECK(worst > -1e-9);
  }

  const ShsModel m = scalar_model({.a = -1.0, .b = 1.0, .sigma = 0.6, .rho = 0.5, .lambda = 0.5});
  for (double x : {-2.0, 0.0, 1.25, 2.5}) {
    const Estimate e = estimate(squares(flow_samples(m, x, 1.0, 0.1, 20, 100000, 17)));
    CHECK(std::abs(e.mean - linear_second_moment(x, 1.0, 0.6, 0.5, 0.5, 0.1)) < 4.0 * e.se);
  }
}
