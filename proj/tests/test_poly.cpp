#include <doctest.h>

#include "support.hpp"

using namespace shscert;
using namespace testing;

namespace {

Polynomial X() { return Polynomial::variable("x"); }

Polynomial dense_poly(const std::vector<double>& asc) {
  return Polynomial::univariate("x", asc).with_vars({"x"});
}

}  // namespace

TEST_CASE("eval of simple and zero polynomials") {
  const Polynomial p = X() * X() + 1.0;
  CHECK(p.eval(Assignment{{"x", 2.0}}) == doctest::Approx(5.0));
  CHECK(Polynomial().eval(Assignment{}) == 0.0);
  CHECK(Polynomial({"x", "y"}).eval(Assignment{{"x", 3.0}}) == 0.0);
}

TEST_CASE("eval of the case-one barrier at the unsafe boundary") {
  const Polynomial b = case_candidate(1).barrier;
  const double oracle = horner_desc({0.0054, -0.0345, 0.0814, -0.0849, 0.0369}, 7.0);
  CHECK(b.eval(Assignment{{"x", 7.0}}) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(std::abs(b.eval(Assignment{{"x", 7.0}}) - 4.5631) < 1e-4);
}

TEST_CASE("eval reports unassigned variables") {
  const Polynomial p = X() * Polynomial::variable("y");
  CHECK_THROWS_WITH_AS(p.eval(Assignment{{"x", 1.0}}), doctest::Contains("y"),
                       std::invalid_argument);
}

TEST_CASE("zero coefficients are never stored") {
  Polynomial p = X() + 1.0;
  p -= X();
  CHECK(p.terms().size() == 1);
  p -= Polynomial::constant(1.0);
  CHECK(p.is_zero());
  Polynomial q({"x"});
  q.add_term({2}, 0.0);
  CHECK(q.is_zero());
}

TEST_CASE("duplicate variable names are rejected") {
  CHECK_THROWS_AS(Polynomial(std::vector<std::string>{"x", "x"}), std::invalid_argument);
}

TEST_CASE("with_vars keeps used variables") {
  const Polynomial p = X() * 2.0;
  CHECK_THROWS_AS(p.with_vars({"y"}), std::invalid_argument);
  const Polynomial q = p.with_vars({"y", "x"});
  CHECK(q.eval(Assignment{{"x", 3.0}, {"y", 100.0}}) == doctest::Approx(6.0));
}

TEST_CASE("derivatives") {
  const Polynomial d = derivative(X().pow(3), "x");
  CHECK(max_coefficient_distance(d, 3.0 * X() * X()) == 0.0);
  CHECK(derivative(Polynomial::constant(4.0, {"x"}), "x").is_zero());
  const Polynomial db = derivative(case_candidate(1).barrier, "x");
  CHECK(db.eval(Assignment{{"x", 0.0}}) == doctest::Approx(-0.0849));
  const Polynomial xy = X() * X() * Polynomial::variable("y");
  CHECK(second_derivative(xy, "x", "y").eval(Assignment{{"x", 1.5}, {"y", 9.0}}) ==
        doctest::Approx(3.0));
}

TEST_CASE("substitute expands compositions") {
  const Polynomial sq = X() * X();
  const Polynomial s = substitute(sq, "x", X() + 0.5);
  CHECK(max_coefficient_distance(s, X() * X() + X() + 0.25) < 1e-15);

  Polynomial f2({"x", "nu", "varsigma"});
  f2.add_term({3, 0, 0}, 0.01);
  f2.add_term({0, 1, 0}, 0.06);
  f2.add_term({0, 0, 1}, 0.5);
  CHECK(max_coefficient_distance(substitute(X(), "x", f2), f2) == 0.0);

  Polynomial expected({"x", "nu", "varsigma"});
  expected.add_term({6, 0, 0}, 1e-4);
  expected.add_term({3, 1, 0}, 0.0012);
  expected.add_term({3, 0, 1}, 0.01);
  expected.add_term({0, 2, 0}, 0.0036);
  expected.add_term({0, 1, 1}, 0.06);
  expected.add_term({0, 0, 2}, 0.25);
  CHECK(max_coefficient_distance(substitute(sq, "x", f2), expected) < 1e-15);
}

TEST_CASE("substitute respects evaluation on random instances") {
  Rng64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Polynomial p({"x", "y"}), q({"x", "y"});
    for (int t = 0; t < 5; ++t) {
      p.add_term({static_cast<unsigned>(rng.integer(0, 4)), static_cast<unsigned>(rng.integer(0, 3))},
                 rng.uniform(-2, 2));
      q.add_term({static_cast<unsigned>(rng.integer(0, 2)), static_cast<unsigned>(rng.integer(0, 2))},
                 rng.uniform(-2, 2));
    }
    const double x = rng.uniform(-1.5, 1.5), y = rng.uniform(-1.5, 1.5);
    const double qv = q.eval(Assignment{{"x", x}, {"y", y}});
    const double lhs = substitute(p, "x", q).eval(Assignment{{"x", x}, {"y", y}});
    const double rhs = p.eval(Assignment{{"x", qv}, {"y", y}});
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("arithmetic is commutative and associative on random polynomials") {
  Rng64 rng(5);
  auto random_poly = [&] {
    Polynomial p({"x", "y"});
    for (int t = 0; t < 4; ++t) {
      p.add_term({static_cast<unsigned>(rng.integer(0, 3)), static_cast<unsigned>(rng.integer(0, 3))},
                 rng.uniform(-1, 1));
    }
    return p;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Polynomial a = random_poly(), b = random_poly(), c = random_poly();
    CHECK(max_coefficient_distance(a + b, b + a) <= 1e-12);
    CHECK(max_coefficient_distance(a * b, b * a) <= 1e-12);
    CHECK(max_coefficient_distance((a + b) + c, a + (b + c)) <= 1e-12);
    CHECK(max_coefficient_distance((a * b) * c, a * (b * c)) <= 1e-12);
  }
}

TEST_CASE("expect replaces noise monomials by moments") {
  const std::map<std::string, NoiseMoments> g{{"s", NoiseMoments::gaussian(4)}};
  const Polynomial s = Polynomial::variable("s");
  CHECK(expect(s * s, g).eval(Assignment{}) == doctest::Approx(1.0));
  CHECK(expect(s.pow(3), g).is_zero());
  const Polynomial e = expect((X() + 0.5 * s).pow(2), g);
  CHECK(max_coefficient_distance(e, X() * X() + 0.25) < 1e-15);
  CHECK_FALSE(e.has_var("s"));
  CHECK_THROWS_WITH_AS(expect(s.pow(5), g), doctest::Contains("5"), std::out_of_range);
}

TEST_CASE("expect is linear") {
  Rng64 rng(3);
  const std::map<std::string, NoiseMoments> g{{"s", NoiseMoments::uniform_unit_variance(8)}};
  for (int trial = 0; trial < 50; ++trial) {
    Polynomial p({"x", "s"}), q({"x", "s"});
    for (int t = 0; t < 4; ++t) {
      p.add_term({static_cast<unsigned>(rng.integer(0, 3)), static_cast<unsigned>(rng.integer(0, 4))},
                 rng.uniform(-1, 1));
      q.add_term({static_cast<unsigned>(rng.integer(0, 3)), static_cast<unsigned>(rng.integer(0, 4))},
                 rng.uniform(-1, 1));
    }
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    CHECK(max_coefficient_distance(expect(a * p + b * q, g), a * expect(p, g) + b * expect(q, g)) <=
          1e-12);
  }
}

TEST_CASE("noise moment tables") {
  const auto g = NoiseMoments::gaussian(6).moments;
  CHECK(g == std::vector<double>{1, 0, 1, 0, 3, 0, 15});
  const auto u = NoiseMoments::uniform_unit_variance(4).moments;
  CHECK(u[2] == doctest::Approx(1.0));
  CHECK(u[4] == doctest::Approx(9.0 / 5.0));
  CHECK(NoiseMoments::rademacher(3).moments == std::vector<double>{1, 0, 1, 0});
  CHECK(NoiseMoments{{1.0, 2.0, 1.0}}.violations().size() == 1);
  CHECK(NoiseMoments{{0.5}}.violations().size() == 1);
}

TEST_CASE("sturm root counts on known polynomials") {
  CHECK(sturm_root_count(Dense{-2, 0, 1}, 0, 2) == 1);
  CHECK(sturm_root_count(from_roots({1, 2, 3}, 1.0), 0, 10) == 3);
  CHECK(sturm_root_count(from_roots({1, 1}, 1.0), 0, 8) == 1);
  // half-open interval (a, b]
  CHECK(sturm_root_count(from_roots({1, 2}, 1.0), 1, 2) == 1);
  CHECK(sturm_root_count(from_roots({1, 2}, 1.0), 0.5, 1) == 1);
  CHECK(sturm_root_count(Dense{1, 0, 1}, -100, 100) == 0);
  CHECK(sturm_root_count(Dense{-2, 0, 1}, -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()) == 2);
  CHECK_THROWS_AS(sturm_root_count(Dense{0.0}, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sturm_root_count(Dense{1, 1}, 1, 1), std::invalid_argument);
}

TEST_CASE("sturm root counts agree with a dense sign scan") {
  Rng64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int deg = rng.integer(1, 8);
    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) roots.push_back(rng.uniform(-9, 9));
    std::sort(roots.begin(), roots.end());
    bool separated = true;
    for (std::size_t i = 1; i < roots.size(); ++i) separated &= roots[i] - roots[i - 1] > 1e-2;
    if (!separated) continue;
    const auto p = from_roots(roots, rng.uniform(0.5, 2.0));
    const double a = rng.uniform(-10, 0), b = rng.uniform(0.1, 10);
    bool near_end = false;
    for (double r : roots) near_end |= std::abs(r - a) < 1e-3 || std::abs(r - b) < 1e-3;
    if (near_end) continue;
    CHECK(sturm_root_count(p, a, b) == scan_root_count(p, a, b, 200000));
    ++compared;
  }
  CHECK(compared > 200);
}

TEST_CASE("isolated roots lie within tolerance") {
  const auto p = from_roots({-1.5, 0.25, 3.0}, 2.0);
  const auto roots = isolate_roots(p, -10, 10);
  REQUIRE(roots.size() == 3);
  const double expected[3] = {-1.5, 0.25, 3.0};
  for (int i = 0; i < 3; ++i) CHECK(std::abs(roots[i] - expected[i]) <= 1e-10);
}

TEST_CASE("min_on_interval examples") {
  auto r = min_on_interval(from_roots({1, 1}, 1.0), 0, 8);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.argmin == doctest::Approx(1.0).epsilon(1e-8));
  r = min_on_interval(Dense{-3, 1}, 0, 8);
  CHECK(r.value == -3.0);
  CHECK(r.argmin == 0.0);
  // ties go to the smaller argument
  r = min_on_interval(Dense{0, 0, 1}, -1, 1);
  CHECK(r.argmin == doctest::Approx(0.0).epsilon(1e-9));
  r = min_on_interval(Dense{5.0}, 2, 3);
  CHECK(r.argmin == 2.0);
}

TEST_CASE("case-one barrier minimum on X0 matches a dense scan") {
  const Polynomial b = case_candidate(1).barrier;
  const MinResult r = min_on_interval(b, 0, 1.5);
  const double scan = scan_min(
      [](double x) { return horner_desc({0.0054, -0.0345, 0.0814, -0.0849, 0.0369}, x); }, 0, 1.5,
      1000000);
  CHECK(r.value >= 0.0);
  CHECK(r.value <= 0.13);
  CHECK(r.value <= scan + 1e-12);
  CHECK(r.value >= scan - 1e-9);
}

TEST_CASE("min_on_interval is a lower bound at random points") {
  Rng64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> p(static_cast<std::size_t>(rng.integer(1, 9)));
    for (auto& c : p) c = rng.uniform(-3, 3);
    const double a = rng.uniform(-5, 0), b = rng.uniform(0.1, 5);
    const MinResult m = min_on_interval(p, a, b);
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(a, b);
      CHECK(m.value <= power_sum(p, x) + 1e-9 * std::max(1.0, std::abs(power_sum(p, x))));
    }
  }
}

TEST_CASE("nonneg_on_box univariate") {
  const Polynomial sq = dense_poly(from_roots({1, 1}, 1.0));
  NonnegReport r = nonneg_on_box(sq, box1(0, 8));
  CHECK(r.verdict == Verdict::holds);
  CHECK(r.margin == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.exact);
  r = nonneg_on_box(X() - 3.0, box1(0, 8));
  CHECK(r.verdict == Verdict::fails);
  REQUIRE(r.witness.size() == 1);
  CHECK(r.witness[0] == 0.0);
  CHECK(r.margin == -3.0);
}

TEST_CASE("nonneg_on_box multivariate is tri-state") {
  const Polynomial y = Polynomial::variable("y");
  const IntervalBox box{{"x", "y"}, {{-1, 1}, {-1, 1}}};
  NonnegReport r = nonneg_on_box(X() * X() + y * y + 1.0, box);
  CHECK(r.verdict == Verdict::holds);
  CHECK_FALSE(r.exact);
  r = nonneg_on_box(X() * y, box);
  CHECK(r.verdict == Verdict::fails);
  CHECK(r.margin < 0.0);
  r = nonneg_on_box(X() * X() + y * y, box);
  CHECK(r.verdict == Verdict::inconclusive);
}

TEST_CASE("interval boxes") {
  const IntervalBox x = box1(0, 8);
  CHECK(x.contains(std::vector<double>{8.0}));
  CHECK_FALSE(x.contains(std::vector<double>{8.0001}));
  CHECK(x.contains_box(box1(7, 8)));
  CHECK_FALSE(x.contains_box(box1(9, 10)));
  const auto g = x.constraint_polynomials();
  REQUIRE(g.size() == 1);
  CHECK(g[0].eval(Assignment{{"x", 4.0}}) == doctest::Approx(16.0));
  CHECK(g[0].eval(Assignment{{"x", -1.0}}) < 0.0);
}

TEST_CASE("compiled evaluation matches eval") {
  Polynomial p({"x", "y"});
  p.add_term({2, 1}, 1.5);
  p.add_term({0, 3}, -2.0);
  p.add_term({0, 0}, 0.25);
  const CompiledPolynomial c(p, {"y", "x", "z"});
  const std::vector<double> v{0.7, -1.3, 42.0};
  CHECK(c(v) == doctest::Approx(p.eval(Assignment{{"x", -1.3}, {"y", 0.7}})));
}
