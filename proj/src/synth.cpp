#include "shscert/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "shscert/sim.hpp"

namespace shscert {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void monomials(std::size_t nvars, Exponents& cur, std::size_t pos,
               unsigned remaining, std::vector<Exponents>& out) {
  if (pos == nvars) {
    out.push_back(cur);
    return;
  }
  for (unsigned e = 0; e <= remaining; ++e) {
    cur[pos] = e;
    monomials(nvars, cur, pos + 1, remaining - e, out);
  }
  cur[pos] = 0;
}

std::vector<Exponents> basis(std::size_t nvars, unsigned degree) {
  std::vector<Exponents> out;
  Exponents cur(nvars, 0);
  monomials(nvars, cur, 0, degree, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool is_pure_power(const Exponents& e, unsigned degree) {
  return std::count(e.begin(), e.end(), degree) == 1 &&
         std::count(e.begin(), e.end(), 0u) + 1 == static_cast<long>(e.size());
}

/// theta = [barrier | nu_flow (m blocks) | nu_jump (m blocks) | kappa1 kappa2 gamma1 gamma2]
class Encoding {
 public:
  Encoding(const ShsModel& model, const SynthTemplate& t)
      : model_(model),
        cert_(basis(model.n(), t.cert_degree)),
        flow_(basis(model.n(), t.flow_controller_degree)),
        jump_(basis(model.n(), t.jump_controller_degree)) {
    double radius = 1.0;
    for (const auto& iv : model.state_set.bounds) {
      radius = std::max({radius, std::abs(iv.lo), std::abs(iv.hi)});
    }
    // random starts keep each monomial of order coef_bound on the state box
    auto scaled = [&](const Exponents& e) {
      unsigned d = 0;
      for (unsigned k : e) d += k;
      return t.coef_bound / std::pow(radius, d);
    };
    for (const auto& e : cert_) {
      const bool leading = is_pure_power(e, t.cert_degree);
      lo_.push_back(leading ? 0.0 : -t.coef_bound);
      hi_.push_back(t.coef_bound);
      scale_.push_back(scaled(e));
    }
    for (std::size_t j = 0; j < model.m(); ++j) {
      for (const auto& e : flow_) push_coef(t.coef_bound, scaled(e));
    }
    for (std::size_t j = 0; j < model.m(); ++j) {
      for (const auto& e : jump_) push_coef(t.coef_bound, scaled(e));
    }
    for (const Range& r : {t.kappa1, t.kappa2, t.gamma1, t.gamma2}) {
      lo_.push_back(r.lo);
      hi_.push_back(r.hi);
      scale_.push_back(std::max(std::abs(r.lo), std::abs(r.hi)));
    }
  }

  std::size_t size() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<double>& start_scale() const { return scale_; }

  std::vector<double> clamp(std::vector<double> theta) const {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], lo_[i], hi_[i]);
    return theta;
  }

  std::vector<double> encode(const CbcCandidate& c) const {
    std::vector<double> theta;
    auto take = [&](const Polynomial& p, const std::vector<Exponents>& b, const char* what) {
      const Polynomial q = p.pruned().with_vars(model_.state_vars);
      std::size_t found = 0;
      for (const auto& e : b) {
        const double v = q.coefficient(e);
        found += v != 0.0;
        theta.push_back(v);
      }
      if (found != q.terms().size()) {
        throw SynthPreconditionError(std::string("warm start ") + what +
                                     " has terms outside the template degree");
      }
    };
    take(c.barrier, cert_, "barrier");
    if (c.nu_flow.size() != model_.m() || c.nu_jump.size() != model_.m()) {
      throw SynthPreconditionError("warm start needs one controller per input");
    }
    for (const auto& p : c.nu_flow) take(p, flow_, "nu_flow");
    for (const auto& p : c.nu_jump) take(p, jump_, "nu_jump");
    theta.insert(theta.end(), {c.kappa1, c.kappa2, c.gamma1, c.gamma2});
    return theta;
  }

  CbcCandidate decode(const std::vector<double>& theta) const {
    CbcCandidate c;
    std::size_t k = 0;
    auto build = [&](const std::vector<Exponents>& b) {
      Polynomial p(model_.state_vars);
      for (const auto& e : b) p.add_term(e, theta[k++]);
      return p;
    };
    c.barrier = build(cert_);
    for (std::size_t j = 0; j < model_.m(); ++j) c.nu_flow.push_back(build(flow_));
    for (std::size_t j = 0; j < model_.m(); ++j) c.nu_jump.push_back(build(jump_));
    c.kappa1 = theta[k++];
    c.kappa2 = theta[k++];
    c.gamma1 = theta[k++];
    c.gamma2 = theta[k++];
    return c;
  }

 private:
  void push_coef(double bound, double scale) {
    lo_.push_back(-bound);
    hi_.push_back(bound);
    scale_.push_back(scale);
  }

  const ShsModel& model_;
  std::vector<Exponents> cert_, flow_, jump_;
  std::vector<double> lo_, hi_, scale_;
};

struct Point {
  std::vector<double> theta;
  CbcCandidate cand;
  double value = kNegInf;
};

class Evaluator {
 public:
  Evaluator(const ShsModel& model, const SynthTemplate& t, const IntervalBox& domain,
            const Encoding& enc)
      : model_(model), t_(t), domain_(domain), enc_(enc) {}

  Point operator()(std::vector<double> theta) {
    ++count;
    Point p;
    p.theta = std::move(theta);
    p.cand = enc_.decode(p.theta);
    try {
      const double max0 = -box_minimum(-p.cand.barrier, model_.initial_set).value;
      const double minu = box_minimum(p.cand.barrier, model_.unsafe_set).value;
      p.cand.alpha_bar = std::clamp(max0 + t_.level_slack, t_.alpha_bar.lo, t_.alpha_bar.hi);
      p.cand.eta_bar = std::clamp(minu - t_.level_slack, t_.eta_bar.lo, t_.eta_bar.hi);
      const CbcReport r = check_cbc(model_, p.cand, domain_);
      double violation = std::min(p.cand.eta_bar - p.cand.alpha_bar, 0.0);
      double lowest = p.cand.eta_bar - p.cand.alpha_bar;
      for (const auto& c : r.conditions) {
        violation += std::min(c.margin, 0.0);
        lowest = std::min(lowest, c.margin);
      }
      // positive exactly when every margin is
      p.value = violation + 0.1 * lowest;
      if (std::isnan(p.value)) p.value = kNegInf;
    } catch (const std::exception&) {
      p.value = kNegInf;
    }
    return p;
  }

  std::size_t count = 0;

 private:
  const ShsModel& model_;
  const SynthTemplate& t_;
  const IntervalBox& domain_;
  const Encoding& enc_;
};

struct RestartResult {
  Point best;
  std::size_t evaluations = 0;
};

RestartResult run_restart(const ShsModel& model, const SynthTemplate& t, const IntervalBox& domain,
                          const Encoding& enc, std::vector<double> start, std::size_t budget,
                          Rng rng) {
  Evaluator eval(model, t, domain, enc);
  RestartResult out;
  if (budget == 0) return out;
  Point cur = eval(enc.clamp(std::move(start)));
  const std::size_t dim = enc.size();
  std::vector<double> step(dim);
  auto initial_step = [&](std::size_t i) {
    return 0.25 * std::min(enc.hi()[i] - enc.lo()[i], 2.0 * enc.start_scale()[i]);
  };
  for (std::size_t i = 0; i < dim; ++i) step[i] = initial_step(i);

  auto done = [&] { return eval.count >= budget || (t.stop_at_feasible && cur.value > 0.0); };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  while (!done()) {
    bool improved = false;
    for (std::size_t i = 0; i < dim && !done(); ++i) {
      if (!(enc.hi()[i] > enc.lo()[i]) || step[i] <= 0.0) continue;
      double a = std::max(enc.lo()[i], cur.theta[i] - step[i]);
      double b = std::min(enc.hi()[i], cur.theta[i] + step[i]);
      auto probe = [&](double v) {
        std::vector<double> th = cur.theta;
        th[i] = v;
        return eval(std::move(th));
      };
      Point best = cur;
      double c = b - phi * (b - a);
      double d = a + phi * (b - a);
      Point pc = probe(c);
      if (pc.value > best.value) best = pc;
      if (eval.count >= budget) {
        if (best.value > cur.value) cur = std::move(best), improved = true;
        break;
      }
      Point pd = probe(d);
      if (pd.value > best.value) best = pd;
      for (int it = 0; it < 8 && eval.count < budget; ++it) {
        if (pc.value >= pd.value) {
          b = d;
          d = c;
          pd = std::move(pc);
          c = b - phi * (b - a);
          pc = probe(c);
          if (pc.value > best.value) best = pc;
        } else {
          a = c;
          c = d;
          pc = std::move(pd);
          d = a + phi * (b - a);
          pd = probe(d);
          if (pd.value > best.value) best = pd;
        }
      }
      if (best.value > cur.value) {
        cur = std::move(best);
        improved = true;
      }
    }
    if (!improved) {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t trial = 0; trial < 2 * dim && !done(); ++trial) {
        std::vector<double> th = cur.theta;
        for (std::size_t i = 0; i < dim; ++i) th[i] += gauss(rng) * step[i];
        Point p = eval(enc.clamp(std::move(th)));
        if (p.value > cur.value) {
          cur = std::move(p);
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool all_small = true;
      for (std::size_t i = 0; i < dim; ++i) {
        step[i] *= 0.5;
        all_small = all_small && step[i] < 1e-12 * std::max(1.0, enc.hi()[i] - enc.lo()[i]);
      }
      if (all_small) {
        for (std::size_t i = 0; i < dim; ++i) step[i] = initial_step(i);
      }
    }
  }
  out.best = std::move(cur);
  out.evaluations = eval.count;
  return out;
}

bool verified(const ShsModel& model, const CbcCandidate& cand, const CbcReport& report) {
  return validate(cand, model).empty() && report.overall() == Verdict::holds &&
         report.min_margin() > 0.0;
}

}  // namespace

std::vector<std::string> validate(const SynthTemplate& t) {
  std::vector<std::string> out;
  if (t.cert_degree < 2 || t.cert_degree % 2 != 0) out.emplace_back("cert_degree even and >= 2");
  auto ordered = [&](const Range& r, const char* name) {
    if (!(r.lo <= r.hi)) out.push_back(std::string(name) + ": lo <= hi");
  };
  ordered(t.kappa1, "kappa1");
  ordered(t.kappa2, "kappa2");
  ordered(t.gamma1, "gamma1");
  ordered(t.gamma2, "gamma2");
  ordered(t.alpha_bar, "alpha_bar");
  ordered(t.eta_bar, "eta_bar");
  if (!(t.kappa2.lo > 0.0)) out.emplace_back("kappa2 > 0");
  if (!(t.gamma1.lo >= 0.0)) out.emplace_back("gamma1 >= 0");
  if (!(t.gamma2.lo >= 0.0)) out.emplace_back("gamma2 >= 0");
  if (!(t.alpha_bar.lo >= 0.0)) out.emplace_back("alpha_bar >= 0");
  if (!(t.coef_bound > 0.0)) out.emplace_back("coef_bound > 0");
  if (t.restarts == 0) out.emplace_back("restarts >= 1");
  if (!(t.level_slack >= 0.0)) out.emplace_back("level_slack >= 0");
  return out;
}

double margin_objective(const ShsModel& model, const CbcCandidate& cand,
                        const IntervalBox& domain) {
  return check_cbc(model, cand, domain).min_margin();
}

const char* to_string(SynthStatus s) {
  return s == SynthStatus::feasible ? "feasible" : "infeasible-at-budget";
}

SynthResult search(const ShsModel& model, const SynthTemplate& t, const IntervalBox& domain) {
  if (!(t.eta_bar.hi > t.alpha_bar.lo)) {
    throw SynthPreconditionError("eta_bar range lies below the alpha_bar range");
  }
  if (auto errs = validate(t); !errs.empty()) {
    throw SynthPreconditionError("invalid template: " + errs.front());
  }

  SynthResult res;
  if (t.budget == 0) {
    if (!t.warm_start) throw SynthPreconditionError("a zero budget needs a warm start");
    res.candidate = *t.warm_start;
    res.report = check_cbc(model, res.candidate, domain);
    res.margin = res.report.min_margin();
    res.status = verified(model, res.candidate, res.report) ? SynthStatus::feasible
                                                            : SynthStatus::infeasible_at_budget;
    return res;
  }

  const Encoding enc(model, t);
  std::vector<std::vector<double>> starts(t.restarts);
  for (unsigned r = 0; r < t.restarts; ++r) {
    if (r == 0 && t.warm_start) {
      starts[r] = enc.encode(*t.warm_start);
      continue;
    }
    Rng rng(trajectory_seed(t.seed, r));
    for (std::size_t i = 0; i < enc.size(); ++i) {
      const double s = enc.start_scale()[i];
      const double lo = std::max(enc.lo()[i], -s), hi = std::min(enc.hi()[i], s);
      starts[r].push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
    }
  }

  std::vector<RestartResult> results(t.restarts);
  std::vector<std::exception_ptr> errors(t.restarts);
  auto run = [&](unsigned r) {
    try {
      const std::size_t share = t.budget / t.restarts + (r < t.budget % t.restarts ? 1 : 0);
      results[r] = run_restart(model, t, domain, enc, starts[r], share,
                               Rng(trajectory_seed(~t.seed, r)));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };
  unsigned workers = t.workers ? t.workers : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, t.restarts);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (unsigned r = w; r < t.restarts; r += workers) run(r);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  unsigned best = 0;
  for (unsigned r = 0; r < t.restarts; ++r) {
    res.evaluations += results[r].evaluations;
    if (results[r].best.value > results[best].best.value) best = r;
  }
  res.best_restart = best;
  res.candidate = results[best].best.cand;
  res.report = check_cbc(model, res.candidate, domain);
  res.margin = res.report.min_margin();
  res.status = verified(model, res.candidate, res.report) ? SynthStatus::feasible
                                                          : SynthStatus::infeasible_at_budget;
  return res;
}

}  // namespace shscert
