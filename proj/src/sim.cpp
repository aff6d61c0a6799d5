#include "shscert/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

namespace shscert {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

class GapPicker {
 public:
  GapPicker(const JumpSchedule& s, const JumpParams& j) : schedule_(s), jump_(j) {}

  int next(Rng& rng) {
    const int idx = count_++;
    if (const auto* f = std::get_if<FixedGap>(&schedule_)) return f->d;
    if (const auto* c = std::get_if<CyclicGaps>(&schedule_)) return c->ds[idx % c->ds.size()];
    std::uniform_int_distribution<int> d(jump_.q1, jump_.q2);
    return d(rng);
  }

 private:
  const JumpSchedule& schedule_;
  const JumpParams& jump_;
  int count_ = 0;
};

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index));
}

CompiledDynamics::CompiledDynamics(const ShsModel& model) : model_(&model) {
  const auto xu = concat(model.state_vars, model.input_vars);
  const auto xun = concat(xu, model.noise_vars);
  for (const auto& f : model.drift) drift_.emplace_back(f, xu);
  for (const auto& row : model.diffusion) {
    auto& r = diffusion_.emplace_back();
    for (const auto& s : row) r.emplace_back(s, model.state_vars);
  }
  for (const auto& row : model.reset) {
    auto& r = reset_.emplace_back();
    for (const auto& s : row) r.emplace_back(s, model.state_vars);
  }
  for (const auto& g : model.jump_map) jump_map_.emplace_back(g, xun);
}

double CompiledDynamics::sample_noise(std::size_t component, Rng& rng) const {
  switch (model_->noise.at(component).sampler) {
    case NoiseSampler::gaussian: return std::normal_distribution<double>(0.0, 1.0)(rng);
    case NoiseSampler::uniform: {
      const double a = std::sqrt(3.0);
      return std::uniform_real_distribution<double>(-a, a)(rng);
    }
    case NoiseSampler::rademacher: return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  }
  return 0.0;
}

std::vector<double> CompiledDynamics::flow_step(std::span<const double> x,
                                                std::span<const double> nu, double tau,
                                                int substeps, Rng& rng) const {
  if (substeps <= 0) throw std::invalid_argument("substeps must be positive");
  const std::size_t n = model_->n();
  const std::size_t m = model_->m();
  const std::size_t nb = model_->brownian_dim();
  const std::size_t np = model_->poisson_dim();
  if (x.size() != n || nu.size() != m) throw std::invalid_argument("flow_step: dimension mismatch");

  const double h = tau / substeps;
  const double sqrt_h = std::sqrt(h);
  std::vector<std::poisson_distribution<int>> jumps;
  for (double rate : model_->poisson_rates) jumps.emplace_back(rate * h);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> xu(n + m);
  std::copy(nu.begin(), nu.end(), xu.begin() + n);
  std::vector<double> state(x.begin(), x.end());
  std::vector<double> dw(nb);
  std::vector<double> dp(np);
  std::vector<double> next(n);
  for (int s = 0; s < substeps; ++s) {
    std::copy(state.begin(), state.end(), xu.begin());
    for (auto& w : dw) w = sqrt_h * normal(rng);
    for (std::size_t j = 0; j < np; ++j) dp[j] = jumps[j](rng);
    for (std::size_t i = 0; i < n; ++i) {
      double v = state[i] + drift_[i](xu) * h;
      for (std::size_t j = 0; j < nb; ++j) v += diffusion_[i][j](state) * dw[j];
      for (std::size_t j = 0; j < np; ++j) {
        if (dp[j] != 0.0) v += reset_[i][j](state) * dp[j];
      }
      next[i] = v;
    }
    if (!all_finite(next)) {
      throw BlowUpError(s, "state became non-finite at substep " + std::to_string(s));
    }
    state.swap(next);
  }
  return state;
}

std::vector<double> CompiledDynamics::jump_step(std::span<const double> x,
                                                std::span<const double> nu, Rng& rng) const {
  const std::size_t n = model_->n();
  const std::size_t m = model_->m();
  const std::size_t r = model_->noise_vars.size();
  if (x.size() != n || nu.size() != m) throw std::invalid_argument("jump_step: dimension mismatch");
  std::vector<double> args(n + m + r);
  std::copy(x.begin(), x.end(), args.begin());
  std::copy(nu.begin(), nu.end(), args.begin() + n);
  for (std::size_t k = 0; k < r; ++k) args[n + m + k] = sample_noise(k, rng);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = jump_map_[i](args);
  if (!all_finite(out)) throw BlowUpError(0, "state became non-finite at a jump");
  return out;
}

std::vector<double> flow_step(const ShsModel& model, std::span<const double> x,
                              std::span<const double> nu, double tau, int substeps, Rng& rng) {
  return CompiledDynamics(model).flow_step(x, nu, tau, substeps, rng);
}

std::vector<double> jump_step(const ShsModel& model, std::span<const double> x,
                              std::span<const double> nu, Rng& rng) {
  return CompiledDynamics(model).jump_step(x, nu, rng);
}

std::vector<std::string> validate(const SimConfig& config, const ShsModel& model) {
  std::vector<std::string> out;
  if (config.substeps_per_tau <= 0) out.emplace_back("substeps_per_tau > 0");
  if (config.horizon < 0) out.emplace_back("horizon >= 0");
  if (config.n_trajectories <= 0) out.emplace_back("n_trajectories > 0");
  for (auto& s : validate(config.schedule, model.jump)) out.push_back("schedule: " + s);
  if (config.x0 && config.x0->size() != model.n()) out.emplace_back("x0 has the state dimension");
  return out;
}

Trajectory simulate(const CompiledDynamics& dyn, const Controllers& ctrl, const SimConfig& config,
                    std::size_t index, const Acbc* acbc, bool record_points) {
  const ShsModel& model = dyn.model();
  const JumpParams& jp = model.jump;
  if (ctrl.nu_flow.size() != model.m() || ctrl.nu_jump.size() != model.m()) {
    throw std::invalid_argument("controllers must provide one polynomial per input");
  }
  if (auto errs = validate(config, model); !errs.empty()) {
    throw std::invalid_argument("invalid simulation config: " + errs.front());
  }

  Trajectory tr;
  tr.seed = trajectory_seed(config.master_seed, index);
  Rng rng(tr.seed);

  std::vector<CompiledPolynomial> kf, kj;
  for (const auto& p : ctrl.nu_flow) kf.emplace_back(p, model.state_vars);
  for (const auto& p : ctrl.nu_jump) kj.emplace_back(p, model.state_vars);
  std::optional<CompiledPolynomial> barrier;
  if (acbc) barrier.emplace(acbc->base.barrier, model.state_vars);

  AugmentedState s;
  if (config.x0) {
    s.x = *config.x0;
  } else {
    for (const auto& v : model.state_vars) {
      const Interval b = model.initial_set.bound_of(v).value();
      s.x.push_back(std::uniform_real_distribution<double>(b.lo, b.hi)(rng));
    }
  }
  GapPicker gaps(config.schedule, jp);
  int gap = gaps.next(rng);

  auto observe = [&](int k, std::optional<Scenario> sc) {
    std::optional<double> bv;
    if (barrier) {
      bv = beta(*acbc, s.z) * (*barrier)(s.x);
      if (!tr.first_exceed && *bv >= acbc->eta) tr.first_exceed = k;
    }
    if (!tr.first_unsafe && model.unsafe_set.contains(s.x)) tr.first_unsafe = k;
    if (!tr.first_exit && !model.state_set.contains(s.x)) tr.first_exit = k;
    if (record_points) tr.points.push_back({k, tr.flow_count * jp.tau, s, sc, bv});
  };
  observe(0, std::nullopt);

  std::vector<double> nu(model.m());
  for (int k = 1; k <= config.horizon; ++k) {
    const bool jump_now = s.z >= gap;
    try {
      if (jump_now) {
        for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = kj[i](s.x);
        s.x = dyn.jump_step(s.x, nu, rng);
        s.z = 0;
        ++tr.jump_count;
        gap = gaps.next(rng);
      } else {
        for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = kf[i](s.x);
        s.x = dyn.flow_step(s.x, nu, jp.tau, config.substeps_per_tau, rng);
        ++s.z;
        ++tr.flow_count;
      }
    } catch (const BlowUpError&) {
      tr.blowup = k;
      break;
    }
    observe(k, jump_now ? Scenario::jump : Scenario::flow);
  }
  return tr;
}

Trajectory simulate(const ShsModel& model, const Controllers& ctrl, const SimConfig& config,
                    std::size_t index, const Acbc* acbc) {
  return simulate(CompiledDynamics(model), ctrl, config, index, acbc, true);
}

BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson needs at least one trial");
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence in (0, 1)");
  const double a = 1.0 - confidence;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  BinomialInterval ci;
  ci.lo = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, a / 2.0);
  ci.hi = successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - a / 2.0);
  return ci;
}

MonteCarloReport monte_carlo(const ShsModel& model, const Controllers& ctrl, const Acbc& acbc,
                             const SimConfig& config, double confidence) {
  const CompiledDynamics dyn(model);
  const std::size_t n = static_cast<std::size_t>(std::max(0, config.n_trajectories));
  if (auto errs = validate(config, model); !errs.empty()) {
    throw std::invalid_argument("invalid simulation config: " + errs.front());
  }

  struct Summary {
    bool exceed = false, unsafe = false, exit = false, blowup = false;
  };
  std::vector<Summary> results(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        const Trajectory t = simulate(dyn, ctrl, config, i, &acbc, false);
        results[i] = {t.first_exceed.has_value() || t.blowup.has_value(),
                      t.first_unsafe.has_value(), t.first_exit.has_value(), t.blowup.has_value()};
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  unsigned workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);

  MonteCarloReport r;
  r.n = n;
  r.confidence = confidence;
  for (const auto& s : results) {
    r.exceed_count += s.exceed;
    r.unsafe_count += s.unsafe;
    r.exit_count += s.exit;
    r.blowup_count += s.blowup;
    r.unsafe_without_exceed += s.unsafe && !s.exceed;
  }
  r.p_exceed = static_cast<double>(r.exceed_count) / n;
  r.p_unsafe = static_cast<double>(r.unsafe_count) / n;
  r.ci_exceed = clopper_pearson(r.exceed_count, n, confidence);
  r.ci_unsafe = clopper_pearson(r.unsafe_count, n, confidence);
  r.bound = compute_delta(acbc.alpha, acbc.eta, acbc.kappa, acbc.gamma, config.horizon);
  r.violation = r.ci_exceed.lo > r.bound.delta;
  return r;
}

}  // namespace shscert
