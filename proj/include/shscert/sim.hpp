#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shscert/augment.hpp"
#include "shscert/bound.hpp"
#include "shscert/model.hpp"

namespace shscert {

using Rng = std::mt19937_64;

/// Per-trajectory seed derived from the master seed and the trajectory index,
/// so results do not depend on how trajectories are spread over workers.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

struct Controllers {
  std::vector<Polynomial> nu_flow;
  std::vector<Polynomial> nu_jump;
};

inline Controllers controllers_of(const CbcCandidate& c) { return {c.nu_flow, c.nu_jump}; }

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(int substep, const std::string& what) : std::runtime_error(what), substep_(substep) {}
  int substep() const { return substep_; }

 private:
  int substep_;
};

/// Model dynamics compiled for repeated evaluation.
class CompiledDynamics {
 public:
  explicit CompiledDynamics(const ShsModel& model);

  const ShsModel& model() const { return *model_; }

  /// substeps Euler-Maruyama updates with h = tau / substeps and the input held:
  ///   x += f1(x, nu) h + sigma(x) sqrt(h) N(0, I) + rho(x) dP,  dP_j ~ Poisson(lambda_j h)
  /// Throws BlowUpError on a non-finite state.
  std::vector<double> flow_step(std::span<const double> x, std::span<const double> nu,
                                double tau, int substeps, Rng& rng) const;
  /// x' = f2(x, nu, noise sample).
  std::vector<double> jump_step(std::span<const double> x, std::span<const double> nu,
                                Rng& rng) const;

  double sample_noise(std::size_t component, Rng& rng) const;

 private:
  const ShsModel* model_;
  std::vector<CompiledPolynomial> drift_;                   // over (x, nu)
  std::vector<std::vector<CompiledPolynomial>> diffusion_;  // over x
  std::vector<std::vector<CompiledPolynomial>> reset_;      // over x
  std::vector<CompiledPolynomial> jump_map_;                // over (x, nu, noise)
};

std::vector<double> flow_step(const ShsModel& model, std::span<const double> x,
                              std::span<const double> nu, double tau, int substeps, Rng& rng);
std::vector<double> jump_step(const ShsModel& model, std::span<const double> x,
                              std::span<const double> nu, Rng& rng);

struct SimConfig {
  int substeps_per_tau = 20;
  /// Number of augmented-system transitions (flows and jumps).
  int horizon = 100;
  int n_trajectories = 1000;
  std::uint64_t master_seed = 0;
  JumpSchedule schedule = UniformGap{};
  /// Fixed initial state; drawn uniformly from X0 when absent.
  std::optional<std::vector<double>> x0;
  /// Worker threads for Monte Carlo; 0 picks the hardware concurrency.
  unsigned workers = 0;
};

std::vector<std::string> validate(const SimConfig& config, const ShsModel& model);

struct TrajectoryPoint {
  int k = 0;
  double time = 0.0;
  AugmentedState state;
  /// Transition that produced this point; empty for the initial state.
  std::optional<Scenario> scenario;
  /// beta(z) Bbar(x) when a certificate is attached.
  std::optional<double> b_value;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<TrajectoryPoint> points;
  std::optional<int> first_unsafe;  // x in Xu
  std::optional<int> first_exceed;  // beta(z) Bbar(x) >= eta
  std::optional<int> first_exit;    // x outside X
  /// Transition during which the state became non-finite; the path stops there.
  std::optional<int> blowup;
  int flow_count = 0;
  int jump_count = 0;
};

/// Simulates trajectory `index` of the configuration. Unsafe entry and
/// certificate exceedance are recorded at transition boundaries only. With
/// record_points false only the summary fields are filled.
Trajectory simulate(const CompiledDynamics& dyn, const Controllers& ctrl, const SimConfig& config,
                    std::size_t index, const Acbc* acbc = nullptr, bool record_points = true);
Trajectory simulate(const ShsModel& model, const Controllers& ctrl, const SimConfig& config,
                    std::size_t index = 0, const Acbc* acbc = nullptr);

struct BinomialInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact two-sided binomial interval at the given confidence level.
BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials, double confidence);

struct MonteCarloReport {
  std::size_t n = 0;
  std::size_t exceed_count = 0;
  std::size_t unsafe_count = 0;
  std::size_t exit_count = 0;
  std::size_t blowup_count = 0;
  /// Trajectories that entered Xu without exceeding the certificate level.
  std::size_t unsafe_without_exceed = 0;
  double p_exceed = 0.0;
  double p_unsafe = 0.0;
  double confidence = 0.99;
  BinomialInterval ci_exceed;
  BinomialInterval ci_unsafe;
  SafetyBound bound;
  /// The exceedance interval lies entirely above delta.
  bool violation = false;
};

/// Runs config.n_trajectories independent paths from z = 0 and compares the
/// empirical exceedance frequency with the certificate's delta at
/// config.horizon. A path that blows up counts as an exceedance.
MonteCarloReport monte_carlo(const ShsModel& model, const Controllers& ctrl, const Acbc& acbc,
                             const SimConfig& config, double confidence = 0.99);

}  // namespace shscert
