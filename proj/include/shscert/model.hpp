#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "shscert/poly.hpp"

namespace shscert {

/// Sampling period tau and the admissible inter-jump gap range {q1, ..., q2} (in periods).
struct JumpParams {
  double tau = 0.1;
  int q1 = 1;
  int q2 = 1;
};

enum class NoiseSampler { gaussian, uniform, rademacher };

const char* to_string(NoiseSampler s);
NoiseSampler noise_sampler_from_string(const std::string& s);

/// One scalar component of the jump noise.
struct NoiseComponent {
  NoiseSampler sampler = NoiseSampler::gaussian;
  NoiseMoments moments = NoiseMoments::gaussian(16);
};

/// Stochastic hybrid system with polynomial dynamics:
///   flow:  dx = f1(x, nu) dt + sigma(x) dW + rho(x) dP   (P_j Poisson with rate lambda_j)
///   jump:  x  = f2(x-, nu, noise)                        (at scheduled jump instants)
struct ShsModel {
  std::vector<std::string> state_vars;
  std::vector<std::string> input_vars;
  std::vector<std::string> noise_vars;

  std::vector<Polynomial> drift;                   // n
  std::vector<std::vector<Polynomial>> diffusion;  // n x b
  std::vector<std::vector<Polynomial>> reset;      // n x r
  std::vector<double> poisson_rates;               // r
  std::vector<Polynomial> jump_map;                // n
  std::vector<NoiseComponent> noise;               // one per noise var

  JumpParams jump;
  IntervalBox state_set;    // X
  IntervalBox initial_set;  // X0
  IntervalBox unsafe_set;   // Xu
  /// Optional input box U; empty means unconstrained.
  IntervalBox input_set;

  std::size_t n() const { return state_vars.size(); }
  std::size_t m() const { return input_vars.size(); }
  std::size_t brownian_dim() const { return diffusion.empty() ? 0 : diffusion.front().size(); }
  std::size_t poisson_dim() const { return poisson_rates.size(); }

  /// Moments keyed by noise variable name, as expected by expect().
  std::map<std::string, NoiseMoments> noise_moments() const;
};

/// Empty iff the model is well formed. Each entry names the field and the rule.
std::vector<std::string> validate(const ShsModel& model);

/// Augmented state: physical state plus the number of periods since the
/// last jump, capped at q2.
struct AugmentedState {
  std::vector<double> x;
  int z = 0;
};

enum class Scenario { flow, jump };
const char* to_string(Scenario s);

struct Admissibility {
  bool flow = false;
  bool jump = false;
};

/// Flow needs 0 <= z <= q2 - 1, jump needs q1 <= z <= q2.
Admissibility ashs_transition(const JumpParams& jump, int z);
inline Admissibility ashs_transition(const ShsModel& model, const AugmentedState& s) {
  return ashs_transition(model.jump, s.z);
}

inline const std::vector<double>& output_map(const AugmentedState& s) { return s.x; }

/// Who picks the gap between consecutive jumps.
struct FixedGap {
  int d = 1;
};
struct CyclicGaps {
  std::vector<int> ds;
};
struct UniformGap {};
using JumpSchedule = std::variant<FixedGap, CyclicGaps, UniformGap>;

/// Parses "fixed:d", "cyclic:d1,d2,..." or "uniform".
JumpSchedule parse_schedule(const std::string& text);
std::string to_string(const JumpSchedule& s);
/// Empty iff every gap lies in {q1, ..., q2}.
std::vector<std::string> validate(const JumpSchedule& s, const JumpParams& jump);

}  // namespace shscert
