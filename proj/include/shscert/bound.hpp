#pragma once

namespace shscert {

enum class BoundBranch { first, second };
const char* to_string(BoundBranch b);

/// Upper bound on P{ sup_{0<=k<=T} B(x_k, z_k) >= eta } over T transitions.
struct SafetyBound {
  double delta = 0.0;      // clamped to [0, 1]
  double delta_raw = 0.0;  // formula value before clamping
  BoundBranch branch = BoundBranch::first;
  int horizon = 0;
  double alpha = 0.0;
  double eta = 1.0;
  double kappa = 0.5;
  double gamma = 0.0;

  double safety_probability() const { return 1.0 - delta; }
};

/// first branch (eta >= gamma / (1 - kappa)):
///   1 - (1 - alpha/eta) (1 - gamma/eta)^T
/// second branch:
///   (alpha/eta) kappa^T + gamma / ((1 - kappa) eta) (1 - kappa^T)
/// Requires 0 < kappa < 1, eta > alpha >= 0, gamma >= 0, T >= 0; throws
/// std::invalid_argument naming the violated constraint.
SafetyBound compute_delta(double alpha, double eta, double kappa, double gamma, int horizon);

}  // namespace shscert
