#include "shscert/bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shscert {

const char* to_string(BoundBranch b) { return b == BoundBranch::first ? "first" : "second"; }

SafetyBound compute_delta(double alpha, double eta, double kappa, double gamma, int horizon) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("constraint 0 < kappa < 1 violated");
  if (!(alpha >= 0.0)) throw std::invalid_argument("constraint alpha >= 0 violated");
  if (!(eta > alpha)) throw std::invalid_argument("constraint eta > alpha violated");
  if (!(gamma >= 0.0)) throw std::invalid_argument("constraint gamma >= 0 violated");
  if (horizon < 0) throw std::invalid_argument("constraint T >= 0 violated");

  SafetyBound b;
  b.horizon = horizon;
  b.alpha = alpha;
  b.eta = eta;
  b.kappa = kappa;
  b.gamma = gamma;
  const double T = horizon;
  if (eta >= gamma / (1.0 - kappa)) {
    b.branch = BoundBranch::first;
    b.delta_raw = 1.0 - (1.0 - alpha / eta) * std::pow(1.0 - gamma / eta, T);
  } else {
    b.branch = BoundBranch::second;
    const double kT = std::pow(kappa, T);
    b.delta_raw = (alpha / eta) * kT + gamma / ((1.0 - kappa) * eta) * (1.0 - kT);
  }
  b.delta = std::clamp(b.delta_raw, 0.0, 1.0);
  return b;
}

}  // namespace shscert
