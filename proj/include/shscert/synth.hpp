#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shscert/certify.hpp"
#include "shscert/model.hpp"

namespace shscert {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthTemplate {
  /// Total degree of Bbar; even and at least 2.
  unsigned cert_degree = 4;
  unsigned flow_controller_degree = 1;
  unsigned jump_controller_degree = 1;
  Range kappa1{0.0, 0.1};
  Range kappa2{0.5, 0.999};
  Range gamma1{0.0, 0.1};
  Range gamma2{0.0, 0.1};
  Range alpha_bar{0.0, 1.0};
  Range eta_bar{1.0, 10.0};
  /// Box bound on every barrier and controller coefficient.
  double coef_bound = 10.0;
  /// Total number of objective evaluations over all restarts.
  std::size_t budget = 20000;
  unsigned restarts = 4;
  std::uint64_t seed = 0;
  /// Starting point of restart 0.
  std::optional<CbcCandidate> warm_start;
  /// alpha_bar and eta_bar are set to the extrema of Bbar on X0 and Xu
  /// widened by this amount, then clamped to their ranges.
  double level_slack = 1e-6;
  /// A restart ends as soon as its current point is feasible.
  bool stop_at_feasible = true;
  /// Threads for concurrent restarts; 0 picks the hardware concurrency.
  unsigned workers = 0;
};

class SynthPreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Empty iff the template is usable. Range violations of the sign rules
/// (kappa2 > 0, gammas and levels nonnegative) are reported here.
std::vector<std::string> validate(const SynthTemplate& t);

/// Smallest of the five check_cbc margins; positive means every condition has slack.
double margin_objective(const ShsModel& model, const CbcCandidate& cand, const IntervalBox& domain);

enum class SynthStatus { feasible, infeasible_at_budget };
const char* to_string(SynthStatus s);

struct SynthResult {
  SynthStatus status = SynthStatus::infeasible_at_budget;
  CbcCandidate candidate;
  /// margin_objective of the returned candidate.
  double margin = 0.0;
  /// Independent check_cbc run on the returned candidate.
  CbcReport report;
  std::size_t evaluations = 0;
  unsigned best_restart = 0;
};

/// Multi-start coordinate search with golden-section line searches.
/// Throws SynthPreconditionError for an invalid template or when
/// eta_bar.hi <= alpha_bar.lo. With budget 0 the warm start (required then)
/// is returned unchanged.
SynthResult search(const ShsModel& model, const SynthTemplate& t, const IntervalBox& domain);
inline SynthResult search(const ShsModel& model, const SynthTemplate& t) {
  return search(model, t, model.state_set);
}

}  // namespace shscert
