#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shscert/certify.hpp"
#include "shscert/model.hpp"

namespace shscert {

/// Sign pattern of (kappa1, kappa2) that selects the lifting tables.
///   r1: kappa1 > 0,  0 < kappa2 < 1   beta(z) = 1
///   r2: kappa1 > 0,  kappa2 >= 1      beta(z) = exp(kappa1 tau eps1 z)
///   r3: kappa1 <= 0, 0 < kappa2 < 1   beta(z) = kappa2^(z / eps2)
enum class Regime { r1, r2, r3 };
const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

class UnsupportedRegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A side condition of the lifting failed. `condition` names it; `z` is the
/// offending counter value when the condition is quantified over z.
class AcbcConstructionError : public std::runtime_error {
 public:
  AcbcConstructionError(std::string condition, std::optional<int> z, const std::string& what)
      : std::runtime_error(what), condition_(std::move(condition)), z_(z) {}
  const std::string& condition() const { return condition_; }
  std::optional<int> z() const { return z_; }

 private:
  std::string condition_;
  std::optional<int> z_;
};

/// Certificate B(x, z) = beta(z) * Bbar(x) on the augmented system.
struct Acbc {
  CbcCandidate base;
  JumpParams jump;
  Regime regime = Regime::r1;
  double eps1 = 0.1;
  double eps2 = 2.0;
  double alpha = 0.0;
  double eta = 1.0;
  double kappa = 0.5;
  double gamma = 0.0;
  double beta_alpha = 1.0;
  double beta_eta = 1.0;
};

/// Throws UnsupportedRegimeError for kappa1 <= 0 with kappa2 >= 1 (and for kappa2 <= 0).
Regime select_regime(double kappa1, double kappa2);

inline double default_eps1() { return 0.1; }
inline double default_eps2(const JumpParams& jump) { return jump.q2 + 1.0; }

/// Lifts a CBC. Requires 0 < eps1 < 1 and eps2 > q2 (std::invalid_argument
/// otherwise). Throws AcbcConstructionError when the level separation
/// beta_eta * eta_bar > beta_alpha * alpha_bar, the counter decay
/// ln(kappa2) - kappa1 tau z < 0 for z in {q1..q2}, or 0 < kappa < 1 fails.
Acbc construct_acbc(const CbcCandidate& cand, const JumpParams& jump, double eps1, double eps2);

/// Multiplier beta(z) for 0 <= z <= q2; throws std::out_of_range otherwise.
double beta(const Acbc& acbc, int z);

struct AcbcCheck {
  std::string id;  // "initial", "unsafe", "flow" or "jump"
  int z = 0;
  Verdict verdict = Verdict::inconclusive;
  double margin = 0.0;
  std::vector<double> witness;
};

/// Scalar check of the constant tables: assuming the CBC inequalities hold,
/// the one-step bound at counter z is kappa beta(z) b + gamma minus
///   flow: beta(z+1) e^{-kappa1 tau} (b + tau gamma1)
///   jump: beta(0) (kappa2 b + gamma2)
/// which is affine in b = Bbar(x) and so checked at b = 0 and b = b_max.
struct LiftCheck {
  Scenario scenario = Scenario::flow;
  int z = 0;
  double margin = 0.0;
};

struct AcbcReport {
  std::vector<std::string> precondition_violations;
  std::vector<AcbcCheck> checks;
  std::vector<LiftCheck> lift;

  Verdict overall() const;
};

std::vector<LiftCheck> lifted_step_margins(const Acbc& acbc, double b_max);

/// Initial-set bound on X0 x {0}, unsafe-set bound on Xu x {0..q2}, and the
/// one-step supermartingale bound for every admissible (z, scenario). Flow
/// steps use the exponential flow bound of the base CBC; jump steps use the
/// exact jump expectation polynomial.
AcbcReport check_acbc_conditions(const ShsModel& model, const Acbc& acbc,
                                 const IntervalBox& domain, const GridOptions& grid = {});

}  // namespace shscert
