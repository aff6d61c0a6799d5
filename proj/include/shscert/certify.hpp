#pragma once

#include <span>
#include <string>
#include <vector>

#include "shscert/model.hpp"
#include "shscert/poly.hpp"

namespace shscert {

/// Barrier polynomial over the state variables, its constants, and the
/// polynomial feedback laws that witness the existential input in the flow
/// and jump conditions.
struct CbcCandidate {
  Polynomial barrier;
  double kappa1 = 0.0;
  double kappa2 = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double alpha_bar = 0.0;
  double eta_bar = 1.0;
  std::vector<Polynomial> nu_flow;
  std::vector<Polynomial> nu_jump;
};

/// Structural checks: eta_bar > alpha_bar, kappa2 > 0, nonnegative gammas and
/// levels, controller counts equal to the input dimension, and every
/// polynomial over the state variables only.
std::vector<std::string> validate(const CbcCandidate& cand, const ShsModel& model);

enum class Condition { initial, unsafe, flow, jump, nonneg };
const char* to_string(Condition c);

struct ConditionResult {
  Condition id = Condition::initial;
  Verdict verdict = Verdict::inconclusive;
  /// Minimum of the condition polynomial over its domain; positive means slack.
  double margin = 0.0;
  std::vector<double> witness;
};

struct CbcReport {
  std::vector<ConditionResult> conditions;

  const ConditionResult& at(Condition c) const;
  /// fails if any condition fails, else inconclusive if any is, else holds.
  Verdict overall() const;
  double min_margin() const;
};

/// L B(x, nu): drift, diffusion-Hessian and Poisson-shift terms with the input
/// left as free variables.
Polynomial generator_open_loop(const ShsModel& model, const Polynomial& barrier);
/// Generator with nu := nu_flow(x) substituted; a polynomial in x.
Polynomial generator(const ShsModel& model, const Polynomial& barrier,
                     std::span<const Polynomial> nu_flow);

/// E[B(f2(x, nu, noise))] with nu left free; a polynomial in (x, nu).
Polynomial jump_expectation_open_loop(const ShsModel& model, const Polynomial& barrier);
/// E[B(f2(x, nu_jump(x), noise))]; a polynomial in x.
Polynomial jump_expectation(const ShsModel& model, const Polynomial& barrier,
                            std::span<const Polynomial> nu_jump);

/// The five defining polynomials; each must be nonnegative on its domain.
struct CbcConditionPolynomials {
  Polynomial initial;  // alpha_bar - B       on X0
  Polynomial unsafe;   // B - eta_bar         on Xu
  Polynomial flow;     // -LB - k1 B + g1     on domain
  Polynomial jump;     // k2 B + g2 - E[B o f2] on domain
  Polynomial nonneg;   // B                   on domain
};

CbcConditionPolynomials condition_polynomials(const ShsModel& model, const CbcCandidate& cand);

CbcReport check_cbc(const ShsModel& model, const CbcCandidate& cand, const IntervalBox& domain,
                    const GridOptions& grid = {});
CbcReport check_cbc(const ShsModel& model, const CbcConditionPolynomials& polys,
                    const IntervalBox& domain, const GridOptions& grid = {});

/// Multiplier vectors for the SOS-form conditions. Sizes follow the
/// constraint vectors of X0, Xu, X and U (one entry per box dimension).
/// Empty vectors are read as all-zero multipliers.
struct SosMultipliers {
  std::vector<Polynomial> l0;
  std::vector<Polynomial> lu;
  std::vector<Polynomial> l;
  std::vector<Polynomial> l_nu;
  std::vector<Polynomial> lhat;
  std::vector<Polynomial> lhat_nu;
};

/// Expressions whose nonnegativity certifies the four conditions. The flow
/// and jump expressions are polynomials in (x, nu) and carry the controller
/// terms -sum_j (nu_j - l_j(x)) with l taken from the candidate.
struct SosExpressions {
  Polynomial initial;
  Polynomial unsafe;
  Polynomial flow;
  Polynomial jump;
};

SosExpressions assemble_sos(const ShsModel& model, const CbcCandidate& cand,
                            const SosMultipliers& mult);

/// Substitutes nu_j := controller_j(x).
Polynomial close_loop(const Polynomial& expr, const std::vector<std::string>& input_vars,
                      std::span<const Polynomial> controllers);

}  // namespace shscert
