#include "shscert/augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shscert {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::r1: return "R1";
    case Regime::r2: return "R2";
    case Regime::r3: return "R3";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "R1") return Regime::r1;
  if (s == "R2") return Regime::r2;
  if (s == "R3") return Regime::r3;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

Regime select_regime(double kappa1, double kappa2) {
  if (!(kappa2 > 0.0)) throw UnsupportedRegimeError("kappa2 must be positive");
  if (kappa1 > 0.0) return kappa2 < 1.0 ? Regime::r1 : Regime::r2;
  if (kappa2 < 1.0) return Regime::r3;
  throw UnsupportedRegimeError(
      "unsupported regime: kappa1 <= 0 with kappa2 >= 1 admits no lifting");
}

namespace {

double beta_of(Regime r, const CbcCandidate& c, const JumpParams& j, double eps1, double eps2,
               double z) {
  switch (r) {
    case Regime::r1: return 1.0;
    case Regime::r2: return std::exp(c.kappa1 * j.tau * eps1 * z);
    case Regime::r3: return std::pow(c.kappa2, z / eps2);
  }
  return 1.0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

Acbc construct_acbc(const CbcCandidate& cand, const JumpParams& jump, double eps1, double eps2) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("eps1 must lie in (0, 1)");
  if (!(eps2 > jump.q2)) throw std::invalid_argument("eps2 must exceed q2");

  Acbc a;
  a.base = cand;
  a.jump = jump;
  a.eps1 = eps1;
  a.eps2 = eps2;
  a.regime = select_regime(cand.kappa1, cand.kappa2);

  const double k1 = cand.kappa1;
  const double k2 = cand.kappa2;
  const double tau = jump.tau;
  const double decay = std::exp(-k1 * tau);
  switch (a.regime) {
    case Regime::r1:
      a.beta_eta = 1.0;
      a.beta_alpha = 1.0;
      a.kappa = std::max(decay, k2);
      a.gamma = std::max(decay * tau * cand.gamma1, cand.gamma2);
      break;
    case Regime::r2:
      a.beta_eta = std::exp(k1 * tau * eps1 * jump.q1);
      a.beta_alpha = std::exp(k1 * tau * eps1 * jump.q2);
      a.kappa = std::max(std::exp(-k1 * tau * (1.0 - eps1)),
                         std::exp(-k1 * tau * eps1 * jump.q1) * k2);
      a.gamma = std::max(a.beta_alpha * decay * tau * cand.gamma1, cand.gamma2);
      break;
    case Regime::r3:
      a.beta_eta = std::pow(k2, jump.q2 / eps2);
      a.beta_alpha = std::pow(k2, jump.q1 / eps2);
      a.kappa = std::max(decay * std::pow(k2, 1.0 / eps2), std::pow(k2, (eps2 - jump.q2) / eps2));
      a.gamma = std::max(std::pow(k2, 1.0 / eps2) * decay * tau * cand.gamma1, cand.gamma2);
      break;
  }
  a.alpha = a.beta_alpha * cand.alpha_bar;
  a.eta = a.beta_eta * cand.eta_bar;

  if (!(a.eta > a.alpha)) {
    throw AcbcConstructionError(
        "level separation", std::nullopt,
        "level separation violated: beta_eta * eta_bar = " + fmt(a.eta) +
            " is not greater than beta_alpha * alpha_bar = " + fmt(a.alpha));
  }
  for (int z = jump.q1; z <= jump.q2; ++z) {
    const double v = std::log(k2) - k1 * tau * z;
    if (!(v < 0.0)) {
      throw AcbcConstructionError("counter decay", z,
                                  "counter decay violated: ln(kappa2) - kappa1 tau z = " + fmt(v) +
                                      " >= 0 at z = " + std::to_string(z));
    }
  }
  if (!(a.kappa > 0.0 && a.kappa < 1.0)) {
    throw AcbcConstructionError("kappa range", std::nullopt,
                                "lifted kappa = " + fmt(a.kappa) + " is outside (0, 1)");
  }
  return a;
}

double beta(const Acbc& acbc, int z) {
  if (z < 0 || z > acbc.jump.q2) {
    throw std::out_of_range("counter z = " + std::to_string(z) + " is outside {0, ..., " +
                            std::to_string(acbc.jump.q2) + "}");
  }
  return beta_of(acbc.regime, acbc.base, acbc.jump, acbc.eps1, acbc.eps2, z);
}

Verdict AcbcReport::overall() const {
  if (!precondition_violations.empty()) return Verdict::fails;
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::fails) return Verdict::fails;
    inconclusive = inconclusive || c.verdict == Verdict::inconclusive;
  }
  return inconclusive ? Verdict::inconclusive : Verdict::holds;
}

std::vector<LiftCheck> lifted_step_margins(const Acbc& acbc, double b_max) {
  std::vector<LiftCheck> out;
  const auto& c = acbc.base;
  const double decay = std::exp(-c.kappa1 * acbc.jump.tau);
  for (int z = 0; z <= acbc.jump.q2; ++z) {
    const Admissibility adm = ashs_transition(acbc.jump, z);
    const double lhs_slope = acbc.kappa * beta(acbc, z);
    if (adm.flow) {
      const double bn = beta(acbc, z + 1) * decay;
      auto m = [&](double b) { return lhs_slope * b + acbc.gamma - bn * (b + acbc.jump.tau * c.gamma1); };
      out.push_back({Scenario::flow, z, std::min(m(0.0), m(b_max))});
    }
    if (adm.jump) {
      const double b0 = beta(acbc, 0);
      auto m = [&](double b) { return lhs_slope * b + acbc.gamma - b0 * (c.kappa2 * b + c.gamma2); };
      out.push_back({Scenario::jump, z, std::min(m(0.0), m(b_max))});
    }
  }
  return out;
}

AcbcReport check_acbc_conditions(const ShsModel& model, const Acbc& acbc,
                                 const IntervalBox& domain, const GridOptions& grid) {
  AcbcReport rep;
  if (!(acbc.eta > acbc.alpha)) rep.precondition_violations.emplace_back("eta > alpha");
  if (!(acbc.kappa > 0.0 && acbc.kappa < 1.0)) rep.precondition_violations.emplace_back("0 < kappa < 1");
  if (!(acbc.gamma >= 0.0)) rep.precondition_violations.emplace_back("gamma >= 0");
  if (!(acbc.alpha >= 0.0)) rep.precondition_violations.emplace_back("alpha >= 0");

  const Polynomial& b = acbc.base.barrier;
  auto push = [&](std::string id, int z, const Polynomial& p, const IntervalBox& box) {
    NonnegReport r = nonneg_on_box(p, box, grid);
    rep.checks.push_back({std::move(id), z, r.verdict, r.margin, std::move(r.witness)});
  };

  push("initial", 0, acbc.alpha - beta(acbc, 0) * b, model.initial_set);
  for (int z = 0; z <= acbc.jump.q2; ++z) {
    push("unsafe", z, beta(acbc, z) * b - acbc.eta, model.unsafe_set);
  }

  const Polynomial jump_e = jump_expectation(model, b, acbc.base.nu_jump);
  const double decay = std::exp(-acbc.base.kappa1 * acbc.jump.tau);
  for (int z = 0; z <= acbc.jump.q2; ++z) {
    const Admissibility adm = ashs_transition(acbc.jump, z);
    const Polynomial rhs = acbc.kappa * beta(acbc, z) * b + acbc.gamma;
    if (adm.flow) {
      const Polynomial flow_bound =
          beta(acbc, z + 1) * decay * (b + acbc.jump.tau * acbc.base.gamma1);
      push("flow", z, rhs - flow_bound, domain);
    }
    if (adm.jump) push("jump", z, rhs - beta(acbc, 0) * jump_e, domain);
  }

  const double b_max = -box_minimum(-b, domain, nullptr, grid).value;
  rep.lift = lifted_step_margins(acbc, std::max(0.0, b_max));
  return rep;
}

}  // namespace shscert
