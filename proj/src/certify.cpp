#include "shscert/certify.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace shscert {

namespace {

bool over(const Polynomial& p, const std::vector<std::string>& allowed) {
  const auto used = p.used_vars();
  return std::all_of(used.begin(), used.end(), [&](const std::string& v) {
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
  });
}

std::map<std::string, Polynomial> input_substitution(const std::vector<std::string>& inputs,
                                                     std::span<const Polynomial> controllers) {
  if (controllers.size() != inputs.size()) {
    throw std::invalid_argument("expected " + std::to_string(inputs.size()) +
                                " controllers, got " + std::to_string(controllers.size()));
  }
  std::map<std::string, Polynomial> repl;
  for (std::size_t j = 0; j < inputs.size(); ++j) repl.emplace(inputs[j], controllers[j]);
  return repl;
}

Polynomial dot(const std::vector<Polynomial>& a, const std::vector<Polynomial>& b,
               const char* what) {
  if (a.empty()) return {};
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": multiplier count " +
                                std::to_string(a.size()) + " does not match " +
                                std::to_string(b.size()) + " constraints");
  }
  Polynomial s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<std::string> validate(const CbcCandidate& cand, const ShsModel& model) {
  std::vector<std::string> out;
  if (!(cand.eta_bar > cand.alpha_bar)) out.emplace_back("eta_bar > alpha_bar");
  if (!(cand.kappa2 > 0.0)) out.emplace_back("kappa2 > 0");
  if (!(cand.gamma1 >= 0.0)) out.emplace_back("gamma1 >= 0");
  if (!(cand.gamma2 >= 0.0)) out.emplace_back("gamma2 >= 0");
  if (!(cand.alpha_bar >= 0.0)) out.emplace_back("alpha_bar >= 0");
  if (!over(cand.barrier, model.state_vars)) out.emplace_back("barrier: polynomial over x");
  if (cand.nu_flow.size() != model.m()) out.emplace_back("nu_flow: one controller per input");
  if (cand.nu_jump.size() != model.m()) out.emplace_back("nu_jump: one controller per input");
  for (const auto& p : cand.nu_flow) {
    if (!over(p, model.state_vars)) out.emplace_back("nu_flow: polynomials over x");
  }
  for (const auto& p : cand.nu_jump) {
    if (!over(p, model.state_vars)) out.emplace_back("nu_jump: polynomials over x");
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* to_string(Condition c) {
  switch (c) {
    case Condition::initial: return "initial";
    case Condition::unsafe: return "unsafe";
    case Condition::flow: return "flow";
    case Condition::jump: return "jump";
    case Condition::nonneg: return "nonneg";
  }
  return "?";
}

const ConditionResult& CbcReport::at(Condition c) const {
  for (const auto& r : conditions) {
    if (r.id == c) return r;
  }
  throw std::out_of_range(std::string("no result for condition ") + to_string(c));
}

Verdict CbcReport::overall() const {
  bool inconclusive = false;
  for (const auto& r : conditions) {
    if (r.verdict == Verdict::fails) return Verdict::fails;
    inconclusive = inconclusive || r.verdict == Verdict::inconclusive;
  }
  return inconclusive ? Verdict::inconclusive : Verdict::holds;
}

double CbcReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : conditions) m = std::min(m, r.margin);
  return m;
}

Polynomial generator_open_loop(const ShsModel& model, const Polynomial& barrier) {
  const auto& x = model.state_vars;
  const std::size_t n = model.n();
  if (model.drift.size() != n || model.diffusion.size() != n || model.reset.size() != n) {
    throw std::invalid_argument("generator: model dimensions are inconsistent");
  }
  Polynomial out(x);
  std::vector<Polynomial> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = derivative(barrier, x[i]);
    out += grad[i] * model.drift[i];
  }
  // 0.5 * Tr(sigma sigma^T Hessian)
  const std::size_t b = model.brownian_dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      Polynomial sst;
      for (std::size_t l = 0; l < b; ++l) sst += model.diffusion[i][l] * model.diffusion[k][l];
      if (sst.is_zero()) continue;
      out += 0.5 * (sst * derivative(grad[i], x[k]));
    }
  }
  for (std::size_t j = 0; j < model.poisson_dim(); ++j) {
    if (model.poisson_rates[j] == 0.0) continue;
    std::map<std::string, Polynomial> shift;
    for (std::size_t i = 0; i < n; ++i) {
      shift.emplace(x[i], Polynomial::variable(x[i], x) + model.reset[i][j]);
    }
    out += model.poisson_rates[j] * (compose(barrier, shift) - barrier);
  }
  return out;
}

Polynomial generator(const ShsModel& model, const Polynomial& barrier,
                     std::span<const Polynomial> nu_flow) {
  return compose(generator_open_loop(model, barrier),
                 input_substitution(model.input_vars, nu_flow));
}

Polynomial jump_expectation_open_loop(const ShsModel& model, const Polynomial& barrier) {
  if (model.jump_map.size() != model.n()) {
    throw std::invalid_argument("jump_expectation: jump map length differs from n");
  }
  std::map<std::string, Polynomial> repl;
  for (std::size_t i = 0; i < model.n(); ++i) repl.emplace(model.state_vars[i], model.jump_map[i]);
  return expect(compose(barrier, repl), model.noise_moments());
}

Polynomial jump_expectation(const ShsModel& model, const Polynomial& barrier,
                            std::span<const Polynomial> nu_jump) {
  auto subst = input_substitution(model.input_vars, nu_jump);
  std::map<std::string, Polynomial> repl;
  for (std::size_t i = 0; i < model.n(); ++i) {
    repl.emplace(model.state_vars[i], compose(model.jump_map[i], subst));
  }
  return expect(compose(barrier, repl), model.noise_moments());
}

CbcConditionPolynomials condition_polynomials(const ShsModel& model, const CbcCandidate& cand) {
  const Polynomial& b = cand.barrier;
  CbcConditionPolynomials p;
  p.initial = cand.alpha_bar - b;
  p.unsafe = b - cand.eta_bar;
  p.flow = -generator(model, b, cand.nu_flow) - cand.kappa1 * b + cand.gamma1;
  p.jump = cand.kappa2 * b + cand.gamma2 - jump_expectation(model, b, cand.nu_jump);
  p.nonneg = b;
  return p;
}

CbcReport check_cbc(const ShsModel& model, const CbcConditionPolynomials& polys,
                    const IntervalBox& domain, const GridOptions& grid) {
  const std::pair<Condition, std::pair<const Polynomial*, const IntervalBox*>> checks[] = {
      {Condition::initial, {&polys.initial, &model.initial_set}},
      {Condition::unsafe, {&polys.unsafe, &model.unsafe_set}},
      {Condition::flow, {&polys.flow, &domain}},
      {Condition::jump, {&polys.jump, &domain}},
      {Condition::nonneg, {&polys.nonneg, &domain}},
  };
  CbcReport rep;
  for (const auto& [id, what] : checks) {
    NonnegReport r = nonneg_on_box(*what.first, *what.second, grid);
    rep.conditions.push_back({id, r.verdict, r.margin, std::move(r.witness)});
  }
  return rep;
}

CbcReport check_cbc(const ShsModel& model, const CbcCandidate& cand, const IntervalBox& domain,
                    const GridOptions& grid) {
  return check_cbc(model, condition_polynomials(model, cand), domain, grid);
}

Polynomial close_loop(const Polynomial& expr, const std::vector<std::string>& input_vars,
                      std::span<const Polynomial> controllers) {
  return compose(expr, input_substitution(input_vars, controllers));
}

SosExpressions assemble_sos(const ShsModel& model, const CbcCandidate& cand,
                            const SosMultipliers& mult) {
  const Polynomial& b = cand.barrier;
  const auto g0 = model.initial_set.constraint_polynomials();
  const auto gu = model.unsafe_set.constraint_polynomials();
  const auto g = model.state_set.constraint_polynomials();
  const auto gnu = model.input_set.constraint_polynomials();

  if (cand.nu_flow.size() != model.m() || cand.nu_jump.size() != model.m()) {
    throw std::invalid_argument("assemble_sos: controller count differs from input dimension");
  }
  Polynomial flow_ctrl;
  Polynomial jump_ctrl;
  for (std::size_t j = 0; j < model.m(); ++j) {
    const Polynomial nu = Polynomial::variable(model.input_vars[j]);
    flow_ctrl += nu - cand.nu_flow[j];
    jump_ctrl += nu - cand.nu_jump[j];
  }

  SosExpressions s;
  s.initial = -b - dot(mult.l0, g0, "l0") + cand.alpha_bar;
  s.unsafe = b - dot(mult.lu, gu, "lu") - cand.eta_bar;
  s.flow = -generator_open_loop(model, b) - cand.kappa1 * b + cand.gamma1 - flow_ctrl -
           dot(mult.l, g, "l") - dot(mult.l_nu, gnu, "l_nu");
  s.jump = -jump_expectation_open_loop(model, b) + cand.kappa2 * b + cand.gamma2 - jump_ctrl -
           dot(mult.lhat, g, "lhat") - dot(mult.lhat_nu, gnu, "lhat_nu");
  return s;
}

}  // namespace shscert
