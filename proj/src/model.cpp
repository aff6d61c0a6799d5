#include "shscert/model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace shscert {

const char* to_string(NoiseSampler s) {
  switch (s) {
    case NoiseSampler::gaussian: return "gaussian";
    case NoiseSampler::uniform: return "uniform";
    case NoiseSampler::rademacher: return "rademacher";
  }
  return "?";
}

NoiseSampler noise_sampler_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseSampler::gaussian;
  if (s == "uniform") return NoiseSampler::uniform;
  if (s == "rademacher") return NoiseSampler::rademacher;
  throw std::invalid_argument("unknown noise sampler '" + s + "'");
}

std::map<std::string, NoiseMoments> ShsModel::noise_moments() const {
  std::map<std::string, NoiseMoments> out;
  for (std::size_t i = 0; i < noise_vars.size() && i < noise.size(); ++i) {
    out.emplace(noise_vars[i], noise[i].moments);
  }
  return out;
}

namespace {

bool subset(const std::vector<std::string>& used, const std::vector<std::string>& allowed) {
  return std::all_of(used.begin(), used.end(), [&](const std::string& v) {
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
  });
}

void check_box(const IntervalBox& box, const std::string& name,
               const std::vector<std::string>& vars, std::vector<std::string>& out) {
  if (box.vars.size() != box.bounds.size()) {
    out.push_back(name + ": variable and bound counts differ");
    return;
  }
  if (box.vars != vars) out.push_back(name + ": box variables match the declared variables");
  for (std::size_t i = 0; i < box.bounds.size(); ++i) {
    if (!(box.bounds[i].lo <= box.bounds[i].hi)) {
      out.push_back(name + "[" + std::to_string(i) + "]: lo <= hi");
    }
  }
}

}  // namespace

std::vector<std::string> validate(const ShsModel& model) {
  std::vector<std::string> out;
  const auto n = model.n();
  const auto& x = model.state_vars;
  const auto xnu = merge_vars(x, model.input_vars);
  const auto xnunoise = merge_vars(xnu, model.noise_vars);

  if (n == 0) out.emplace_back("state_vars: n >= 1");
  if (xnunoise.size() != n + model.m() + model.noise_vars.size()) {
    out.emplace_back("variables: state, input and noise names must be distinct");
  }
  if (!(model.jump.tau > 0.0)) out.emplace_back("jump.tau: tau > 0");
  if (model.jump.q1 < 1) out.emplace_back("jump.q1: q1 >= 1");
  if (model.jump.q1 > model.jump.q2) out.emplace_back("jump: q1 <= q2");

  if (model.drift.size() != n) out.emplace_back("drift: length n");
  for (const auto& p : model.drift) {
    if (!subset(p.used_vars(), xnu)) out.emplace_back("drift: polynomials over (x, nu)");
  }
  if (model.diffusion.size() != n) out.emplace_back("diffusion: n rows");
  for (const auto& row : model.diffusion) {
    if (row.size() != model.brownian_dim()) out.emplace_back("diffusion: rows of equal length b");
    for (const auto& p : row) {
      if (!subset(p.used_vars(), x)) out.emplace_back("diffusion: polynomials over x");
    }
  }
  if (model.reset.size() != n) out.emplace_back("reset: n rows");
  for (const auto& row : model.reset) {
    if (row.size() != model.poisson_dim()) {
      out.emplace_back("reset: rows of length r = len(poisson_rates)");
    }
    for (const auto& p : row) {
      if (!subset(p.used_vars(), x)) out.emplace_back("reset: polynomials over x");
    }
  }
  for (std::size_t j = 0; j < model.poisson_rates.size(); ++j) {
    if (!(model.poisson_rates[j] >= 0.0)) {
      out.push_back("poisson_rates[" + std::to_string(j) + "]: lambda >= 0");
    }
  }
  if (model.jump_map.size() != n) out.emplace_back("jump_map: length n");
  for (const auto& p : model.jump_map) {
    if (!subset(p.used_vars(), xnunoise)) {
      out.emplace_back("jump_map: polynomials over (x, nu, noise)");
    }
  }
  if (model.noise.size() != model.noise_vars.size()) {
    out.emplace_back("noise: one component per noise variable");
  }
  for (std::size_t i = 0; i < model.noise.size(); ++i) {
    for (const auto& v : model.noise[i].moments.violations()) {
      out.push_back("noise[" + std::to_string(i) + "]: " + v);
    }
  }

  check_box(model.state_set, "X", x, out);
  check_box(model.initial_set, "X0", x, out);
  check_box(model.unsafe_set, "Xu", x, out);
  if (!model.input_set.vars.empty()) check_box(model.input_set, "U", model.input_vars, out);
  if (!model.state_set.contains_box(model.initial_set)) out.emplace_back("X0 ⊆ X");
  if (!model.state_set.contains_box(model.unsafe_set)) out.emplace_back("Xu ⊆ X");
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* to_string(Scenario s) { return s == Scenario::flow ? "flow" : "jump"; }

Admissibility ashs_transition(const JumpParams& jump, int z) {
  return {0 <= z && z <= jump.q2 - 1, jump.q1 <= z && z <= jump.q2};
}

JumpSchedule parse_schedule(const std::string& text) {
  if (text == "uniform") return UniformGap{};
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("schedule must be fixed:d, cyclic:d1,d2,... or uniform");
  }
  const std::string kind = text.substr(0, colon);
  std::vector<int> ds;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      ds.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("schedule gap '" + item + "' is not an integer");
    }
  }
  if (kind == "fixed" && ds.size() == 1) return FixedGap{ds[0]};
  if (kind == "cyclic" && !ds.empty()) return CyclicGaps{ds};
  throw std::invalid_argument("cannot parse schedule '" + text + "'");
}

std::string to_string(const JumpSchedule& s) {
  if (const auto* f = std::get_if<FixedGap>(&s)) return "fixed:" + std::to_string(f->d);
  if (const auto* c = std::get_if<CyclicGaps>(&s)) {
    std::string out = "cyclic:";
    for (std::size_t i = 0; i < c->ds.size(); ++i) {
      out += (i ? "," : "") + std::to_string(c->ds[i]);
    }
    return out;
  }
  return "uniform";
}

std::vector<std::string> validate(const JumpSchedule& s, const JumpParams& jump) {
  std::vector<int> gaps;
  if (const auto* f = std::get_if<FixedGap>(&s)) gaps = {f->d};
  if (const auto* c = std::get_if<CyclicGaps>(&s)) gaps = c->ds;
  std::vector<std::string> out;
  for (int d : gaps) {
    if (d < jump.q1 || d > jump.q2) {
      out.push_back("schedule gap " + std::to_string(d) + ": q1 <= d <= q2");
    }
  }
  return out;
}

}  // namespace shscert
