#include "shscert/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace shscert {

namespace {

std::string child(const std::string& at, const std::string& key) { return at + "/" + key; }
std::string child(const std::string& at, std::size_t i) { return at + "/" + std::to_string(i); }

const Json& field(const Json& j, const std::string& at, const char* key) {
  if (!j.is_object()) throw IoError(at.empty() ? "/" : at, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw IoError(child(at, key), "missing field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& at, const char* key) {
  if (!j.is_object()) throw IoError(at.empty() ? "/" : at, "expected an object");
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const Json& j, const std::string& at) {
  if (!j.is_number()) throw IoError(at, "expected a number");
  return j.get<double>();
}

long long as_integer(const Json& j, const std::string& at) {
  if (!j.is_number_integer()) throw IoError(at, "expected an integer");
  return j.get<long long>();
}

std::uint64_t as_u64(const Json& j, const std::string& at) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw IoError(at, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string as_string(const Json& j, const std::string& at) {
  if (!j.is_string()) throw IoError(at, "expected a string");
  return j.get<std::string>();
}

const Json& as_array(const Json& j, const std::string& at) {
  if (!j.is_array()) throw IoError(at, "expected an array");
  return j;
}

std::vector<std::string> strings(const Json& j, const std::string& at) {
  std::vector<std::string> out;
  const Json& a = as_array(j, at);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_string(a[i], child(at, i)));
  return out;
}

std::vector<double> numbers(const Json& j, const std::string& at) {
  std::vector<double> out;
  const Json& a = as_array(j, at);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], child(at, i)));
  return out;
}

double number_field(const Json& j, const std::string& at, const char* key) {
  return as_number(field(j, at, key), child(at, key));
}

std::vector<Polynomial> polys(const Json& j, const std::string& at) {
  std::vector<Polynomial> out;
  const Json& a = as_array(j, at);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(polynomial_from_json(a[i], child(at, i)));
  return out;
}

Json polys_json(const std::vector<Polynomial>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

std::vector<std::vector<Polynomial>> poly_matrix(const Json& j, const std::string& at) {
  std::vector<std::vector<Polynomial>> out;
  const Json& a = as_array(j, at);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(polys(a[i], child(at, i)));
  return out;
}

Json poly_matrix_json(const std::vector<std::vector<Polynomial>>& m) {
  Json a = Json::array();
  for (const auto& row : m) a.push_back(polys_json(row));
  return a;
}

Range range_from_json(const Json& j, const std::string& at) {
  const auto v = numbers(j, at);
  if (v.size() != 2) throw IoError(at, "expected [lo, hi]");
  return {v[0], v[1]};
}

template <class Fn>
auto wrap_conversion(const std::string& at, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(at.empty() ? "/" : at, e.what());
  }
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw IoError(source + ":" + std::to_string(line) + ":" + std::to_string(col),
                  "malformed JSON");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot write file");
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

Json to_json(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back(Json{{"exp", e}, {"coef", c}});
  return Json{{"vars", p.vars()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const Json& j, const std::string& at) {
  const auto vars = strings(field(j, at, "vars"), child(at, "vars"));
  Polynomial p = wrap_conversion(child(at, "vars"), [&] { return Polynomial(vars); });
  const std::string tat = child(at, "terms");
  const Json& terms = as_array(field(j, at, "terms"), tat);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string it = child(tat, i);
    const Json& e = as_array(field(terms[i], it, "exp"), child(it, "exp"));
    if (e.size() != vars.size()) throw IoError(child(it, "exp"), "length must match vars");
    Exponents ex;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const long long v = as_integer(e[k], child(child(it, "exp"), k));
      if (v < 0) throw IoError(child(child(it, "exp"), k), "exponent must be nonnegative");
      ex.push_back(static_cast<unsigned>(v));
    }
    p.add_term(ex, number_field(terms[i], it, "coef"));
  }
  return p;
}

Json to_json(const IntervalBox& box) {
  Json a = Json::array();
  for (std::size_t i = 0; i < box.dim(); ++i) {
    a.push_back(Json{{"var", box.vars[i]}, {"lo", box.bounds[i].lo}, {"hi", box.bounds[i].hi}});
  }
  return a;
}

IntervalBox box_from_json(const Json& j, const std::string& at) {
  IntervalBox box;
  const Json& a = as_array(j, at);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string it = child(at, i);
    box.vars.push_back(as_string(field(a[i], it, "var"), child(it, "var")));
    const Interval iv{number_field(a[i], it, "lo"), number_field(a[i], it, "hi")};
    if (!(iv.lo <= iv.hi)) throw IoError(it, "lo <= hi");
    box.bounds.push_back(iv);
  }
  return box;
}

Json to_json(const JumpParams& jp) { return Json{{"tau", jp.tau}, {"q1", jp.q1}, {"q2", jp.q2}}; }

JumpParams jump_params_from_json(const Json& j, const std::string& at) {
  JumpParams jp;
  jp.tau = number_field(j, at, "tau");
  jp.q1 = static_cast<int>(as_integer(field(j, at, "q1"), child(at, "q1")));
  jp.q2 = static_cast<int>(as_integer(field(j, at, "q2"), child(at, "q2")));
  return jp;
}

Json to_json(const ShsModel& m) {
  Json noise = Json::array();
  for (const auto& c : m.noise) {
    noise.push_back(Json{{"sampler", to_string(c.sampler)}, {"moments", c.moments.moments}});
  }
  Json j{{"state_vars", m.state_vars},
         {"input_vars", m.input_vars},
         {"noise_vars", m.noise_vars},
         {"drift", polys_json(m.drift)},
         {"diffusion", poly_matrix_json(m.diffusion)},
         {"reset", poly_matrix_json(m.reset)},
         {"poisson_rates", m.poisson_rates},
         {"jump_map", polys_json(m.jump_map)},
         {"noise", noise},
         {"jump", to_json(m.jump)},
         {"X", to_json(m.state_set)},
         {"X0", to_json(m.initial_set)},
         {"Xu", to_json(m.unsafe_set)}};
  if (m.input_set.dim() > 0) j["U"] = to_json(m.input_set);
  return j;
}

ShsModel model_from_json(const Json& j, const std::string& at) {
  ShsModel m;
  m.state_vars = strings(field(j, at, "state_vars"), child(at, "state_vars"));
  if (const Json* v = optional_field(j, at, "input_vars")) {
    m.input_vars = strings(*v, child(at, "input_vars"));
  }
  if (const Json* v = optional_field(j, at, "noise_vars")) {
    m.noise_vars = strings(*v, child(at, "noise_vars"));
  }
  m.drift = polys(field(j, at, "drift"), child(at, "drift"));
  if (const Json* v = optional_field(j, at, "diffusion")) {
    m.diffusion = poly_matrix(*v, child(at, "diffusion"));
  }
  if (const Json* v = optional_field(j, at, "reset")) m.reset = poly_matrix(*v, child(at, "reset"));
  if (const Json* v = optional_field(j, at, "poisson_rates")) {
    m.poisson_rates = numbers(*v, child(at, "poisson_rates"));
  }
  m.jump_map = polys(field(j, at, "jump_map"), child(at, "jump_map"));
  if (const Json* v = optional_field(j, at, "noise")) {
    const std::string nat = child(at, "noise");
    const Json& a = as_array(*v, nat);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string it = child(nat, i);
      NoiseComponent c;
      c.sampler = wrap_conversion(child(it, "sampler"), [&] {
        return noise_sampler_from_string(as_string(field(a[i], it, "sampler"), child(it, "sampler")));
      });
      if (const Json* mo = optional_field(a[i], it, "moments")) {
        c.moments.moments = numbers(*mo, child(it, "moments"));
      } else {
        switch (c.sampler) {
          case NoiseSampler::gaussian: c.moments = NoiseMoments::gaussian(16); break;
          case NoiseSampler::uniform: c.moments = NoiseMoments::uniform_unit_variance(16); break;
          case NoiseSampler::rademacher: c.moments = NoiseMoments::rademacher(16); break;
        }
      }
      m.noise.push_back(std::move(c));
    }
  } else {
    m.noise.assign(m.noise_vars.size(), NoiseComponent{});
  }
  m.jump = jump_params_from_json(field(j, at, "jump"), child(at, "jump"));
  m.state_set = box_from_json(field(j, at, "X"), child(at, "X"));
  m.initial_set = box_from_json(field(j, at, "X0"), child(at, "X0"));
  m.unsafe_set = box_from_json(field(j, at, "Xu"), child(at, "Xu"));
  if (const Json* v = optional_field(j, at, "U")) m.input_set = box_from_json(*v, child(at, "U"));
  return m;
}

Json to_json(const CbcCandidate& c) {
  return Json{{"barrier", to_json(c.barrier)}, {"kappa1", c.kappa1},
              {"kappa2", c.kappa2},            {"gamma1", c.gamma1},
              {"gamma2", c.gamma2},            {"alpha_bar", c.alpha_bar},
              {"eta_bar", c.eta_bar},          {"nu_flow", polys_json(c.nu_flow)},
              {"nu_jump", polys_json(c.nu_jump)}};
}

CbcCandidate candidate_from_json(const Json& j, const std::string& at) {
  CbcCandidate c;
  c.barrier = polynomial_from_json(field(j, at, "barrier"), child(at, "barrier"));
  c.kappa1 = number_field(j, at, "kappa1");
  c.kappa2 = number_field(j, at, "kappa2");
  c.gamma1 = number_field(j, at, "gamma1");
  c.gamma2 = number_field(j, at, "gamma2");
  c.alpha_bar = number_field(j, at, "alpha_bar");
  c.eta_bar = number_field(j, at, "eta_bar");
  c.nu_flow = polys(field(j, at, "nu_flow"), child(at, "nu_flow"));
  c.nu_jump = polys(field(j, at, "nu_jump"), child(at, "nu_jump"));
  return c;
}

Json to_json(const CbcReport& r) {
  Json conds = Json::array();
  for (const auto& c : r.conditions) {
    conds.push_back(Json{{"id", to_string(c.id)},
                         {"verdict", to_string(c.verdict)},
                         {"margin", c.margin},
                         {"witness", c.witness}});
  }
  return Json{{"overall", to_string(r.overall())},
              {"min_margin", r.min_margin()},
              {"conditions", conds}};
}

Json to_json(const Acbc& a) {
  return Json{{"regime", to_string(a.regime)}, {"eps1", a.eps1},
              {"eps2", a.eps2},                {"alpha", a.alpha},
              {"eta", a.eta},                  {"kappa", a.kappa},
              {"gamma", a.gamma},              {"beta_alpha", a.beta_alpha},
              {"beta_eta", a.beta_eta},        {"jump", to_json(a.jump)},
              {"base", to_json(a.base)}};
}

Acbc acbc_from_json(const Json& j, const std::string& at) {
  Acbc a;
  a.regime = wrap_conversion(child(at, "regime"), [&] {
    return regime_from_string(as_string(field(j, at, "regime"), child(at, "regime")));
  });
  a.eps1 = number_field(j, at, "eps1");
  a.eps2 = number_field(j, at, "eps2");
  a.alpha = number_field(j, at, "alpha");
  a.eta = number_field(j, at, "eta");
  a.kappa = number_field(j, at, "kappa");
  a.gamma = number_field(j, at, "gamma");
  a.beta_alpha = number_field(j, at, "beta_alpha");
  a.beta_eta = number_field(j, at, "beta_eta");
  a.jump = jump_params_from_json(field(j, at, "jump"), child(at, "jump"));
  a.base = candidate_from_json(field(j, at, "base"), child(at, "base"));
  return a;
}

Json to_json(const AcbcReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back(Json{{"id", c.id},
                          {"z", c.z},
                          {"verdict", to_string(c.verdict)},
                          {"margin", c.margin},
                          {"witness", c.witness}});
  }
  Json lift = Json::array();
  for (const auto& l : r.lift) {
    lift.push_back(Json{{"scenario", to_string(l.scenario)}, {"z", l.z}, {"margin", l.margin}});
  }
  return Json{{"overall", to_string(r.overall())},
              {"precondition_violations", r.precondition_violations},
              {"checks", checks},
              {"lift", lift}};
}

Json to_json(const SafetyBound& b) {
  return Json{{"delta", b.delta},
              {"delta_raw", b.delta_raw},
              {"safety_probability", b.safety_probability()},
              {"branch", to_string(b.branch)},
              {"horizon", b.horizon},
              {"alpha", b.alpha},
              {"eta", b.eta},
              {"kappa", b.kappa},
              {"gamma", b.gamma}};
}

Json to_json(const MonteCarloReport& r) {
  auto ci = [](const BinomialInterval& c) { return Json::array({c.lo, c.hi}); };
  return Json{{"n", r.n},
              {"exceed_count", r.exceed_count},
              {"unsafe_count", r.unsafe_count},
              {"exit_count", r.exit_count},
              {"blowup_count", r.blowup_count},
              {"unsafe_without_exceed", r.unsafe_without_exceed},
              {"p_exceed", r.p_exceed},
              {"p_unsafe", r.p_unsafe},
              {"confidence", r.confidence},
              {"ci_exceed", ci(r.ci_exceed)},
              {"ci_unsafe", ci(r.ci_unsafe)},
              {"delta", r.bound.delta},
              {"violation", r.violation}};
}

Json to_json(const SynthTemplate& t) {
  auto range = [](const Range& r) { return Json::array({r.lo, r.hi}); };
  Json j{{"cert_degree", t.cert_degree},
         {"flow_controller_degree", t.flow_controller_degree},
         {"jump_controller_degree", t.jump_controller_degree},
         {"kappa1", range(t.kappa1)},
         {"kappa2", range(t.kappa2)},
         {"gamma1", range(t.gamma1)},
         {"gamma2", range(t.gamma2)},
         {"alpha_bar", range(t.alpha_bar)},
         {"eta_bar", range(t.eta_bar)},
         {"coef_bound", t.coef_bound},
         {"budget", t.budget},
         {"restarts", t.restarts},
         {"seed", t.seed},
         {"level_slack", t.level_slack},
         {"stop_at_feasible", t.stop_at_feasible},
         {"workers", t.workers}};
  if (t.warm_start) j["warm_start"] = to_json(*t.warm_start);
  return j;
}

SynthTemplate synth_template_from_json(const Json& j, const std::string& at) {
  SynthTemplate t;
  auto u = [&](const char* key, auto& out) {
    if (const Json* v = optional_field(j, at, key)) {
      out = static_cast<std::remove_reference_t<decltype(out)>>(as_u64(*v, child(at, key)));
    }
  };
  auto r = [&](const char* key, Range& out) {
    if (const Json* v = optional_field(j, at, key)) out = range_from_json(*v, child(at, key));
  };
  u("cert_degree", t.cert_degree);
  u("flow_controller_degree", t.flow_controller_degree);
  u("jump_controller_degree", t.jump_controller_degree);
  r("kappa1", t.kappa1);
  r("kappa2", t.kappa2);
  r("gamma1", t.gamma1);
  r("gamma2", t.gamma2);
  r("alpha_bar", t.alpha_bar);
  r("eta_bar", t.eta_bar);
  if (const Json* v = optional_field(j, at, "coef_bound")) t.coef_bound = as_number(*v, child(at, "coef_bound"));
  u("budget", t.budget);
  u("restarts", t.restarts);
  u("seed", t.seed);
  if (const Json* v = optional_field(j, at, "level_slack")) {
    t.level_slack = as_number(*v, child(at, "level_slack"));
  }
  if (const Json* v = optional_field(j, at, "stop_at_feasible")) {
    if (!v->is_boolean()) throw IoError(child(at, "stop_at_feasible"), "expected a boolean");
    t.stop_at_feasible = v->get<bool>();
  }
  u("workers", t.workers);
  if (const Json* v = optional_field(j, at, "warm_start")) {
    t.warm_start = candidate_from_json(*v, child(at, "warm_start"));
  }
  return t;
}

Json to_json(const SynthResult& r) {
  return Json{{"status", to_string(r.status)},
              {"margin", r.margin},
              {"evaluations", r.evaluations},
              {"best_restart", r.best_restart},
              {"candidate", to_json(r.candidate)},
              {"report", to_json(r.report)}};
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t, std::size_t state_dim) {
  os << "k,time,z,scenario";
  for (std::size_t i = 1; i <= state_dim; ++i) os << ",x_" << i;
  os << ",B_value\n";
  for (const auto& p : t.points) {
    os << p.k << ',' << format_double(p.time) << ',' << p.state.z << ','
       << (p.scenario ? to_string(*p.scenario) : "");
    for (double x : p.state.x) os << ',' << format_double(x);
    os << ',' << (p.b_value ? format_double(*p.b_value) : "") << '\n';
  }
}

std::string trajectory_csv(const Trajectory& t, std::size_t state_dim) {
  std::ostringstream os;
  write_trajectory_csv(os, t, state_dim);
  return os.str();
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

}  // namespace shscert
