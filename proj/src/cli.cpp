#include "shscert/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "shscert/io.hpp"

#ifndef SHSCERT_DATA_DIR
#define SHSCERT_DATA_DIR "data"
#endif

namespace shscert {

namespace fs = std::filesystem;

namespace {

/// Input invariants that make a run meaningless; mapped to exit code 3.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage could not complete.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Globals {
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string format = "json";
  std::string domain;
  std::string data_dir = SHSCERT_DATA_DIR;
};

class Run {
 public:
  Run(std::string command, std::vector<std::string> args, const Globals& g)
      : command_(std::move(command)), args_(std::move(args)), g_(g) {}

  Json read_input(const fs::path& p) {
    const std::string text = read_text_file(p);
    inputs_[p.generic_string()] = hex64(fnv1a(text));
    return parse_json(text, p.string());
  }

  void write_json(const std::string& name, const Json& j) {
    write_json_file(fs::path(g_.out_dir) / name, j);
    outputs_.push_back(name);
  }

  void write_text(const std::string& name, const std::string& text) {
    write_text_file(fs::path(g_.out_dir) / name, text);
    outputs_.push_back(name);
  }

  void finish(int exit_code) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    Json inputs = Json::object();
    for (const auto& [k, v] : inputs_) inputs[k] = v;
    Json m{{"command", command_}, {"args", args_},         {"input_hashes", inputs},
           {"seed", g_.seed},    {"tool_version", kToolVersion}, {"wall_clock", ts.str()},
           {"exit_code", exit_code}, {"outputs", outputs_}};
    write_json_file(fs::path(g_.out_dir) / "manifest.json", m);
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  const Globals& g_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
};

IntervalBox parse_domain(const std::string& text, const ShsModel& model) {
  IntervalBox box;
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos || i >= model.n()) {
      throw IoError("--domain", "expected lo:hi for each state variable");
    }
    try {
      const double lo = std::stod(part.substr(0, colon));
      const double hi = std::stod(part.substr(colon + 1));
      if (!(lo <= hi)) throw IoError("--domain", "lo <= hi");
      box.vars.push_back(model.state_vars[i++]);
      box.bounds.push_back({lo, hi});
    } catch (const std::logic_error&) {
      throw IoError("--domain", "not a number in '" + part + "'");
    }
  }
  if (i != model.n()) throw IoError("--domain", "one interval per state variable");
  return box;
}

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

ShsModel load_model(Run& run, const fs::path& p) {
  ShsModel m = model_from_json(run.read_input(p));
  if (auto errs = validate(m); !errs.empty()) {
    throw InvariantError("model invariant violated: " + joined(errs));
  }
  return m;
}

CbcCandidate load_candidate(Run& run, const fs::path& p, const ShsModel& model) {
  CbcCandidate c = candidate_from_json(run.read_input(p));
  if (auto errs = validate(c, model); !errs.empty()) {
    throw InvariantError("candidate invariant violated: " + joined(errs));
  }
  return c;
}

IntervalBox domain_of(const Globals& g, const ShsModel& model) {
  return g.domain.empty() ? model.state_set : parse_domain(g.domain, model);
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::holds: return kExitOk;
    case Verdict::fails: return kExitFail;
    case Verdict::inconclusive: return kExitInconclusive;
  }
  return kExitFail;
}

std::string report_csv(const CbcReport& r) {
  std::string s = "condition,verdict,margin\n";
  for (const auto& c : r.conditions) {
    s += std::string(to_string(c.id)) + "," + to_string(c.verdict) + "," +
         format_double(c.margin) + "\n";
  }
  return s;
}

void print(std::ostream& out, const Globals& g, const Json& j, const std::string& csv = {}) {
  if (g.format == "csv" && !csv.empty()) {
    out << csv;
  } else {
    out << j.dump(2) << "\n";
  }
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string model, candidate;
};

int cmd_verify(const VerifyArgs& a, const Globals& g, Run& run, std::ostream& out) {
  const ShsModel model = load_model(run, a.model);
  const CbcCandidate cand = load_candidate(run, a.candidate, model);
  const CbcReport rep = check_cbc(model, cand, domain_of(g, model));
  const Json j = to_json(rep);
  run.write_json("cbc_report.json", j);
  if (g.format == "csv") run.write_text("cbc_report.csv", report_csv(rep));
  print(out, g, j, report_csv(rep));
  return verdict_exit(rep.overall());
}

struct AugmentArgs {
  std::string model, candidate;
  std::optional<double> eps1, eps2;
};

int cmd_augment(const AugmentArgs& a, const Globals& g, Run& run, std::ostream& out) {
  const ShsModel model = load_model(run, a.model);
  const CbcCandidate cand = load_candidate(run, a.candidate, model);
  const double eps1 = a.eps1.value_or(default_eps1());
  const double eps2 = a.eps2.value_or(default_eps2(model.jump));
  Acbc acbc;
  try {
    acbc = construct_acbc(cand, model.jump, eps1, eps2);
  } catch (const AcbcConstructionError& e) {
    throw StageError("augment", e.what());
  } catch (const UnsupportedRegimeError& e) {
    throw StageError("augment", e.what());
  } catch (const std::invalid_argument& e) {
    throw InvariantError(e.what());
  }
  const AcbcReport rep = check_acbc_conditions(model, acbc, domain_of(g, model));
  run.write_json("acbc.json", to_json(acbc));
  run.write_json("acbc_report.json", to_json(rep));
  print(out, g, Json{{"acbc", to_json(acbc)}, {"report", to_json(rep)}});
  return kExitOk;
}

struct BoundArgs {
  std::string acbc;
  int horizon = 100;
};

int cmd_bound(const BoundArgs& a, const Globals& g, Run& run, std::ostream& out) {
  const Acbc acbc = acbc_from_json(run.read_input(a.acbc));
  SafetyBound b;
  try {
    b = compute_delta(acbc.alpha, acbc.eta, acbc.kappa, acbc.gamma, a.horizon);
  } catch (const std::invalid_argument& e) {
    throw InvariantError(e.what());
  }
  const Json j = to_json(b);
  run.write_json("bound.json", j);
  print(out, g, j);
  return kExitOk;
}

struct SimulateArgs {
  std::string model;
  std::string candidate;
  std::string acbc;
  int runs = 10;
  int horizon = 100;
  int substeps = 20;
  std::string schedule = "uniform";
  std::vector<double> x0;
  unsigned workers = 0;
};

SimConfig make_config(const SimulateArgs& a, const Globals& g, const ShsModel& model) {
  SimConfig cfg;
  cfg.n_trajectories = a.runs;
  cfg.horizon = a.horizon;
  cfg.substeps_per_tau = a.substeps;
  cfg.master_seed = g.seed;
  cfg.workers = a.workers;
  try {
    cfg.schedule = parse_schedule(a.schedule);
  } catch (const std::exception& e) {
    throw IoError("--schedule", e.what());
  }
  if (!a.x0.empty()) cfg.x0 = a.x0;
  if (auto errs = validate(cfg, model); !errs.empty()) {
    throw InvariantError("simulation config invariant violated: " + joined(errs));
  }
  return cfg;
}

std::string csv_name(std::size_t i, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(total - 1).size());
  std::string idx = std::to_string(i);
  return "trajectory_" + std::string(width - std::min(width, idx.size()), '0') + idx + ".csv";
}

Json trajectory_summary(const Trajectory& t) {
  auto opt = [](const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"seed", t.seed},
              {"first_unsafe", opt(t.first_unsafe)},
              {"first_exceed", opt(t.first_exceed)},
              {"first_exit", opt(t.first_exit)},
              {"blowup", opt(t.blowup)},
              {"flows", t.flow_count},
              {"jumps", t.jump_count}};
}

int cmd_simulate(const SimulateArgs& a, const Globals& g, Run& run, std::ostream& out) {
  const ShsModel model = load_model(run, a.model);
  if (a.candidate.empty() == a.acbc.empty()) {
    throw IoError("simulate", "give exactly one of --candidate or --acbc");
  }
  std::optional<Acbc> acbc;
  CbcCandidate cand;
  if (!a.acbc.empty()) {
    acbc = acbc_from_json(run.read_input(a.acbc));
    cand = acbc->base;
    if (auto errs = validate(cand, model); !errs.empty()) {
      throw InvariantError("candidate invariant violated: " + joined(errs));
    }
  } else {
    cand = load_candidate(run, a.candidate, model);
  }
  const SimConfig cfg = make_config(a, g, model);
  const Controllers ctrl = controllers_of(cand);
  const CompiledDynamics dyn(model);

  Json runs = Json::array();
  Json trajectories = Json::array();
  const std::size_t n = static_cast<std::size_t>(cfg.n_trajectories);
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory t = simulate(dyn, ctrl, cfg, i, acbc ? &*acbc : nullptr, true);
    if (g.format == "csv") {
      run.write_text(csv_name(i, n), trajectory_csv(t, model.n()));
    } else {
      Json pts = Json::array();
      for (const auto& p : t.points) {
        pts.push_back(Json{{"k", p.k},
                           {"time", p.time},
                           {"z", p.state.z},
                           {"scenario", p.scenario ? Json(to_string(*p.scenario)) : Json(nullptr)},
                           {"x", p.state.x},
                           {"B_value", p.b_value ? Json(*p.b_value) : Json(nullptr)}});
      }
      Json tj = trajectory_summary(t);
      tj["points"] = pts;
      trajectories.push_back(tj);
    }
    runs.push_back(trajectory_summary(t));
  }
  if (g.format != "csv") run.write_json("trajectories.json", trajectories);

  Json summary{{"runs", runs}};
  int code = kExitOk;
  if (acbc) {
    const MonteCarloReport mc = monte_carlo(model, ctrl, *acbc, cfg);
    run.write_json("monte_carlo.json", to_json(mc));
    summary["monte_carlo"] = to_json(mc);
    if (mc.violation) code = kExitFail;
  }
  run.write_json("simulation.json", summary);
  print(out, g, summary);
  return code;
}

struct SynthArgs {
  std::string model, templ;
  std::optional<std::size_t> budget;
};

int cmd_synth(const SynthArgs& a, const Globals& g, Run& run, std::ostream& out) {
  const ShsModel model = load_model(run, a.model);
  SynthTemplate t = synth_template_from_json(run.read_input(a.templ));
  if (g.seed_given) t.seed = g.seed;
  if (a.budget) t.budget = *a.budget;
  SynthResult r;
  try {
    r = search(model, t, domain_of(g, model));
  } catch (const SynthPreconditionError& e) {
    throw InvariantError(e.what());
  }
  run.write_json("candidate.json", to_json(r.candidate));
  run.write_json("synth_report.json", to_json(r));
  print(out, g, to_json(r), report_csv(r.report));
  return r.status == SynthStatus::feasible ? kExitOk : kExitFail;
}

struct ReproArgs {
  int case_id = 1;
  int runs = 1000;
  int substeps = 20;
  std::string schedule = "uniform";
  int plot_runs = 10;
  unsigned workers = 0;
};

int cmd_repro(const ReproArgs& a, const Globals& g, Run& run, std::ostream& out,
              std::ostream& err) {
  const fs::path dir = fs::path(g.data_dir) / ("case" + std::to_string(a.case_id));
  const ShsModel model = load_model(run, dir / "model.json");
  const CbcCandidate cand = load_candidate(run, dir / "candidate.json", model);
  const Json ref = run.read_input(dir / "reference.json");
  const Json& rounded = ref.at("rounded");
  const int horizon = ref.at("horizon").get<int>();
  const IntervalBox domain = domain_of(g, model);

  std::ostringstream text;
  text << "case " << a.case_id << "\n";

  // verify
  const CbcReport cbc = check_cbc(model, cand, domain);
  run.write_json("cbc_report.json", to_json(cbc));
  text << "verify: " << to_string(cbc.overall()) << "\n";
  for (const auto& c : cbc.conditions) {
    text << "  " << std::left << std::setw(8) << to_string(c.id) << " " << std::setw(12)
         << to_string(c.verdict) << " margin " << format_double(c.margin) << "\n";
  }

  // augment
  Acbc acbc;
  try {
    acbc = construct_acbc(cand, model.jump, ref.at("eps1").get<double>(),
                          ref.at("eps2").get<double>());
  } catch (const std::exception& e) {
    throw StageError("augment", e.what());
  }
  const AcbcReport arep = check_acbc_conditions(model, acbc, domain);
  run.write_json("acbc.json", to_json(acbc));
  run.write_json("acbc_report.json", to_json(arep));
  text << "augment: regime " << to_string(acbc.regime) << ", beta_alpha "
       << format_double(acbc.beta_alpha) << ", beta_eta " << format_double(acbc.beta_eta)
       << ", kappa " << format_double(acbc.kappa) << ", gamma " << format_double(acbc.gamma)
       << ", checks " << to_string(arep.overall()) << "\n";

  // bound
  SafetyBound from_rounded, full;
  try {
    from_rounded = compute_delta(rounded.at("alpha").get<double>(), rounded.at("eta").get<double>(),
                          rounded.at("kappa").get<double>(), rounded.at("gamma").get<double>(),
                          horizon);
    full = compute_delta(acbc.alpha, acbc.eta, acbc.kappa, acbc.gamma, horizon);
  } catch (const std::exception& e) {
    throw StageError("bound", e.what());
  }
  const double expected = rounded.at("safety").get<double>();
  const bool bound_ok = std::abs(from_rounded.safety_probability() - expected) <= 1e-4;
  run.write_json("bound.json", Json{{"rounded_constants", to_json(from_rounded)},
                                    {"full_precision", to_json(full)},
                                    {"expected_safety", expected},
                                    {"matches_expected", bound_ok}});
  text << "bound: safety " << format_double(from_rounded.safety_probability())
       << " from rounded constants (expected " << format_double(expected) << ", "
       << (bound_ok ? "match" : "MISMATCH") << "); full precision "
       << format_double(full.safety_probability()) << " (" << to_string(full.branch)
       << " branch)\n";

  // monte carlo
  SimulateArgs sa;
  sa.runs = a.runs;
  sa.horizon = horizon;
  sa.substeps = a.substeps;
  sa.schedule = a.schedule;
  sa.workers = a.workers;
  const SimConfig cfg = make_config(sa, g, model);
  const Controllers ctrl = controllers_of(cand);
  const MonteCarloReport mc = monte_carlo(model, ctrl, acbc, cfg);
  run.write_json("monte_carlo.json", to_json(mc));
  const bool mc_ok = !mc.violation && mc.p_unsafe <= mc.p_exceed;
  text << "monte_carlo: n " << mc.n << ", p_exceed " << format_double(mc.p_exceed) << " ci ["
       << format_double(mc.ci_exceed.lo) << ", " << format_double(mc.ci_exceed.hi)
       << "], p_unsafe " << format_double(mc.p_unsafe) << ", delta "
       << format_double(mc.bound.delta) << ", " << (mc_ok ? "consistent" : "VIOLATION") << "\n";

  SimConfig plot = cfg;
  plot.n_trajectories = std::max(1, a.plot_runs);
  const CompiledDynamics dyn(model);
  for (int i = 0; i < a.plot_runs; ++i) {
    const Trajectory t = simulate(dyn, ctrl, plot, static_cast<std::size_t>(i), &acbc, true);
    run.write_text(csv_name(static_cast<std::size_t>(i), static_cast<std::size_t>(a.plot_runs)),
                   trajectory_csv(t, model.n()));
  }

  run.write_json("summary.json", Json{{"case", a.case_id},
                                      {"verify", to_string(cbc.overall())},
                                      {"min_margin", cbc.min_margin()},
                                      {"regime", to_string(acbc.regime)},
                                      {"acbc_checks", to_string(arep.overall())},
                                      {"safety_rounded", from_rounded.safety_probability()},
                                      {"safety_full_precision", full.safety_probability()},
                                      {"expected_safety", expected},
                                      {"bound_matches", bound_ok},
                                      {"p_exceed", mc.p_exceed},
                                      {"p_unsafe", mc.p_unsafe},
                                      {"monte_carlo_consistent", mc_ok}});
  out << text.str();
  if (!bound_ok) {
    err << "error: bound: safety probability does not match the expected value\n";
    return kExitFail;
  }
  if (!mc_ok) {
    err << "error: monte_carlo: empirical exceedance is inconsistent with delta\n";
    return kExitFail;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barrier-certificate safety toolkit for stochastic hybrid systems", "shscert"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--domain", g.domain, "Verification box as lo:hi per state variable");
  app.add_option("--data", g.data_dir, "Directory with bundled case files")->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check the CBC conditions of a candidate");
  verify->add_option("model", va.model)->required();
  verify->add_option("candidate", va.candidate)->required();

  AugmentArgs aa;
  auto* augment = app.add_subcommand("augment", "Lift a CBC to the augmented system");
  augment->add_option("model", aa.model)->required();
  augment->add_option("candidate", aa.candidate)->required();
  augment->add_option("--eps1", aa.eps1);
  augment->add_option("--eps2", aa.eps2);

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Probability bound from an augmented certificate");
  bound->add_option("acbc", ba.acbc)->required();
  bound->add_option("--horizon", ba.horizon)->check(CLI::NonNegativeNumber)->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate closed-loop trajectories");
  sim->add_option("model", sa.model)->required();
  sim->add_option("--candidate", sa.candidate);
  sim->add_option("--acbc", sa.acbc);
  sim->add_option("--runs", sa.runs)->capture_default_str();
  sim->add_option("--horizon", sa.horizon)->capture_default_str();
  sim->add_option("--substeps", sa.substeps)->capture_default_str();
  sim->add_option("--schedule", sa.schedule)->capture_default_str();
  sim->add_option("--x0", sa.x0)->delimiter(',');
  sim->add_option("--workers", sa.workers);

  SynthArgs ya;
  auto* synth = app.add_subcommand("synthesize", "Search for a CBC candidate");
  synth->add_option("model", ya.model)->required();
  synth->add_option("template", ya.templ)->required();
  synth->add_option("--budget", ya.budget);

  ReproArgs ra;
  auto* repro = app.add_subcommand("repro", "Reproduce a bundled case study");
  repro->add_option("case", ra.case_id)->required()->check(CLI::IsMember({1, 2, 3}));
  repro->add_option("--runs", ra.runs)->capture_default_str();
  repro->add_option("--substeps", ra.substeps)->capture_default_str();
  repro->add_option("--schedule", ra.schedule)->capture_default_str();
  repro->add_option("--plot-runs", ra.plot_runs)->capture_default_str();
  repro->add_option("--workers", ra.workers);

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitMalformed;
  }
  g.seed_given = seed_opt->count() > 0;

  const std::string command = app.get_subcommands().front()->get_name();
  Run run(command, args, g);
  int code = kExitOk;
  try {
    if (*verify) code = cmd_verify(va, g, run, out);
    else if (*augment) code = cmd_augment(aa, g, run, out);
    else if (*bound) code = cmd_bound(ba, g, run, out);
    else if (*sim) code = cmd_simulate(sa, g, run, out);
    else if (*synth) code = cmd_synth(ya, g, run, out);
    else if (*repro) code = cmd_repro(ra, g, run, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitMalformed;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitMalformed;
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitFail;
  } catch (const std::exception& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    code = kExitMalformed;
  }
  try {
    run.finish(code);
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitMalformed;
  }
  return code;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace shscert
