#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "markovlab/decomposition.hpp"
#include "markovlab/diagnostics.hpp"
#include "markovlab/error.hpp"
#include "markovlab/model_io.hpp"

namespace markovlab::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kExamples{"example1", "example2", "doeblin3", "halfmap"};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ArgumentError("cannot write " + path);
  file << text;
}

std::string json_text(const json& doc) { return doc.dump(2) + "\n"; }

Observable load_observable(const std::string& spec, const MetricModel& model) {
  Observable f;
  if (spec == "identity_on_norm" || spec == "min1_2norm") {
    f = builtin_observable(spec, model);
  } else {
    f = observable_from_json(read_json_file(spec), model);
  }
  validate_observable(f, model);
  return f;
}

ProbePlan make_plan(const RunConfig& cfg, const MetricModel& model, StateId target) {
  ProbePlan plan;
  if (cfg.probes.empty()) {
    plan = default_probe_plan(model, target, cfg.horizon, cfg.tail_start);
  } else {
    plan = ProbePlan{target, {}, cfg.horizon, cfg.tail_start};
    for (auto p : cfg.probes) plan.probes.push_back(StateId(p));
  }
  plan.validate(model);
  return plan;
}

Ball pick_ball(const RunConfig& cfg, const MetricModel& model, StateId center) {
  if (cfg.radius > 0.0) return {center, cfg.radius};
  const auto balls = midpoint_balls(model, center);
  if (balls.empty()) throw ArgumentError("no ball available around state " + std::to_string(center.value));
  return balls.front();
}

const Measure& require_invariant(const MetricModel& model) {
  if (!model.invariant_measure()) throw ArgumentError("model \"" + model.name() + "\" has no invariant measure");
  return *model.invariant_measure();
}

std::string render(const DiagnosticReport& report, const MetricModel& model, const std::string& format) {
  return format == "json" ? json_text(report_to_json(report, model)) : report_to_csv(report);
}

std::string render(const std::vector<StabilityPoint>& trace, const std::string& format) {
  if (format == "csv") return stability_to_csv(trace);
  json rows = json::array();
  for (const auto& p : trace) rows.push_back({{"n", p.n}, {"distance", p.distance}});
  return json_text(rows);
}

// ---- run-example ---------------------------------------------------------

struct Expectation {
  std::string what;
  bool met = false;
  std::string observed;
};

struct ExampleBundle {
  std::vector<std::pair<std::string, std::string>> files;  // suffix, content
  std::vector<Expectation> checks;
};

ExampleBundle example_bundle(const std::string& name, const MetricModel& model, const std::string& format) {
  ExampleBundle b;
  auto add_report = [&](const DiagnosticReport& r) { b.files.emplace_back(r.profile, render(r, model, format)); };

  if (name == "example1") {
    const auto f = identity_on_norm(model);
    ProbePlan plan{StateId(0), {}, 200, 1};
    for (std::size_t m = 5; m <= std::min<std::size_t>(100, model.num_states() - 1); ++m) {
      plan.probes.push_back(example1_state(m));
    }
    const auto e = eproperty_profile(model, f, plan);
    plan.horizon = 10000;
    plan.tail_start = 5000;
    const auto c = cesaro_profile(model, f, plan, 0.01);
    add_report(e);
    add_report(c);
    b.files.emplace_back("stability", render(stability_trace(model, dirac(example1_state(10)), 20), format));
    b.checks.push_back({"e-property FAILS(1)",
                        e.verdict.kind == VerdictKind::fails && std::abs(e.verdict.level - 1.0) <= 1e-12,
                        e.verdict.to_string()});
    b.checks.push_back({"Cesaro HOLDS-AT-HORIZON", c.verdict.kind == VerdictKind::holds_at_horizon,
                        c.verdict.to_string()});
  } else if (name == "example2") {
    const auto f = min1_2norm(model);
    std::vector<std::uint32_t> primes;
    for (std::size_t i = 1; i < model.num_states(); ++i) {
      const auto& s = model.state(StateId(i));
      if (s.level == 1) primes.push_back(s.prime);
    }
    ProbePlan plan{StateId(0), {}, primes.back(), 1};
    for (auto p : primes) plan.probes.push_back(example2_state(primes, p, 1));
    const auto e = eproperty_profile(model, f, plan);
    const auto c = cesaro_profile(model, f, plan);
    add_report(e);
    add_report(c);
    b.files.emplace_back("stability",
                         render(stability_trace(model, dirac(example2_state(primes, primes.back(), 1)), primes.back() + 1),
                                format));
    b.checks.push_back({"Cesaro FAILS(>=1/2)", c.verdict.kind == VerdictKind::fails && c.verdict.level >= 0.5,
                        c.verdict.to_string()});
    b.checks.push_back({"e-property FAILS", e.verdict.kind == VerdictKind::fails, e.verdict.to_string()});
  } else if (name == "doeblin3") {
    const auto f = identity_on_norm(model);
    const auto e = eproperty_profile(model, f, default_probe_plan(model, StateId(0), 200, 100));
    const auto c = cesaro_profile(model, f, default_probe_plan(model, StateId(0), 10000, 5000), 0.01);
    const auto trace = stability_trace(model, dirac(StateId(2)), 50);
    add_report(e);
    add_report(c);
    b.files.emplace_back("stability", render(trace, format));
    b.checks.push_back({"e-property HOLDS-AT-HORIZON", e.verdict.kind == VerdictKind::holds_at_horizon,
                        e.verdict.to_string()});
    b.checks.push_back({"Cesaro HOLDS-AT-HORIZON", c.verdict.kind == VerdictKind::holds_at_horizon,
                        c.verdict.to_string()});
    b.checks.push_back({"stability distance <= 2 * 0.7^50",
                        trace.back().distance <= 2.0 * std::pow(0.7, 50.0), format_number(trace.back().distance)});
  } else {  // halfmap
    const auto f = identity_on_norm(model);
    const auto e = eproperty_profile(model, f, default_probe_plan(model, StateId(0), 200, 1));
    const auto c = cesaro_profile(model, f, default_probe_plan(model, StateId(0), 200, 1));
    const auto trace = stability_trace(model, dirac(StateId(1)), 60);
    add_report(e);
    add_report(c);
    b.files.emplace_back("stability", render(trace, format));
    b.checks.push_back({"e-property HOLDS-AT-HORIZON", e.verdict.kind == VerdictKind::holds_at_horizon,
                        e.verdict.to_string()});
    b.checks.push_back({"Cesaro HOLDS-AT-HORIZON", c.verdict.kind == VerdictKind::holds_at_horizon,
                        c.verdict.to_string()});
  }
  return b;
}

int cmd_run_example(const RunConfig& cfg, std::ostream& out) {
  const auto model = cfg.source.load();
  const auto bundle = example_bundle(cfg.source.example, model, cfg.format);
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    for (const auto& [suffix, text] : bundle.files) {
      emit(text, (std::filesystem::path(cfg.out) / (cfg.source.example + "_" + suffix + "." + cfg.format)).string(),
           out);
    }
  }
  bool all = true;
  out << "model " << model.name() << " (" << model.num_states() << " states)\n";
  for (const auto& c : bundle.checks) {
    out << (c.met ? "ok       " : "MISMATCH ") << c.what << ": " << c.observed << '\n';
    all = all && c.met;
  }
  return all ? kExitOk : kExitExpectationFailed;
}

// ---- diagnose ------------------------------------------------------------

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = cfg.source.load();
  const auto f = load_observable(cfg.observable, model);
  const std::string& p = cfg.profile;

  if (p == "eproperty" || p == "cesaro") {
    if (!cfg.target) throw ArgumentError("--z is required for the " + p + " profile");
    const auto plan = make_plan(cfg, model, StateId(*cfg.target));
    const auto report = p == "eproperty" ? eproperty_profile(model, f, plan, cfg.tol)
                                         : cesaro_profile(model, f, plan, cfg.tol);
    emit(render(report, model, cfg.format), cfg.out, out);
    err << "verdict: " << report.verdict.to_string() << '\n';
  } else if (p == "stability") {
    require_invariant(model);
    const StateId x(cfg.start.value_or(0));
    model.check_id(x);
    emit(render(stability_trace(model, dirac(x), cfg.horizon), cfg.format), cfg.out, out);
  } else if (p == "liminf-ball") {
    if (!cfg.target) throw ArgumentError("--z is required for the liminf-ball profile");
    const StateId x(cfg.start.value_or(0));
    model.check_id(x);
    const Ball ball = pick_ball(cfg, model, StateId(*cfg.target));
    const double mass = liminf_ball_mass(model, dirac(x), ball, cfg.tail_start, cfg.horizon);
    if (cfg.format == "json") {
      emit(json_text({{"start", x.value}, {"center", ball.center.value}, {"radius", ball.radius},
                      {"n_lo", cfg.tail_start}, {"n_hi", cfg.horizon}, {"min_mass", mass}}),
           cfg.out, out);
    } else {
      emit("start,center,radius,n_lo,n_hi,min_mass\n" + std::to_string(x.value) + ',' +
               std::to_string(ball.center.value) + ',' + format_number(ball.radius) + ',' +
               std::to_string(cfg.tail_start) + ',' + std::to_string(cfg.horizon) + ',' + format_number(mass) + '\n',
           cfg.out, out);
    }
  } else {  // lemma-ball
    require_invariant(model);
    std::vector<Ball> candidates;
    if (cfg.target) {
      candidates.push_back(pick_ball(cfg, model, StateId(*cfg.target)));
    } else {
      candidates = default_candidate_balls(model);
    }
    const auto search = find_lemma_ball(model, f, cfg.eps, candidates, cfg.horizon);
    for (const auto& note : search.notes) err << "note: " << note << '\n';
    json doc = {{"found", search.found.has_value()}, {"eps", cfg.eps}, {"horizon", cfg.horizon}};
    if (search.found) {
      doc["center"] = search.found->ball.center.value;
      doc["radius"] = search.found->ball.radius;
      doc["start"] = search.found->start;
      doc["oscillation"] = search.found->oscillation;
    }
    if (cfg.format == "json") {
      emit(json_text(doc), cfg.out, out);
    } else if (search.found) {
      emit("found,center,radius,start,oscillation\ntrue," + std::to_string(search.found->ball.center.value) + ',' +
               format_number(search.found->ball.radius) + ',' + std::to_string(search.found->start) + ',' +
               format_number(search.found->oscillation) + '\n',
           cfg.out, out);
    } else {
      emit("found,center,radius,start,oscillation\nfalse,,,,\n", cfg.out, out);
    }
  }
  return kExitOk;
}

// ---- decompose -----------------------------------------------------------

struct DecomposeOptions {
  std::optional<double> alpha;
  std::optional<std::size_t> levels;
  double epsilon = 0.05;
  std::size_t search_horizon = 1000;
  bool exact = false;
};

int cmd_decompose(const RunConfig& cfg, const DecomposeOptions& opt, std::ostream& out) {
  const auto model = cfg.source.load();
  require_invariant(model);
  const auto f = load_observable(cfg.observable, model);

  DecompositionConfig dc;
  dc.start = StateId(cfg.start.value_or(0));
  dc.center = StateId(cfg.target.value_or(dc.start.value));
  model.check_id(dc.start);
  model.check_id(dc.center);
  dc.radius = pick_ball(cfg, model, dc.center).radius;
  dc.alpha = opt.alpha.value_or(default_alpha(model, dc.ball()));
  dc.epsilon = opt.epsilon;
  dc.search_horizon = opt.search_horizon;
  if (!(dc.alpha > 0.0 && dc.alpha < 1.0)) {
    throw ArgumentError("alpha = " + format_number(dc.alpha) + " must lie in (0, gamma) with gamma = mu*(B(z, r)) = " +
                        format_number(invariant_ball_mass(model, dc.ball())));
  }
  dc.levels = opt.levels.value_or(choose_k(dc.alpha, f.sup_bound(), dc.epsilon));

  const auto tree = decompose<double>(model, dc);
  double deviation = 0.0;
  std::string deviation_text;
  json tree_doc;
  if (opt.exact) {
    const auto exact = decompose<Rational>(model, dc);
    const Rational dev = verify_telescoping(model, dc, exact);
    deviation = dev.convert_to<double>();
    deviation_text = dev.str() + " (exact)";
    tree_doc = tree_to_json(exact);
  } else {
    deviation = verify_telescoping(model, dc, tree);
    deviation_text = format_number(deviation);
    tree_doc = tree_to_json(tree);
  }
  tree_doc["start"] = dc.start.value;
  tree_doc["center"] = dc.center.value;
  tree_doc["radius"] = dc.radius;
  tree_doc["telescoping_deviation"] = deviation;
  if (!cfg.out.empty()) emit(json_text(tree_doc), cfg.out, out);

  const bool ok = opt.exact ? deviation == 0.0 : deviation <= kTelescopingTolerance;
  out << "model " << model.name() << ": x0=" << dc.start.value << " z=" << dc.center.value
      << " r=" << format_number(dc.radius) << " alpha=" << format_number(dc.alpha) << " k=" << dc.levels << '\n';
  for (std::size_t i = 0; i < tree.levels.size(); ++i) {
    out << "  level " << i + 1 << ": n=" << tree.levels[i].steps << " r_i=" << format_number(tree.levels[i].radius)
        << " |supp nu|=" << tree.levels[i].nu.size() << " |supp mu|=" << tree.levels[i].mu.size() << '\n';
  }
  out << "telescoping deviation: " << deviation_text << (ok ? "  [within gate]" : "  [ABOVE GATE]") << '\n';

  const auto plan = make_plan(cfg, model, dc.start);
  const auto scan = continuity_scan(model, dc, tree, plan.probes);
  out << "continuity scan (probe,d(x,x0),level,iterate,nu,mu,close)\n";
  for (const auto& r : scan) {
    out << "  " << r.probe.value << ',' << format_number(r.probe_distance) << ',' << r.level << ','
        << format_number(r.iterate_distance) << ',' << (r.nu_distance ? format_number(*r.nu_distance) : "-") << ','
        << (r.mu_distance ? format_number(*r.mu_distance) : "-") << ','
        << (r.close_enough ? "close" : "NOT-CLOSE-ENOUGH") << '\n';
  }
  const auto report = check_contradiction_bound(model, dc, f, plan, cfg.eps);
  if (!report.applicable) {
    out << "contradiction check: NOT-APPLICABLE\n";
  } else {
    out << "contradiction check: bound=" << format_number(report.bound) << " lemma ball B("
        << report.lemma->ball.center.value << ", " << format_number(report.lemma->ball.radius)
        << ") N=" << report.lemma->start << (report.passed() ? " PASS" : " FAIL") << '\n';
    for (const auto& r : report.rows) {
      out << "  probe " << r.probe.value << ": " << to_string(r.status) << " gap=" << format_number(r.measured_gap)
          << " bound+slack=" << format_number(r.bound + r.slack) << '\n';
    }
  }
  for (const auto& note : report.notes) out << "  note: " << note << '\n';
  return ok ? kExitOk : kExitExpectationFailed;
}

// ---- check-stability -----------------------------------------------------

int cmd_check_stability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = cfg.source.load();
  require_invariant(model);
  std::vector<StateId> starts;
  if (cfg.start) {
    model.check_id(StateId(*cfg.start));
    starts.push_back(StateId(*cfg.start));
  } else {
    for (std::size_t i = 0; i < model.num_states(); ++i) starts.emplace_back(i);
  }
  std::string csv = "start_id,n,distance\n";
  json rows = json::array();
  double worst = 0.0;
  for (auto x : starts) {
    const auto trace = stability_trace(model, dirac(x), cfg.horizon);
    for (const auto& p : trace) {
      csv += std::to_string(x.value) + ',' + std::to_string(p.n) + ',' + format_number(p.distance) + '\n';
      rows.push_back({{"start_id", x.value}, {"n", p.n}, {"distance", p.distance}});
    }
    worst = std::max(worst, trace.back().distance);
  }
  emit(cfg.format == "json" ? json_text(rows) : csv, cfg.out, out);
  const Verdict v = worst <= cfg.tol ? Verdict{VerdictKind::holds_at_horizon, 0.0} : Verdict{VerdictKind::inconclusive, 0.0};
  err << "max distance at n=" << cfg.horizon << ": " << format_number(worst) << "  verdict: " << v.to_string() << '\n';
  return kExitOk;
}

void add_source_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.source.path, "model JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--example", cfg.source.example, "built-in model")->check(CLI::IsMember(kExamples));
  cmd->add_option("--m-max", cfg.source.m_max, "example1 truncation");
  cmd->add_option("--primes", cfg.source.primes, "example2 primes")->delimiter(',');
  cmd->add_option("--depth", cfg.source.depth, "halfmap depth");
}

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--f", cfg.observable, "observable: built-in name or JSON file");
  cmd->add_option("--out", cfg.out, "output file");
  cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--horizon", cfg.horizon, "last iterate");
  cmd->add_option("--tail-start", cfg.tail_start, "first iterate of the tail window");
  cmd->add_option("--tol", cfg.tol, "verdict tolerance");
}

}  // namespace

void ModelSource::validate() const {
  if (example.empty() == path.empty()) throw ArgumentError("give exactly one of --model and --example");
}

MetricModel ModelSource::load() const {
  validate();
  if (!path.empty()) return load_model_file(path);
  if (example == "example1") return build_example1(m_max);
  if (example == "example2") return build_example2(primes);
  if (example == "doeblin3") return build_doeblin3();
  if (example == "halfmap") return build_halfmap(depth);
  throw ArgumentError("unknown example \"" + example + "\"");
}

void RunConfig::validate() const {
  if (horizon < 1) throw ArgumentError("--horizon must be at least 1");
  if (tail_start < 1 || tail_start > horizon) throw ArgumentError("--tail-start must lie in [1, horizon]");
  if (!(tol > 0.0)) throw ArgumentError("--tol must be positive");
  if (!(eps > 0.0)) throw ArgumentError("--eps must be positive");
  if (radius < 0.0) throw ArgumentError("--radius must be positive");
  if (command != "run-example") source.validate();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equicontinuity diagnostics for Markov operators on finite metric models", "markovlab"};
  app.require_subcommand(1);
  RunConfig cfg;
  DecomposeOptions dopt;

  auto* run = app.add_subcommand("run-example", "canonical diagnostics for a built-in model");
  run->add_option("name", cfg.source.example, "example name")->required()->check(CLI::IsMember(kExamples));
  run->add_option("--out", cfg.out, "directory for report files");
  run->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--m-max", cfg.source.m_max, "example1 truncation");
  run->add_option("--primes", cfg.source.primes, "example2 primes")->delimiter(',');
  run->add_option("--depth", cfg.source.depth, "halfmap depth");

  auto* diag = app.add_subcommand("diagnose", "run one diagnostic profile");
  add_source_options(diag, cfg);
  add_common_options(diag, cfg);
  diag->add_option("--profile", cfg.profile, "diagnostic profile")
      ->required()
      ->check(CLI::IsMember({"eproperty", "cesaro", "stability", "liminf-ball", "lemma-ball"}));
  diag->add_option("--z", cfg.target, "target state id");
  diag->add_option("--start", cfg.start, "initial state id");
  diag->add_option("--probes", cfg.probes, "probe state ids, farthest first")->delimiter(',');
  diag->add_option("--radius", cfg.radius, "ball radius");
  diag->add_option("--eps", cfg.eps, "oscillation target for lemma-ball");

  auto* dec = app.add_subcommand("decompose", "build and verify the ball-conditioned decomposition");
  add_source_options(dec, cfg);
  add_common_options(dec, cfg);
  dec->add_option("--start", cfg.start, "x0 state id (default 0)");
  dec->add_option("--z", cfg.target, "ball center (default x0)");
  dec->add_option("--radius", cfg.radius, "ball radius (default: smallest midpoint ball)");
  dec->add_option("--alpha", dopt.alpha, "mass share per level (default gamma/2)");
  dec->add_option("--k", dopt.levels, "number of levels (default from --epsilon)");
  dec->add_option("--epsilon", dopt.epsilon, "target for choosing k");
  dec->add_option("--search-horizon", dopt.search_horizon, "largest n_i tried");
  dec->add_option("--probes", cfg.probes, "probe state ids, farthest first")->delimiter(',');
  dec->add_option("--eps", cfg.eps, "oscillation target for the lemma ball");
  dec->add_flag("--exact", dopt.exact, "verify the identity in rational arithmetic");

  auto* stab = app.add_subcommand("check-stability", "distance of P^n delta_x to the invariant measure");
  add_source_options(stab, cfg);
  add_common_options(stab, cfg);
  stab->add_option("--start", cfg.start, "initial state id (default: every state)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.validate();
    if (cfg.command == "run-example") return cmd_run_example(cfg, out);
    if (cfg.command == "diagnose") return cmd_diagnose(cfg, out, err);
    if (cfg.command == "decompose") return cmd_decompose(cfg, dopt, out);
    return cmd_check_stability(cfg, out, err);
  } catch (const SearchHorizonError& e) {
    err << "error: " << e.what() << " (level reached: " << e.level() << ")\n";
    return kExitSearchHorizon;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace markovlab::cli
