#include "tsad/cli/cli.hpp"

#include "tsad/api/server.hpp"
#include "tsad/bench/datasets.hpp"
#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/feedback/feedback.hpp"
#include "tsad/metrics/segment.hpp"
#include "tsad/pipeline/model_io.hpp"
#include "tsad/store/recording.hpp"
#include "tsad/tuning/tuner.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

namespace tsad {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to `fallback` for "" or "-", otherwise to the named file.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path + " for writing", path);
  fn(file);
  if (!file) throw Error(ErrorCode::Io, "failed to write " + path, path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path, path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + " is not valid JSON: " + e.what(), path);
  }
}

// A hyperparameter file is either a flat {"step.param": value} object or the
// document `tune --out` writes, whose "assignment" member holds one.
Pipeline build_pipeline(const std::string& tmpl_name, const std::string& params_path, std::int64_t seed) {
  const TemplatePtr tmpl = load_template_file(resolve_template_path(tmpl_name));
  nlohmann::json partial = nlohmann::json::object();
  if (!params_path.empty()) {
    partial = read_json_file(params_path);
    if (partial.contains("assignment")) partial = partial["assignment"];
  }
  return instantiate(tmpl, partial).with_seed(seed);
}

std::string config_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Fill options the command line left unset from the JSON config: first the
// subcommand's own object, then top-level keys. Keys use the long flag name
// with either '-' or '_'.
void merge_config(CLI::App& sub, const nlohmann::json& config) {
  if (!config.is_object()) throw UsageError("--config must hold a JSON object");
  const nlohmann::json* scoped = nullptr;
  if (auto it = config.find(sub.get_name()); it != config.end() && it->is_object()) scoped = &*it;

  for (CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->count() > 0 || name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    std::string alt = name;
    std::replace(alt.begin(), alt.end(), '-', '_');
    const nlohmann::json* value = nullptr;
    for (const nlohmann::json* scope : {scoped, &config}) {
      if (scope == nullptr) continue;
      if (auto it = scope->find(name); it != scope->end()) value = &*it;
      else if (auto it2 = scope->find(alt); it2 != scope->end()) value = &*it2;
      if (value != nullptr) break;
    }
    if (value == nullptr) continue;
    if (value->is_array()) {
      for (const auto& item : *value) opt->add_result(config_text(item));
    } else {
      opt->add_result(config_text(*value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError("config key " + name + ": " + e.what());
    }
  }
}

void need(const CLI::App& sub, const std::string& flag, bool present) {
  if (!present) throw UsageError(sub.get_name() + ": " + flag + " is required");
}

struct Common {
  std::int64_t seed = 0;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  sub->add_option("--config", c.config, "JSON file of flag values; explicit flags win");
}

// ---- fit / detect ---------------------------------------------------------

struct FitArgs {
  Common common;
  std::string tmpl, params, signal, labels, save, out;
};

struct DetectArgs {
  Common common;
  std::string tmpl, params, load, train, signal, labels, out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Pipeline p = build_pipeline(a.tmpl, a.params, a.common.seed);
  const Signal signal = load_signal_csv(a.signal);
  std::optional<EventList> labels;
  if (!a.labels.empty()) labels = load_events_csv(a.labels);
  FitOptions options;
  options.labels = labels ? &*labels : nullptr;
  const FittedPipeline fitted = fit(p, signal, options);
  save_model(std::filesystem::path(a.save), fitted);
  if (!a.out.empty()) with_output(a.out, out, [&](std::ostream& os) { write_events_csv(os, fitted.fit_events); });
  return kExitOk;
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  FittedPipeline fitted;
  if (!a.load.empty()) {
    fitted = load_model(std::filesystem::path(a.load));
  } else {
    const Pipeline p = build_pipeline(a.tmpl, a.params, a.common.seed);
    const Signal train = load_signal_csv(a.train.empty() ? a.signal : a.train);
    std::optional<EventList> labels;
    if (!a.labels.empty()) labels = load_events_csv(a.labels);
    FitOptions options;
    options.labels = labels ? &*labels : nullptr;
    fitted = fit(p, train, options);
  }
  const EventList events = detect(fitted, load_signal_csv(a.signal));
  with_output(a.out, out, [&](std::ostream& os) { write_events_csv(os, events); });
  return kExitOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvalArgs {
  std::string truth, pred, method = "overlapping", signal;
  std::optional<Timestamp> t0, t1;
};

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
  const EventList truth = load_events_csv(a.truth);
  const EventList pred = load_events_csv(a.pred);
  ConfusionWeights c;
  if (a.method == "overlapping") {
    c = overlapping_segment(truth, pred);
  } else if (a.method == "weighted") {
    // Precision, recall and F1 ignore tn, so any span covering both lists
    // gives the same line; the event hull is the default.
    std::optional<Timestamp> t0 = a.t0, t1 = a.t1;
    if (!a.signal.empty()) {
      const Signal s = load_signal_csv(a.signal);
      if (!t0) t0 = s.start();
      if (!t1) t1 = s.end();
    }
    for (const EventList* list : {&truth, &pred}) {
      for (const auto& e : *list) {
        if (!a.t0 && a.signal.empty()) t0 = std::min(t0.value_or(e.t_s), e.t_s);
        if (!a.t1 && a.signal.empty()) t1 = std::max(t1.value_or(e.t_e), e.t_e);
      }
    }
    if (!t0 || !t1) throw Error(ErrorCode::InvalidArgument, "weighted evaluation needs a span: pass --t0/--t1 or --signal");
    c = weighted_segment(truth, pred, *t0, *t1);
  } else {
    throw UsageError("evaluate: --method must be overlapping or weighted");
  }
  const Scores s = score_from_confusion(c);
  out << format_double(s.precision) << ',' << format_double(s.recall) << ',' << format_double(s.f1) << '\n';
  return kExitOk;
}

// ---- benchmark ------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::vector<std::string> templates, data;
  std::string nab, out, store, experiment = "benchmark";
  std::size_t parallel = 1;
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<NamedPipeline> pipelines;
  for (const auto& name : a.templates) {
    const TemplatePtr tmpl = load_template_file(resolve_template_path(name));
    pipelines.push_back({tmpl->name(), instantiate(tmpl)});
  }
  std::vector<Dataset> datasets;
  for (const auto& dir : a.data) datasets.push_back(load_dataset_dir(dir));
  if (!a.nab.empty()) {
    for (auto& d : load_nab(a.nab)) datasets.push_back(std::move(d));
  }
  BenchmarkOptions options;
  options.seed = static_cast<std::uint64_t>(a.common.seed);
  options.parallel = std::max<std::size_t>(1, a.parallel);

  std::unique_ptr<Store> store;
  std::optional<BenchmarkRecording> recording;
  if (!a.store.empty()) {
    store = Store::open(a.store);
    recording = register_benchmark(*store, pipelines, datasets, a.experiment);
    options.on_cell = benchmark_sink(*store, *recording);
  }
  const auto rows = run_benchmark(pipelines, datasets, options);
  if (store) finish_benchmark(*store, *recording);

  with_output(a.out, out, [&](std::ostream& os) { write_report_csv(os, rows); });
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.status != "ok"; });
  if (failed > 0) err << failed << " of " << rows.size() << " cells failed; see the status column\n";
  return kExitOk;
}

// ---- tune -----------------------------------------------------------------

struct TuneArgs {
  Common common;
  std::string tmpl, signal, truth, objective = "unsupervised_mse", scope = "full", out, log;
  std::size_t budget = 20;
};

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  const TemplatePtr tmpl = load_template_file(resolve_template_path(a.tmpl));
  const Signal signal = load_signal_csv(a.signal);
  std::optional<EventList> truth;
  if (!a.truth.empty()) truth = load_events_csv(a.truth);
  Objective objective;
  objective.kind = parse_objective_kind(a.objective);
  objective.signal = &signal;
  objective.truth = truth ? &*truth : nullptr;
  SpaceScope scope;
  if (a.scope == "full") scope = SpaceScope::full;
  else if (a.scope == "unsupervised") scope = SpaceScope::unsupervised_subpipeline;
  else throw UsageError("tune: --scope must be full or unsupervised");

  const TuneResult r = tune(tmpl, objective, a.budget, scope, static_cast<std::uint64_t>(a.common.seed));
  if (!a.log.empty()) with_output(a.log, out, [&](std::ostream& os) { os << r.log_jsonl; });
  const nlohmann::json best{{"template", tmpl->name()},
                            {"objective", std::string(to_string(objective.kind))},
                            {"score", r.best_score},
                            {"assignment", r.best.assignment_json()}};
  with_output(a.out, out, [&](std::ostream& os) { os << best.dump(2) << '\n'; });
  return kExitOk;
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
  Common common;
  ApiConfig api;
  std::string static_dir, token;
};

int cmd_serve(ServeArgs a, std::ostream& err) {
  if (!a.static_dir.empty()) a.api.static_dir = a.static_dir;
  if (!a.token.empty()) a.api.auth_token = a.token;
  a.api.seed = a.common.seed;
  ApiServer server(a.api);
  const int port = server.bind();
  err << "listening on http://" << a.api.host << ':' << port << std::endl;
  server.run();
  return kExitOk;
}

// ---- simulate-feedback ----------------------------------------------------

struct FeedbackArgs {
  Common common;
  FeedbackConfig config;
  std::string tmpl = "ar_dynamic_threshold", train, truth_train, test, truth_test, out, summary;
};

int cmd_feedback(FeedbackArgs a, std::ostream& out) {
  const Pipeline unsupervised = build_pipeline(a.tmpl, "", a.common.seed);
  a.config.seed = a.common.seed;
  a.config.classifier.seed = static_cast<std::uint64_t>(a.common.seed);
  const std::size_t given = !a.train.empty() + !a.truth_train.empty() + !a.test.empty() + !a.truth_test.empty();
  std::optional<FeedbackSuite> suite;
  if (given == 0) {
    suite = make_feedback_suite(static_cast<std::uint64_t>(a.common.seed));
  } else if (given == 4) {
    suite = FeedbackSuite{load_signal_csv(a.train), load_events_csv(a.truth_train), load_signal_csv(a.test),
                          load_events_csv(a.truth_test)};
  } else {
    throw UsageError("simulate-feedback: pass all of --train, --truth-train, --test, --truth-test or none");
  }
  const FeedbackResult r =
      run_feedback_loop(suite->train, suite->truth_train, suite->test, suite->truth_test, unsupervised, a.config);
  with_output(a.out, out, [&](std::ostream& os) { write_trajectory(os, r.trajectory); });
  return kExitOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  Common common;
  SyntheticSpec spec;
  std::string base = "sine", kind = "spike", out, truth;
};

int cmd_synth(SynthArgs a, std::ostream& out) {
  a.spec.base = parse_base_process(a.base);
  a.spec.anomalies.kind = parse_anomaly_kind(a.kind);
  a.spec.seed = static_cast<std::uint64_t>(a.common.seed);
  const SyntheticSignal s = generate_synthetic(a.spec);
  with_output(a.out, out, [&](std::ostream& os) { write_signal_csv(os, s.signal); });
  if (!a.truth.empty()) with_output(a.truth, out, [&](std::ostream& os) { write_events_csv(os, s.truth, false); });
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-series anomaly detection: fit, detect, evaluate, benchmark, tune, serve.", "tsad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  FitArgs fit_a;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a pipeline on a signal and save the model");
  fit_cmd->add_option("--template", fit_a.tmpl, "Template file or bundled template name");
  fit_cmd->add_option("--params", fit_a.params, "JSON hyperparameters, flat or as written by tune --out");
  fit_cmd->add_option("--signal", fit_a.signal, "Training signal CSV");
  fit_cmd->add_option("--labels", fit_a.labels, "Ground-truth events CSV for supervised templates");
  fit_cmd->add_option("--save", fit_a.save, "Model file to write");
  fit_cmd->add_option("--out", fit_a.out, "Also write the events found on the training signal");
  add_common(fit_cmd, fit_a.common);

  DetectArgs det_a;
  auto* det_cmd = app.add_subcommand("detect", "Detect anomalous intervals; writes t_s,t_e,severity");
  det_cmd->add_option("--template", det_a.tmpl, "Template to fit before detecting");
  det_cmd->add_option("--load", det_a.load, "Saved model; skips fitting");
  det_cmd->add_option("--params", det_a.params, "JSON hyperparameters for --template");
  det_cmd->add_option("--train", det_a.train, "Signal to fit on (defaults to --signal)");
  det_cmd->add_option("--labels", det_a.labels, "Ground-truth events for supervised templates");
  det_cmd->add_option("--signal", det_a.signal, "Signal CSV to scan");
  det_cmd->add_option("--out", det_a.out, "Events CSV (default stdout)");
  add_common(det_cmd, det_a.common);

  EvalArgs ev_a;
  Common ev_common;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score detections against ground truth; prints precision,recall,f1");
  ev_cmd->add_option("--truth", ev_a.truth, "Ground-truth events CSV");
  ev_cmd->add_option("--pred", ev_a.pred, "Detected events CSV");
  ev_cmd->add_option("--method", ev_a.method, "overlapping or weighted")->capture_default_str();
  ev_cmd->add_option("--signal", ev_a.signal, "Signal whose span bounds the weighted evaluation");
  ev_cmd->add_option("--t0", ev_a.t0, "Start of the weighted evaluation span");
  ev_cmd->add_option("--t1", ev_a.t1, "End of the weighted evaluation span");
  add_common(ev_cmd, ev_common);

  BenchArgs b_a;
  auto* b_cmd = app.add_subcommand("benchmark", "Run every template on every signal; writes the report CSV");
  b_cmd->add_option("--templates", b_a.templates, "Comma-separated templates")->delimiter(',');
  b_cmd->add_option("--data", b_a.data, "Comma-separated dataset directories")->delimiter(',');
  b_cmd->add_option("--nab", b_a.nab, "Root of a NAB checkout to include");
  b_cmd->add_option("--out", b_a.out, "Report CSV (default stdout)");
  b_cmd->add_option("--parallel", b_a.parallel, "Cells evaluated concurrently")->capture_default_str();
  b_cmd->add_option("--store", b_a.store, "Record the run in this knowledge base");
  b_cmd->add_option("--experiment", b_a.experiment, "Experiment name for --store")->capture_default_str();
  add_common(b_cmd, b_a.common);

  TuneArgs t_a;
  auto* t_cmd = app.add_subcommand("tune", "Search a template's hyperparameters");
  t_cmd->add_option("--template", t_a.tmpl, "Template file or bundled name");
  t_cmd->add_option("--signal", t_a.signal, "Signal CSV");
  t_cmd->add_option("--truth", t_a.truth, "Ground truth, required for supervised_f1");
  t_cmd->add_option("--objective", t_a.objective, "unsupervised_mse, unsupervised_mae or supervised_f1")
      ->capture_default_str();
  t_cmd->add_option("--scope", t_a.scope, "full or unsupervised")->capture_default_str();
  t_cmd->add_option("--budget", t_a.budget, "Number of trials")->capture_default_str();
  t_cmd->add_option("--out", t_a.out, "Best pipeline JSON (default stdout)");
  t_cmd->add_option("--log", t_a.log, "Trial log, one JSON object per line");
  add_common(t_cmd, t_a.common);

  ServeArgs s_a;
  auto* s_cmd = app.add_subcommand("serve", "Serve the HTTP API over a knowledge base");
  s_cmd->add_option("--host", s_a.api.host, "Listen address")->capture_default_str();
  s_cmd->add_option("--port", s_a.api.port, "Listen port, 0 for any")->capture_default_str();
  s_cmd->add_option("--store", s_a.api.store_path, "Knowledge base directory");
  s_cmd->add_option("--static", s_a.static_dir, "Directory served under /ui/");
  s_cmd->add_option("--token", s_a.token, "Require Authorization: Bearer <token>");
  s_cmd->add_option("--max-points", s_a.api.max_points, "Point cap of /signals/{id}/data")->capture_default_str();
  s_cmd->add_option("--window-size", s_a.api.window_size, "Retraining window length")->capture_default_str();
  s_cmd->add_option("--step", s_a.api.step, "Retraining window step")->capture_default_str();
  add_common(s_cmd, s_a.common);

  FeedbackArgs f_a;
  auto* f_cmd = app.add_subcommand("simulate-feedback",
                                   "Replay the annotation loop; writes the F1 trajectory as JSON lines");
  f_cmd->add_option("--template", f_a.tmpl, "Unsupervised template")->capture_default_str();
  f_cmd->add_option("--k", f_a.config.k, "Annotations per iteration")->capture_default_str();
  f_cmd->add_option("--max-iters", f_a.config.max_iters, "Iteration cap")->capture_default_str();
  f_cmd->add_option("--window-size", f_a.config.window_size, "Classifier window length")->capture_default_str();
  f_cmd->add_option("--step", f_a.config.step, "Training window step")->capture_default_str();
  f_cmd->add_option("--merge", f_a.config.merge, "Merge gap for classifier events")->capture_default_str();
  f_cmd->add_option("--context", f_a.config.context, "Normal samples seen around each event")->capture_default_str();
  f_cmd->add_option("--train", f_a.train, "Training signal (default: synthetic suite of --seed)");
  f_cmd->add_option("--truth-train", f_a.truth_train, "Training ground truth");
  f_cmd->add_option("--test", f_a.test, "Test signal");
  f_cmd->add_option("--truth-test", f_a.truth_test, "Test ground truth");
  f_cmd->add_option("--out", f_a.out, "Trajectory JSONL (default stdout)");
  add_common(f_cmd, f_a.common);

  SynthArgs y_a;
  auto* y_cmd = app.add_subcommand("synth", "Generate a labelled synthetic signal");
  y_cmd->add_option("--n", y_a.spec.n, "Samples")->capture_default_str();
  y_cmd->add_option("--m", y_a.spec.m, "Channels")->capture_default_str();
  y_cmd->add_option("--base", y_a.base, "sine, ar1 or flat")->capture_default_str();
  y_cmd->add_option("--noise-sd", y_a.spec.noise_sd, "Gaussian noise sd")->capture_default_str();
  y_cmd->add_option("--interval", y_a.spec.interval, "Seconds between samples")->capture_default_str();
  y_cmd->add_option("--start", y_a.spec.start, "First timestamp")->capture_default_str();
  y_cmd->add_option("--period", y_a.spec.period, "Samples per sine cycle")->capture_default_str();
  y_cmd->add_option("--anomalies", y_a.spec.anomalies.count, "Injected anomalies")->capture_default_str();
  y_cmd->add_option("--kind", y_a.kind, "spike, level_shift or dropout")->capture_default_str();
  y_cmd->add_option("--min-len", y_a.spec.anomalies.min_len, "Shortest anomaly")->capture_default_str();
  y_cmd->add_option("--max-len", y_a.spec.anomalies.max_len, "Longest anomaly")->capture_default_str();
  y_cmd->add_option("--magnitude", y_a.spec.anomalies.magnitude, "Anomaly size in noise sd")->capture_default_str();
  y_cmd->add_option("--out", y_a.out, "Signal CSV (default stdout)");
  y_cmd->add_option("--truth", y_a.truth, "Ground-truth events CSV");
  add_common(y_cmd, y_a.common);

  CLI::App* active = nullptr;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    active = app.get_subcommands().front();

    const std::map<CLI::App*, Common*> commons{{fit_cmd, &fit_a.common}, {det_cmd, &det_a.common},
                                               {ev_cmd, &ev_common},     {b_cmd, &b_a.common},
                                               {t_cmd, &t_a.common},     {s_cmd, &s_a.common},
                                               {f_cmd, &f_a.common},     {y_cmd, &y_a.common}};
    if (const Common* c = commons.at(active); !c->config.empty()) merge_config(*active, read_json_file(c->config));

    if (active == fit_cmd) {
      need(*active, "--template", !fit_a.tmpl.empty());
      need(*active, "--signal", !fit_a.signal.empty());
      need(*active, "--save", !fit_a.save.empty());
      return cmd_fit(fit_a, out);
    }
    if (active == det_cmd) {
      need(*active, "--signal", !det_a.signal.empty());
      if (det_a.tmpl.empty() == det_a.load.empty()) throw UsageError("detect: pass exactly one of --template or --load");
      if (!det_a.load.empty() && (!det_a.params.empty() || !det_a.train.empty() || !det_a.labels.empty())) {
        throw UsageError("detect: --params, --train and --labels only apply with --template");
      }
      return cmd_detect(det_a, out);
    }
    if (active == ev_cmd) {
      need(*active, "--truth", !ev_a.truth.empty());
      need(*active, "--pred", !ev_a.pred.empty());
      return cmd_evaluate(ev_a, out);
    }
    if (active == b_cmd) {
      need(*active, "--templates", !b_a.templates.empty());
      need(*active, "--data or --nab", !b_a.data.empty() || !b_a.nab.empty());
      return cmd_benchmark(b_a, out, err);
    }
    if (active == t_cmd) {
      need(*active, "--template", !t_a.tmpl.empty());
      need(*active, "--signal", !t_a.signal.empty());
      return cmd_tune(t_a, out);
    }
    if (active == s_cmd) {
      need(*active, "--store", !s_a.api.store_path.empty());
      return cmd_serve(s_a, err);
    }
    if (active == f_cmd) return cmd_feedback(f_a, out);
    return cmd_synth(y_a, out);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.front()->help());
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << (active ? active->help() : app.help());
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (!e.context().empty()) err << " [" << e.context() << ']';
    err << '\n';
    return kExitDomainError;
  }
}

}  // namespace tsad
