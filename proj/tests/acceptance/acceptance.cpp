// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any line fails.

#include "oracles.hpp"
#include "store_harness.hpp"

#include "tsad/bench/benchmark.hpp"
#include "tsad/bench/datasets.hpp"
#include "tsad/cli/cli.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/feedback/feedback.hpp"
#include "tsad/metrics/segment.hpp"
#include "tsad/tuning/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace tsad;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

TemplatePtr bundled(const std::string& name) {
  return load_template_file(fs::path(TSAD_TEST_TEMPLATE_DIR) / (name + ".json"));
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Verdict metric_oracles() {
  std::mt19937_64 rng(2024);
  int weighted_bad = 0, overlapping_bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto in = oracle::random_instance(rng);
    if (!(weighted_segment(in.truth, in.pred, in.t0, in.t1) == oracle::per_second(in.truth, in.pred, in.t0, in.t1))) {
      ++weighted_bad;
    }
    if (!(overlapping_segment(in.truth, in.pred) == oracle::pairwise(in.truth, in.pred))) ++overlapping_bad;
  }
  return {weighted_bad == 0 && overlapping_bad == 0 ? Outcome::pass : Outcome::fail,
          "200 instances, weighted mismatches " + std::to_string(weighted_bad) + ", overlapping mismatches " +
              std::to_string(overlapping_bad)};
}

Verdict worked_example() {
  const EventList truth{make_event(10, 20)};
  const EventList pred{make_event(15, 30)};
  const auto w = weighted_segment(truth, pred, 0, 100);
  const auto o = overlapping_segment(truth, pred);
  const bool ok = w == ConfusionWeights{5, 10, 5, 80} && o == ConfusionWeights{1, 0, 0, 0};
  return {ok ? Outcome::pass : Outcome::fail,
          "weighted tp=" + fmt(w.tp, 0) + " fp=" + fmt(w.fp, 0) + " fn=" + fmt(w.fn, 0) + " tn=" + fmt(w.tn, 0) +
              ", overlapping tp=" + fmt(o.tp, 0) + " fp=" + fmt(o.fp, 0) + " fn=" + fmt(o.fn, 0)};
}

Verdict detection_recall() {
  const Pipeline p = instantiate(bundled("ar_dynamic_threshold")).with_seed(0);
  ConfusionWeights total;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticSpec spec;
    spec.n = 5000;
    spec.noise_sd = 0.05;
    spec.anomalies.count = 3;
    spec.anomalies.kind = AnomalyKind::spike;
    spec.anomalies.magnitude = 6.0;
    spec.seed = seed;
    const auto s = generate_synthetic(spec);
    const auto c = overlapping_segment(s.truth, detect(fit(p, s.signal), s.signal));
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  const Scores sc = score_from_confusion(total);
  const bool ok = sc.recall >= 0.8 && sc.precision >= 0.5;
  return {ok ? Outcome::pass : Outcome::fail, "20 signals, recall " + fmt(sc.recall) + " (>= 0.8), precision " +
                                                  fmt(sc.precision) + " (>= 0.5)"};
}

Verdict tuner() {
  SearchSpace space({{HyperparamKey{"x", "lambda"}, HyperparamSpec::float_range(0.0, 1.0, 0.5)}});
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TunerConfig config;
    config.budget = 30;
    config.seed = seed;
    const TuningSession s = tune_function(
        space, [](const Assignment& l) { return -std::pow(std::get<double>(l.begin()->second) - 0.3, 2); }, config);
    const double best = std::get<double>(s.trials()[*s.best_index()].lambda.begin()->second);
    hits += std::abs(best - 0.3) <= 0.05 ? 1 : 0;
  }

  const TemplatePtr ar = bundled("ar_dynamic_threshold");
  int never_worse = 0;
  double gain = 0.0;
  constexpr int kRuns = 5;
  for (int run = 0; run < kRuns; ++run) {
    SyntheticSpec spec;
    spec.n = 2000;
    spec.anomalies.count = 3;
    spec.anomalies.magnitude = 4.0;
    spec.seed = 300 + static_cast<std::uint64_t>(run);
    const auto data = generate_synthetic(spec);
    Objective objective{ObjectiveKind::supervised_f1, &data.signal, &data.truth};
    const double base = evaluate_objective(instantiate(ar), objective);
    const TuneResult r = tune(ar, objective, 10, SpaceScope::full, static_cast<std::uint64_t>(run));
    never_worse += r.best_score >= base ? 1 : 0;
    gain += r.best_score - base;
  }
  const bool ok = hits >= 95 && never_worse == kRuns;
  return {ok ? Outcome::pass : Outcome::fail,
          "quadratic hits " + std::to_string(hits) + "/100 (>= 95); supervised best >= default in " +
              std::to_string(never_worse) + "/" + std::to_string(kRuns) + " runs, mean F1 gain " + fmt(gain / kRuns)};
}

Verdict overhead() {
  const Pipeline p = instantiate(bundled("ar_dynamic_threshold")).with_seed(0);
  std::vector<double> pct;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticSpec spec;
    spec.n = 5000;
    spec.anomalies.count = 3;
    spec.seed = 500 + seed;
    pct.push_back(profile_overhead(p, generate_synthetic(spec).signal).pct_increase);
  }
  std::sort(pct.begin(), pct.end());
  const double median = (pct[9] + pct[10]) / 2.0;
  return {median <= 5.0 ? Outcome::pass : Outcome::fail,
          "median pct_increase " + fmt(median, 2) + "% over 20 signals (<= 5%), range " + fmt(pct.front(), 2) + ".." +
              fmt(pct.back(), 2) + "%"};
}

Verdict feedback_loop() {
  const Pipeline ar = instantiate(bundled("ar_dynamic_threshold"));
  FeedbackConfig config;
  config.k = 2;
  double semi = 0.0, unsup = 0.0;
  int wins = 0;
  bool conserved = true, reproducible = true;
  constexpr int kSeeds = 5;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto suite = make_feedback_suite(static_cast<std::uint64_t>(seed));
    config.seed = seed;
    config.classifier.seed = static_cast<std::uint64_t>(seed);
    const auto r = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, ar, config);
    const auto again = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, ar, config);
    reproducible = reproducible && r.trajectory == again.trajectory;

    // Every train detection and every missed truth event is reviewed once.
    std::size_t missed = 0;
    for (const Event& t : suite.truth_train) {
      missed += std::none_of(r.detected_train.begin(), r.detected_train.end(),
                             [&](const Event& d) { return overlaps(t, d); });
    }
    std::set<std::pair<Timestamp, Timestamp>> seen;
    for (const auto& a : r.annotations) seen.insert({a.event.t_s, a.event.t_e});
    conserved = conserved && r.annotations.size() == r.detected_train.size() + missed &&
                seen.size() == r.annotations.size() && r.trajectory.back().n_annotations == r.annotations.size();
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      conserved = conserved && r.trajectory[i].n_annotations == std::min(i * config.k, r.annotations.size());
    }
    semi += r.trajectory.back().f1_semi;
    unsup += r.trajectory.back().f1_unsup;
    wins += r.trajectory.back().f1_semi >= r.trajectory.back().f1_unsup ? 1 : 0;
  }
  semi /= kSeeds;
  unsup /= kSeeds;
  const bool ok = semi >= unsup && conserved && reproducible;
  return {ok ? Outcome::pass : Outcome::fail,
          "mean final F1 semi " + fmt(semi, 3) + " vs unsupervised " + fmt(unsup, 3) + " over seeds 0-4 (" +
              std::to_string(wins) + "/5 seeds individually), conservation " + (conserved ? "ok" : "broken") +
              ", reproducible " + (reproducible ? "yes" : "no")};
}

Verdict durability() {
  const auto sweep = harness::truncation_sweep();
  const auto ops = harness::random_operations(10000, 77);
  const bool ok = sweep.failures == 0 && ops.audit.ok() && ops.audit_after_reopen.ok() && ops.snapshot_survives_reopen;
  std::string detail = std::to_string(sweep.offsets) + " truncation offsets, " + std::to_string(sweep.failures) +
                       " failures; 10000 ops (" + std::to_string(ops.committed) + " committed, " +
                       std::to_string(ops.rejected) + " rejected), audit " + (ops.audit.ok() ? "ok" : "failed") +
                       ", after reopen " + (ops.audit_after_reopen.ok() && ops.snapshot_survives_reopen ? "ok" : "failed");
  if (!sweep.first_failure.empty()) detail += "; " + sweep.first_failure;
  return {ok ? Outcome::pass : Outcome::fail, detail};
}

// Report columns without train_s, latency_s and peak_mem_bytes.
std::string quality_columns(const std::string& report) {
  std::istringstream in(report);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i >= 9 && i <= 11) continue;
      out << cells[i] << ',';
    }
    out << '\n';
  }
  return out.str();
}

Verdict determinism() {
  const fs::path dir = harness::fresh_dir("determinism");
  Dataset d{"det", {}};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SyntheticSpec spec;
    spec.n = 1500;
    spec.anomalies.count = 3;
    spec.seed = 900 + seed;
    spec.name = "sig" + std::to_string(seed);
    auto s = generate_synthetic(spec);
    d.signals.push_back({std::move(s.signal), std::move(s.truth), ""});
  }
  save_dataset_dir(dir / "data", d);
  std::string reports[2];
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    std::ostringstream out, err;
    codes[i] = run_cli({"benchmark", "--templates",
                        "ar_dynamic_threshold,mlp_dynamic_threshold,dense_ae_reconstruction,window_classifier_supervised",
                        "--data", (dir / "data").string(), "--seed", "11"},
                       out, err);
    reports[i] = out.str();
  }
  fs::remove_all(dir);
  const std::string a = quality_columns(reports[0]);
  const bool ok = codes[0] == 0 && codes[1] == 0 && a == quality_columns(reports[1]) &&
                  std::count(a.begin(), a.end(), '\n') == 13;
  return {ok ? Outcome::pass : Outcome::fail,
          "two benchmark runs with --seed 11, 4 templates x 3 signals: quality columns " +
              std::string(a == quality_columns(reports[1]) ? "identical" : "differ")};
}

Verdict nab() {
  const char* root = std::getenv("NAB_ROOT");
  if (root == nullptr || !fs::exists(fs::path(root) / "labels" / "combined_windows.json")) {
    return {Outcome::skip, "NAB_ROOT not set or not a NAB checkout"};
  }
  std::size_t signals = 0, windows = 0;
  for (const auto& dataset : load_nab(root)) {
    signals += dataset.signals.size();
    for (const auto& s : dataset.signals) windows += s.truth.size();
  }
  const bool ok = signals == 45 && windows == 94;
  return {ok ? Outcome::pass : Outcome::fail,
          std::to_string(signals) + " signals (45), " + std::to_string(windows) + " windows (94)"};
}

struct Criterion {
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"metric-oracle-equivalence", 5, metric_oracles},
      {"worked-metric-example", 0, worked_example},
      {"detection-recall", 120, detection_recall},
      {"tuner", 60, tuner},
      {"orchestration-overhead", 120, overhead},
      {"feedback-loop", 180, feedback_loop},
      {"knowledge-base-durability", 60, durability},
      {"benchmark-determinism", 0, determinism},
      {"nab-adapter", 0, nab},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.name) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Outcome::fail, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt(secs, 2) + "s";
    if (c.budget_s > 0) {
      timing += " of " + fmt(c.budget_s, 0) + "s";
      if (v.outcome == Outcome::pass && secs >= c.budget_s) {
        v.outcome = Outcome::fail;
        v.detail += "; over the runtime budget";
      }
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
    failures += v.outcome == Outcome::fail;
    std::cout << tag << ' ' << c.name << ": " << v.detail << " [" << timing << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
