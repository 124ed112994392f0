#include "tsad/core/error.hpp"
#include "tsad/feedback/feedback.hpp"
#include "tsad/metrics/segment.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

using namespace tsad;

namespace {

Signal ramp_signal(std::size_t n, Timestamp spacing = 1) {
  std::vector<Timestamp> ts(n);
  Matrix v(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = static_cast<Timestamp>(i) * spacing;
    v(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  }
  return Signal("ramp", ts, v);
}

bool inside(const Event& inner, const Event& outer) { return outer.t_s <= inner.t_s && inner.t_e <= outer.t_e; }

// Reference labelling: scan every start and apply the rules directly.
std::map<std::size_t, WindowLabel> expected_windows(const Signal& s, const std::vector<AnnotatedEvent>& ann,
                                                    std::size_t w, std::size_t step) {
  const auto& ts = s.timestamps();
  std::map<std::size_t, WindowLabel> out;
  for (std::size_t start = 0; start + w <= ts.size(); ++start) {
    const Event win{ts[start], ts[start + w - 1]};
    bool anomalous = false;
    bool normal = false;
    for (const auto& a : ann) {
      if (a.tag != "confirmed" && a.tag != "normal") continue;
      std::size_t first = 0;
      while (first < ts.size() && ts[first] < a.event.t_s) ++first;
      if (start < first || (start - first) % step != 0 || !inside(win, a.event)) continue;
      (a.tag == "confirmed" ? anomalous : normal) = true;
    }
    if (anomalous == normal) continue;
    bool excluded = false;
    for (const auto& a : ann) {
      const bool labelled = a.tag == "confirmed" || a.tag == "normal";
      if (!labelled && a.tag != "investigate") continue;
      if (!overlaps(win, a.event)) continue;
      if (a.tag == "investigate" || !inside(win, a.event)) excluded = true;
      if (labelled && (a.tag == "confirmed") != anomalous) excluded = true;
    }
    if (!excluded) out[start] = anomalous ? WindowLabel::anomalous : WindowLabel::normal;
  }
  return out;
}

}  // namespace

TEST(TrainingSet, ConfirmedEventEnumeration) {
  const Signal s = ramp_signal(100);
  const auto windows = build_training_set(s, {{make_event(20, 49), "confirmed", "ev1"}}, 10, 5);
  ASSERT_EQ(windows.size(), 5u);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    EXPECT_EQ(windows[i].start, 20 + 5 * i);
    EXPECT_EQ(windows[i].label, WindowLabel::anomalous);
    EXPECT_EQ(windows[i].origin_event_id, "ev1");
    EXPECT_EQ(windows[i].window.size(), 10);
    EXPECT_DOUBLE_EQ(windows[i].window(0), static_cast<double>(20 + 5 * i));
  }
}

TEST(TrainingSet, InvestigateOnlyIsEmpty) {
  const Signal s = ramp_signal(100);
  EXPECT_TRUE(build_training_set(s, {{make_event(10, 40), "investigate", ""}, {make_event(60, 90), "investigate", ""}},
                                 5, 1)
                  .empty());
  EXPECT_TRUE(build_training_set(s, {{make_event(10, 40), "other:unsure", ""}}, 5, 1).empty());
}

TEST(TrainingSet, InvestigateOverlapExcludes) {
  const Signal s = ramp_signal(100);
  const auto windows =
      build_training_set(s, {{make_event(10, 40), "normal", ""}, {make_event(30, 35), "investigate", ""}}, 5, 1);
  for (const auto& w : windows) EXPECT_FALSE(overlaps({w.t_s, w.t_e}, make_event(30, 35)));
  EXPECT_FALSE(windows.empty());
}

TEST(TrainingSet, MatchesReferenceOnRandomLayouts) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> tags{"confirmed", "normal", "investigate", "other:x"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 40 + rng() % 80;
    std::vector<Timestamp> ts(n);
    Timestamp t = static_cast<Timestamp>(rng() % 10);
    for (auto& x : ts) {
      x = t;
      t += 1 + static_cast<Timestamp>(rng() % 3);
    }
    Matrix v = Matrix::Random(static_cast<Eigen::Index>(n), 2);
    const Signal s("r", ts, v);
    std::vector<AnnotatedEvent> ann;
    const int count = 1 + static_cast<int>(rng() % 6);
    for (int e = 0; e < count; ++e) {
      const Timestamp a = ts.front() + static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(t - ts.front()));
      const Timestamp b = a + 1 + static_cast<Timestamp>(rng() % 40);
      ann.push_back({make_event(a, b), tags[rng() % tags.size()], "e" + std::to_string(e)});
    }
    const std::size_t w = 1 + rng() % 6;
    const std::size_t step = 1 + rng() % 4;
    const auto got = build_training_set(s, ann, w, step);
    const auto want = expected_windows(s, ann, w, step);
    std::map<std::size_t, WindowLabel> got_map;
    for (const auto& lw : got) {
      EXPECT_TRUE(got_map.emplace(lw.start, lw.label).second) << "duplicate start";
      // Never across a boundary, never contradicting a containing event.
      const Event span{lw.t_s, lw.t_e};
      for (const auto& a : ann) {
        if (a.tag.rfind("other:", 0) == 0 || !overlaps(span, a.event)) continue;
        ASSERT_TRUE(inside(span, a.event)) << "trial " << trial;
        ASSERT_NE(a.tag, "investigate");
        EXPECT_EQ(lw.label, a.tag == "confirmed" ? WindowLabel::anomalous : WindowLabel::normal);
      }
      for (std::size_t k = 0; k < w; ++k) {
        EXPECT_EQ(lw.window(static_cast<Eigen::Index>(2 * k + 1)),
                  v(static_cast<Eigen::Index>(lw.start + k), 1));
      }
    }
    ASSERT_EQ(got_map, want) << "trial " << trial;
  }
}

TEST(TrainingSet, Deterministic) {
  const Signal s = ramp_signal(200);
  const std::vector<AnnotatedEvent> ann{{make_event(10, 60), "confirmed", ""}, {make_event(100, 180), "normal", ""}};
  const auto a = build_training_set(s, ann, 4, 3);
  const auto b = build_training_set(s, ann, 4, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].start, b[i].start);
    EXPECT_EQ(a[i].window, b[i].window);
  }
}

namespace {

// Flat noise with two blocks of high values.
struct Toy {
  Signal signal;
  EventList anomalies;
  std::vector<AnnotatedEvent> annotations;
};

Toy separable_toy() {
  const std::size_t n = 300;
  std::vector<Timestamp> ts(n);
  Matrix v(static_cast<Eigen::Index>(n), 1);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = static_cast<Timestamp>(i) * 60;
    const bool high = (i >= 50 && i < 80) || (i >= 180 && i < 210);
    v(static_cast<Eigen::Index>(i), 0) = (high ? 5.0 : 0.0) + noise(rng);
  }
  Toy toy{Signal("toy", ts, v), {}, {}};
  toy.anomalies = {make_event(50 * 60, 79 * 60), make_event(180 * 60, 209 * 60)};
  toy.annotations = {{toy.anomalies[0], "confirmed", ""},
                     {toy.anomalies[1], "confirmed", ""},
                     {make_event(0, 45 * 60), "normal", ""},
                     {make_event(90 * 60, 170 * 60), "normal", ""},
                     {make_event(220 * 60, 299 * 60), "normal", ""}};
  return toy;
}

}  // namespace

TEST(Retrain, SeparableToyIsLearnedExactly) {
  const Toy toy = separable_toy();
  const auto windows = build_training_set(toy.signal, toy.annotations, 5, 1);
  const ClassifierModel model = retrain_semisupervised(windows, 5, 1);
  Matrix x(static_cast<Eigen::Index>(windows.size()), 5);
  for (std::size_t i = 0; i < windows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = windows[i].window.transpose();
  const Vector p = predict_proba(model, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    correct += (p(static_cast<Eigen::Index>(i)) > 0.5) == (windows[i].label == WindowLabel::anomalous) ? 1 : 0;
  }
  EXPECT_EQ(correct, windows.size());

  const EventList detected = classify_detect(model, toy.signal, 1, 0);
  const Scores sc = score_from_confusion(
      weighted_segment(toy.anomalies, detected, toy.signal.start(), toy.signal.end()));
  EXPECT_GE(sc.recall, 0.9);
  for (const Event& e : detected) {
    EXPECT_GT(e.severity, 0.5);
    EXPECT_LE(e.severity, 1.0);
  }
}

TEST(Retrain, DeterministicPerSeed) {
  const Toy toy = separable_toy();
  const auto windows = build_training_set(toy.signal, toy.annotations, 4, 2);
  ClassifierHyperparams hp;
  hp.seed = 9;
  const ClassifierModel a = retrain_semisupervised(windows, 4, 1, hp);
  const ClassifierModel b = retrain_semisupervised(windows, 4, 1, hp);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  hp.seed = 10;
  EXPECT_NE(retrain_semisupervised(windows, 4, 1, hp).weights, a.weights);
}

TEST(Retrain, SingleClassIsRejected) {
  const Signal s = ramp_signal(100);
  const auto only_confirmed = build_training_set(s, {{make_event(10, 40), "confirmed", ""}}, 5, 1);
  try {
    retrain_semisupervised(only_confirmed, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClassData);
  }
  EXPECT_THROW(retrain_semisupervised({}, 5, 1), Error);
}

TEST(Retrain, ChannelMismatchOnDetect) {
  const Toy toy = separable_toy();
  const ClassifierModel model = retrain_semisupervised(build_training_set(toy.signal, toy.annotations, 3, 1), 3, 1);
  const Signal two("two", {0, 1, 2, 3, 4}, Matrix::Zero(5, 2));
  try {
    classify_detect(model, two, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Batcher, ThresholdAndSingleConsumption) {
  AnnotationBatcher batcher;
  EXPECT_TRUE(batcher.offer("a"));
  EXPECT_TRUE(batcher.offer("b"));
  EXPECT_FALSE(batcher.offer("a"));
  EXPECT_TRUE(batcher.offer("c"));
  EXPECT_FALSE(batcher.ready());
  EXPECT_FALSE(batcher.take(RetrainTrigger::size_threshold).has_value());
  EXPECT_TRUE(batcher.offer("d"));
  ASSERT_TRUE(batcher.ready());
  const auto batch = batcher.take(RetrainTrigger::size_threshold);
  ASSERT_TRUE(batch.has_value());
  EXPECT_EQ(batch->annotation_ids, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(batcher.pending(), 0u);
  EXPECT_FALSE(batcher.offer("c"));
  EXPECT_TRUE(batcher.offer("e"));
  const auto manual = batcher.take(RetrainTrigger::schedule);
  ASSERT_TRUE(manual.has_value());
  EXPECT_EQ(manual->annotation_ids, std::vector<std::string>{"e"});
  EXPECT_EQ(manual->trigger, RetrainTrigger::schedule);
  EXPECT_FALSE(batcher.take(RetrainTrigger::schedule).has_value());
  EXPECT_THROW(AnnotationBatcher(0), Error);
}

TEST(Annotator, RuleApplication) {
  AnnotatorState state;
  const EventList truth{make_event(10, 20)};
  const EventList detected{make_event(15, 30), make_event(50, 60)};
  const auto first = simulate_annotator(truth, detected, 2, state);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].event, make_event(15, 30));
  EXPECT_EQ(first[0].verdict, AnnotatorVerdict::confirmed);
  EXPECT_EQ(first[1].event, make_event(50, 60));
  EXPECT_EQ(first[1].verdict, AnnotatorVerdict::normal);
  EXPECT_TRUE(simulate_annotator(truth, detected, 2, state).empty());
}

TEST(Annotator, AddsMissedTruth) {
  AnnotatorState state;
  const EventList truth{make_event(10, 20), make_event(30, 40), make_event(50, 60)};
  const auto a = simulate_annotator(truth, {}, 2, state);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].verdict, AnnotatorVerdict::add);
  EXPECT_EQ(a[0].event.source, EventSource::manual);
  EXPECT_EQ(a[1].event.t_s, 30);
  const auto b = simulate_annotator(truth, {}, 2, state);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].event.t_s, 50);
  EXPECT_TRUE(simulate_annotator(truth, {}, 2, state).empty());
  AnnotatorState fresh;
  EXPECT_THROW(simulate_annotator(truth, {}, 0, fresh), Error);
}

TEST(Annotator, SeverityOrder) {
  AnnotatorState state;
  const EventList detected{make_event(0, 5, 0.2), make_event(10, 15, 0.9), make_event(20, 25, 0.9)};
  const auto out = simulate_annotator({}, detected, 10, state);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].event.t_s, 10);
  EXPECT_EQ(out[1].event.t_s, 20);
  EXPECT_EQ(out[2].event.t_s, 0);
}

TEST(Annotator, ConservationOnRandomLayouts) {
  std::mt19937_64 rng(5);
  auto draw = [&](int count) {
    EventList out;
    for (int i = 0; i < count; ++i) {
      const Timestamp a = static_cast<Timestamp>(rng() % 1000);
      out.push_back(make_event(a, a + 1 + static_cast<Timestamp>(rng() % 30), static_cast<double>(rng() % 5)));
    }
    sort_events(out);
    return out;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const EventList truth = draw(static_cast<int>(rng() % 10));
    const EventList detected = draw(static_cast<int>(rng() % 10));
    std::size_t missed = 0;
    for (const Event& t : truth) {
      bool hit = false;
      for (const Event& d : detected) hit = hit || (t.t_s <= d.t_e && d.t_s <= t.t_e);
      missed += hit ? 0 : 1;
    }
    const std::size_t k = 1 + rng() % 4;
    AnnotatorState state;
    std::vector<AnnotatorStep> all;
    std::size_t calls = 0;
    for (;;) {
      const auto batch = simulate_annotator(truth, detected, k, state);
      ASSERT_LE(batch.size(), k);
      if (batch.empty()) break;
      all.insert(all.end(), batch.begin(), batch.end());
      ++calls;
    }
    ASSERT_EQ(all.size(), detected.size() + missed) << "trial " << trial;
    EXPECT_EQ(calls, (all.size() + k - 1) / k);
    std::size_t adds = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].verdict == AnnotatorVerdict::add) {
        ++adds;
        EXPECT_GE(i, detected.size());
        continue;
      }
      bool hit = false;
      for (const Event& t : truth) hit = hit || overlaps(all[i].event, t);
      EXPECT_EQ(all[i].verdict, hit ? AnnotatorVerdict::confirmed : AnnotatorVerdict::normal);
      if (i > 0 && all[i - 1].verdict != AnnotatorVerdict::add) {
        EXPECT_GE(all[i - 1].event.severity, all[i].event.severity);
      }
    }
    EXPECT_EQ(adds, missed);
  }
}

namespace {

Pipeline ar_pipeline() {
  return instantiate(load_template_file(resolve_template_path("ar_dynamic_threshold")));
}

}  // namespace

TEST(FeedbackLoop, LargeKGivesTwoPoints) {
  const FeedbackSuite suite = make_feedback_suite(0);
  FeedbackConfig cfg;
  cfg.k = 1000;
  const auto r = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, ar_pipeline(), cfg);
  ASSERT_EQ(r.trajectory.size(), 2u);
  EXPECT_EQ(r.trajectory[0].iter, 0u);
  EXPECT_EQ(r.trajectory[0].n_annotations, 0u);
  EXPECT_EQ(r.trajectory[1].n_annotations, r.annotations.size());
}

TEST(FeedbackLoop, TrajectoryShapeAndReproducibility) {
  const FeedbackSuite suite = make_feedback_suite(1);
  FeedbackConfig cfg;
  cfg.seed = 4;
  const Pipeline p = ar_pipeline();
  const auto a = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, p, cfg);
  const auto b = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, p, cfg);
  ASSERT_GE(a.trajectory.size(), 2u);
  EXPECT_EQ(a.trajectory, b.trajectory);
  ASSERT_TRUE(a.model.has_value());
  EXPECT_EQ(a.model->weights, b.model->weights);

  std::size_t missed = 0;
  for (const Event& t : suite.truth_train) {
    bool hit = false;
    for (const Event& d : a.detected_train) hit = hit || overlaps(t, d);
    missed += hit ? 0 : 1;
  }
  EXPECT_EQ(a.annotations.size(), a.detected_train.size() + missed);
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    const auto& pt = a.trajectory[i];
    EXPECT_EQ(pt.iter, i);
    EXPECT_EQ(pt.f1_unsup, a.trajectory[0].f1_unsup);
    EXPECT_EQ(pt.n_annotations, std::min(i * cfg.k, a.annotations.size()));
    EXPECT_GE(pt.f1_semi, 0.0);
    EXPECT_LE(pt.f1_semi, 1.0);
  }

  std::ostringstream out;
  write_trajectory(out, a.trajectory);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.size(), 4u);
    EXPECT_EQ(j.at("iter").get<std::size_t>(), lines);
    EXPECT_TRUE(j.contains("n_annotations") && j.contains("f1_semi") && j.contains("f1_unsup"));
    ++lines;
  }
  EXPECT_EQ(lines, a.trajectory.size());
}

TEST(FeedbackLoop, MaxItersStopsEarly) {
  const FeedbackSuite suite = make_feedback_suite(2);
  FeedbackConfig cfg;
  cfg.max_iters = 2;
  const auto r = run_feedback_loop(suite.train, suite.truth_train, suite.test, suite.truth_test, ar_pipeline(), cfg);
  EXPECT_EQ(r.trajectory.size(), 3u);
  EXPECT_EQ(r.annotations.size(), 4u);
}

TEST(FeedbackLoop, OverlapF1EdgeCases) {
  EXPECT_EQ(overlap_f1({}, {}), 1.0);
  EXPECT_EQ(overlap_f1({make_event(0, 5)}, {}), 0.0);
  EXPECT_EQ(overlap_f1({}, {make_event(0, 5)}), 0.0);
  EXPECT_DOUBLE_EQ(overlap_f1({make_event(0, 5), make_event(10, 15)}, {make_event(3, 4)}), 2.0 / 3.0);
}
