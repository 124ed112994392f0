#include "tsad/feedback/feedback.hpp"

#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/metrics/segment.hpp"
#include "tsad/primitives/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace tsad {

namespace {

enum class Verdict { anomalous, normal, investigate, ignored };

Verdict classify_tag(const std::string& tag) {
  if (tag == "confirmed") return Verdict::anomalous;
  if (tag == "normal") return Verdict::normal;
  if (tag == "investigate") return Verdict::investigate;
  return Verdict::ignored;
}

Matrix filled_values(const Signal& signal) {
  return signal.values().allFinite() ? signal.values() : impute_mean(signal.values());
}

// The stretches of `context` samples on either side of a reviewed event,
// cut back so that they touch no truth event.
EventList normal_context(const Signal& signal, const EventList& truth, const Event& reviewed, std::size_t context) {
  EventList out;
  if (context == 0) return out;
  const auto& ts = signal.timestamps();
  const std::size_t first = lower_index(ts, reviewed.t_s);
  std::size_t last = lower_index(ts, reviewed.t_e + 1);
  if (first == 0 && last == 0) return out;
  auto clear_of_truth = [&](std::size_t i) {
    const Event point{ts[i], ts[i]};
    return std::none_of(truth.begin(), truth.end(), [&](const Event& t) { return overlaps(point, t); });
  };
  // Left flank grows backwards from the sample before the event.
  std::size_t lo = first;
  while (lo > 0 && first - lo < context && clear_of_truth(lo - 1)) --lo;
  if (lo + 1 < first) out.push_back(make_event(ts[lo], ts[first - 1]));
  std::size_t hi = last;
  while (hi < ts.size() && hi - last < context && clear_of_truth(hi)) ++hi;
  if (hi > last + 1) out.push_back(make_event(ts[last], ts[hi - 1]));
  return out;
}

}  // namespace

std::vector<LabeledWindow> build_training_set(const Signal& signal, const std::vector<AnnotatedEvent>& annotated,
                                              std::size_t window_size, std::size_t step) {
  if (window_size == 0 || step == 0) throw Error(ErrorCode::InvalidArgument, "window size and step must be >= 1");
  const auto& ts = signal.timestamps();
  const std::size_t n = ts.size();
  const std::size_t m = signal.channels();

  std::vector<Verdict> verdicts;
  verdicts.reserve(annotated.size());
  for (const auto& a : annotated) verdicts.push_back(classify_tag(a.tag));

  // start index -> (label, origin) for every candidate; conflicts poison the start.
  struct Candidate {
    WindowLabel label;
    std::string origin;
    bool conflict = false;
  };
  std::map<std::size_t, Candidate> candidates;
  for (std::size_t e = 0; e < annotated.size(); ++e) {
    if (verdicts[e] != Verdict::anomalous && verdicts[e] != Verdict::normal) continue;
    const Event& ev = annotated[e].event;
    const WindowLabel label = verdicts[e] == Verdict::anomalous ? WindowLabel::anomalous : WindowLabel::normal;
    for (std::size_t i = lower_index(ts, ev.t_s); i + window_size <= n && ts[i + window_size - 1] <= ev.t_e;
         i += step) {
      auto [it, inserted] = candidates.try_emplace(i, Candidate{label, annotated[e].event_id});
      if (!inserted && it->second.label != label) it->second.conflict = true;
    }
  }

  const Matrix values = filled_values(signal);
  std::vector<LabeledWindow> out;
  for (const auto& [start, cand] : candidates) {
    if (cand.conflict) continue;
    const Event span{ts[start], ts[start + window_size - 1]};
    bool keep = true;
    for (std::size_t e = 0; e < annotated.size() && keep; ++e) {
      if (verdicts[e] == Verdict::ignored) continue;
      const Event& ev = annotated[e].event;
      if (!overlaps(span, ev)) continue;
      const bool inside = ev.t_s <= span.t_s && span.t_e <= ev.t_e;
      if (verdicts[e] == Verdict::investigate || !inside) keep = false;
      if ((verdicts[e] == Verdict::anomalous) != (cand.label == WindowLabel::anomalous)) keep = false;
    }
    if (!keep) continue;
    LabeledWindow w;
    w.window.resize(static_cast<Eigen::Index>(window_size * m));
    for (std::size_t k = 0; k < window_size; ++k) {
      for (std::size_t c = 0; c < m; ++c) {
        w.window(static_cast<Eigen::Index>(k * m + c)) =
            values(static_cast<Eigen::Index>(start + k), static_cast<Eigen::Index>(c));
      }
    }
    w.label = cand.label;
    w.origin_event_id = cand.origin;
    w.start = start;
    w.t_s = span.t_s;
    w.t_e = span.t_e;
    out.push_back(std::move(w));
  }
  return out;
}

ClassifierModel retrain_semisupervised(const std::vector<LabeledWindow>& labeled, std::size_t window_size,
                                       std::size_t channels, const ClassifierHyperparams& hp) {
  if (labeled.empty()) throw Error(ErrorCode::SingleClassData, "no labeled windows");
  const auto width = static_cast<Eigen::Index>(window_size * channels);
  Matrix x(static_cast<Eigen::Index>(labeled.size()), width);
  std::vector<int> y;
  y.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i].window.size() != width) {
      throw Error(ErrorCode::InvalidArgument, "labeled window has the wrong width", std::to_string(i));
    }
    x.row(static_cast<Eigen::Index>(i)) = labeled[i].window.transpose();
    y.push_back(labeled[i].label == WindowLabel::anomalous ? 1 : 0);
  }
  return train_classifier(x, y, window_size, channels, hp);
}

EventList classify_detect(const ClassifierModel& model, const Signal& signal, std::size_t step, std::size_t merge) {
  if (signal.channels() != model.channels) {
    throw Error(ErrorCode::ShapeMismatch, "signal has " + std::to_string(signal.channels()) +
                                              " channels, model expects " + std::to_string(model.channels));
  }
  const auto& ts = signal.timestamps();
  const Windows w = make_windows(filled_values(signal), ts, model.window_size, step, 0);
  const Vector p = predict_proba(model, w.windows);
  std::vector<Timestamp> start_ts;
  std::vector<Timestamp> end_ts;
  start_ts.reserve(w.starts.size());
  end_ts.reserve(w.starts.size());
  for (std::size_t s : w.starts) {
    start_ts.push_back(ts[s]);
    end_ts.push_back(ts[s + model.window_size - 1]);
  }
  return merge_marked_windows(p, start_ts, end_ts, merge, 0.5);
}

std::string_view to_string(RetrainTrigger t) noexcept {
  return t == RetrainTrigger::size_threshold ? "size_threshold" : "schedule";
}

AnnotationBatcher::AnnotationBatcher(std::size_t threshold) : threshold_(threshold) {
  if (threshold == 0) throw Error(ErrorCode::InvalidArgument, "batch threshold must be >= 1");
}

bool AnnotationBatcher::offer(const std::string& annotation_id) {
  if (!seen_.insert(annotation_id).second) return false;
  pending_.push_back(annotation_id);
  return true;
}

std::optional<FeedbackBatch> AnnotationBatcher::take(RetrainTrigger trigger) {
  if (pending_.empty()) return std::nullopt;
  if (trigger == RetrainTrigger::size_threshold && !ready()) return std::nullopt;
  FeedbackBatch batch;
  batch.annotation_ids = std::move(pending_);
  batch.trigger = trigger;
  pending_.clear();
  return batch;
}

std::string_view to_string(AnnotatorVerdict v) noexcept {
  switch (v) {
    case AnnotatorVerdict::confirmed:
      return "confirmed";
    case AnnotatorVerdict::normal:
      return "normal";
    case AnnotatorVerdict::add:
      return "add";
  }
  return "?";
}

std::vector<AnnotatorStep> simulate_annotator(const EventList& truth, const EventList& detected, std::size_t k,
                                              AnnotatorState& state) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "the annotator needs k >= 1");
  if (!state.initialized_) {
    auto hits_any = [](const Event& e, const EventList& others) {
      return std::any_of(others.begin(), others.end(), [&](const Event& o) { return overlaps(e, o); });
    };
    EventList ranked = detected;
    std::stable_sort(ranked.begin(), ranked.end(), [](const Event& a, const Event& b) {
      if (a.severity != b.severity) return a.severity > b.severity;
      return a.t_s < b.t_s;
    });
    for (const Event& d : ranked) {
      state.queue_.push_back({d, hits_any(d, truth) ? AnnotatorVerdict::confirmed : AnnotatorVerdict::normal});
    }
    EventList missed;
    for (const Event& t : truth) {
      if (!hits_any(t, detected)) missed.push_back(t);
    }
    sort_events(missed);
    for (Event t : missed) {
      t.source = EventSource::manual;
      state.queue_.push_back({t, AnnotatorVerdict::add});
    }
    state.initialized_ = true;
  }
  const std::size_t take = std::min(k, state.queue_.size() - state.next_);
  std::vector<AnnotatorStep> out(state.queue_.begin() + static_cast<std::ptrdiff_t>(state.next_),
                                 state.queue_.begin() + static_cast<std::ptrdiff_t>(state.next_ + take));
  state.next_ += take;
  return out;
}

double overlap_f1(const EventList& truth, const EventList& predicted) {
  if (truth.empty() && predicted.empty()) return 1.0;
  if (truth.empty() || predicted.empty()) return 0.0;
  return score_from_confusion(overlapping_segment(truth, predicted)).f1;
}

FeedbackResult run_feedback_loop(const Signal& signal_train, const EventList& truth_train,
                                 const Signal& signal_test, const EventList& truth_test,
                                 const Pipeline& unsupervised, const FeedbackConfig& config) {
  if (config.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  FeedbackResult result;
  const FittedPipeline fitted = fit(unsupervised.with_seed(config.seed), signal_train);
  result.detected_train = detect(fitted, signal_train);
  const double f1_unsup = overlap_f1(truth_test, detect(fitted, signal_test));
  result.trajectory.push_back({0, 0, 0.0, f1_unsup});

  ClassifierHyperparams hp = config.classifier;
  hp.seed = static_cast<std::uint64_t>(config.seed);
  AnnotatorState state;
  std::vector<AnnotatedEvent> labels;
  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    const auto batch = simulate_annotator(truth_train, result.detected_train, config.k, state);
    if (batch.empty()) break;
    for (const AnnotatorStep& step : batch) {
      labels.push_back({step.event, step.verdict == AnnotatorVerdict::normal ? "normal" : "confirmed", {}});
      result.annotations.push_back(step);
      for (const Event& flank : normal_context(signal_train, truth_train, step.event, config.context)) {
        labels.push_back({flank, "normal", {}});
      }
    }
    const auto windows = build_training_set(signal_train, labels, config.window_size, config.step);
    double f1_semi = 0.0;
    try {
      result.model = retrain_semisupervised(windows, config.window_size, signal_train.channels(), hp);
      f1_semi = overlap_f1(truth_test, classify_detect(*result.model, signal_test, config.step, config.merge));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClassData) throw;
    }
    result.trajectory.push_back({iter, result.annotations.size(), f1_semi, f1_unsup});
  }
  return result;
}

FeedbackSuite make_feedback_suite(std::uint64_t seed) {
  SyntheticSpec train;
  train.n = 5000;
  train.anomalies.count = 20;
  train.anomalies.magnitude = 4.0;
  train.seed = seed * 2 + 1;
  train.name = "feedback_train";
  SyntheticSpec test = train;
  test.n = 2000;
  test.anomalies.count = 8;
  test.seed = seed * 2 + 2;
  test.start = train.start + train.interval * static_cast<Timestamp>(train.n);
  test.name = "feedback_test";
  SyntheticSignal a = generate_synthetic(train);
  SyntheticSignal b = generate_synthetic(test);
  return {std::move(a.signal), std::move(a.truth), std::move(b.signal), std::move(b.truth)};
}

nlohmann::json to_json(const TrajectoryPoint& p) {
  return {{"iter", p.iter}, {"n_annotations", p.n_annotations}, {"f1_semi", p.f1_semi}, {"f1_unsup", p.f1_unsup}};
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory) {
  for (const auto& p : trajectory) out << to_json(p).dump() << '\n';
}

}  // namespace tsad
