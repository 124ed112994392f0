#pragma once

#include "tsad/core/event.hpp"
#include "tsad/feedback/classifier.hpp"
#include "tsad/pipeline/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tsad {

enum class WindowLabel { normal = 0, anomalous = 1 };

/// An event plus the verdict the annotator gave it: confirmed, normal,
/// investigate or other:<text>. Only confirmed and normal produce labels.
struct AnnotatedEvent {
  Event event;
  std::string tag;
  std::string event_id;  // optional, copied into the windows it yields
};

struct LabeledWindow {
  Vector window;  // window_size * channels values, time-major
  WindowLabel label = WindowLabel::normal;
  std::string origin_event_id;
  std::size_t start = 0;  // first sample index in the signal
  Timestamp t_s = 0;      // timestamp of the first and last sample
  Timestamp t_e = 0;
};

/// Windows are laid out from the first sample of each confirmed or normal
/// event, every `step` samples, and kept while the last sample is still
/// inside the event. A window is dropped when it touches an `investigate`
/// event, crosses the boundary of any other annotated event, or sits inside
/// two events with conflicting labels. Missing values are filled with the
/// channel means. Output is ordered by start, then label.
std::vector<LabeledWindow> build_training_set(const Signal& signal, const std::vector<AnnotatedEvent>& annotated,
                                              std::size_t window_size, std::size_t step);

/// Throws SingleClassData unless both labels occur, InvalidArgument for an
/// empty set or mixed window widths.
ClassifierModel retrain_semisupervised(const std::vector<LabeledWindow>& labeled, std::size_t window_size,
                                       std::size_t channels, const ClassifierHyperparams& hp = {});

/// Score every window of the signal and merge windows with probability above
/// 0.5 (gap of at most `merge` windows) into events.
EventList classify_detect(const ClassifierModel& model, const Signal& signal, std::size_t step,
                          std::size_t merge);

// ---- batching ---------------------------------------------------------------

enum class RetrainTrigger { size_threshold, schedule };
std::string_view to_string(RetrainTrigger t) noexcept;

struct FeedbackBatch {
  std::vector<std::string> annotation_ids;
  std::size_t labeled_windows = 0;
  RetrainTrigger trigger = RetrainTrigger::size_threshold;
};

/// Pending annotations waiting for a retrain. Each id enters at most once
/// over the queue's lifetime.
class AnnotationBatcher {
 public:
  explicit AnnotationBatcher(std::size_t threshold = 4);

  /// False when the id was already offered.
  bool offer(const std::string& annotation_id);
  std::size_t pending() const noexcept { return pending_.size(); }
  bool ready() const noexcept { return pending_.size() >= threshold_; }

  /// Drains the pending ids: on size_threshold only when ready(), on an
  /// explicit schedule call whenever anything is pending.
  std::optional<FeedbackBatch> take(RetrainTrigger trigger);

 private:
  std::size_t threshold_;
  std::vector<std::string> pending_;
  std::set<std::string> seen_;
};

// ---- simulated annotator ----------------------------------------------------

enum class AnnotatorVerdict { confirmed, normal, add };
std::string_view to_string(AnnotatorVerdict v) noexcept;

struct AnnotatorStep {
  Event event;
  AnnotatorVerdict verdict = AnnotatorVerdict::confirmed;
};

class AnnotatorState {
 public:
  bool initialized() const noexcept { return initialized_; }
  std::size_t consumed() const noexcept { return next_; }
  std::size_t remaining() const noexcept { return queue_.size() - next_; }

 private:
  friend std::vector<AnnotatorStep> simulate_annotator(const EventList&, const EventList&, std::size_t,
                                                      AnnotatorState&);
  bool initialized_ = false;
  std::vector<AnnotatorStep> queue_;
  std::size_t next_ = 0;
};

/// The first call builds the queue: detected events by descending severity
/// (ties by start), then truth events that overlap no detection, in time
/// order. Each call hands out the next `k` items. A detection overlapping
/// truth is confirmed, any other detection is marked normal, and a missed
/// truth event is added. Throws InvalidArgument when k is 0.
std::vector<AnnotatorStep> simulate_annotator(const EventList& truth, const EventList& detected, std::size_t k,
                                              AnnotatorState& state);

// ---- evaluation loop ----------------------------------------------------------

struct FeedbackConfig {
  std::size_t k = 2;
  std::size_t max_iters = 1000;
  std::size_t window_size = 3;
  std::size_t step = 1;
  std::size_t merge = 8;
  // Samples on each side of a reviewed event that the annotator also sees and
  // marks normal where no truth event lies. 0 keeps only the event verdicts.
  std::size_t context = 50;
  ClassifierHyperparams classifier;
  std::int64_t seed = 0;  // unsupervised pipeline and classifier
};

struct TrajectoryPoint {
  std::size_t iter = 0;
  std::size_t n_annotations = 0;
  double f1_semi = 0.0;
  double f1_unsup = 0.0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct FeedbackResult {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<AnnotatorStep> annotations;  // in the order they were made
  EventList detected_train;                // unsupervised detections the queue was built from
  std::optional<ClassifierModel> model;    // last successfully trained classifier
};

/// Iteration 0 fits the unsupervised pipeline on the training signal and
/// scores it on the test signal. Every later iteration takes k annotations,
/// retrains the classifier on all labels so far and scores both detectors on
/// the test signal with the overlapping-segment F1. While the labels hold
/// only one class the classifier reports F1 0. Stops when the annotator has
/// nothing left or after `max_iters` iterations.
FeedbackResult run_feedback_loop(const Signal& signal_train, const EventList& truth_train,
                                 const Signal& signal_test, const EventList& truth_test,
                                 const Pipeline& unsupervised, const FeedbackConfig& config);

/// Train and test signals for the feedback evaluation: sine base with
/// 4 * noise_sd spikes, 20 events in 5000 training samples and 8 in the 2000
/// test samples that follow them. Each seed gives a different layout.
struct FeedbackSuite {
  Signal train;
  EventList truth_train;
  Signal test;
  EventList truth_test;
};
FeedbackSuite make_feedback_suite(std::uint64_t seed);

nlohmann::json to_json(const TrajectoryPoint& p);
void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory);

/// Overlapping-segment F1: 0 when exactly one side is empty, 1 when both are.
double overlap_f1(const EventList& truth, const EventList& predicted);

}  // namespace tsad
