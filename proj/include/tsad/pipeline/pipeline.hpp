#pragma once

#include "tsad/pipeline/template.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace tsad {

using Assignment = std::map<HyperparamKey, HyperparamValue>;

/// A template with a fixed hyperparameter setting. Every tunable of the
/// template has a value; `seed`, when set, overrides every primitive
/// parameter named "seed".
class Pipeline {
 public:
  const TemplatePtr& tmpl() const noexcept { return template_; }
  const Assignment& assignment() const noexcept { return assignment_; }
  std::optional<std::int64_t> seed() const noexcept { return seed_; }

  // Resolved parameters of step `index`.
  ParamSet params(std::size_t index) const;

  Pipeline with_seed(std::int64_t seed) const;

  nlohmann::json assignment_json() const;

  friend Pipeline instantiate(TemplatePtr tmpl, const Assignment& partial);

 private:
  TemplatePtr template_;
  Assignment assignment_;
  std::optional<std::int64_t> seed_;
};

/// Fill unspecified tunables with their template defaults.
/// Throws UnknownHyperparam or OutOfRange.
Pipeline instantiate(TemplatePtr tmpl, const Assignment& partial = {});

/// Same, from a JSON object {"<step>.<param>": value}.
Pipeline instantiate(TemplatePtr tmpl, const nlohmann::json& partial);

struct StepTiming {
  std::string step_id;
  double seconds = 0.0;
};

/// A pipeline whose modeling steps have all been fitted. Immutable and
/// shareable across threads.
struct FittedPipeline {
  Pipeline pipeline;
  std::vector<std::shared_ptr<const StepState>> states;  // indexed like template steps
  std::size_t channels = 0;
  Timestamp train_start = 0;
  Timestamp train_end = 0;
  std::vector<StepTiming> fit_timings;  // execution order
  EventList fit_events;                 // from the detect pass run during fit
  bool complete = false;                // false when fitting stopped before postprocessing
};

struct DetectRun {
  EventList events;
  std::vector<StepTiming> timings;
  DataContext context;
};

struct FitOptions {
  const EventList* labels = nullptr;  // raw `labels` slot for supervised templates
  // Stop after the last preprocessing/modeling step (unsupervised tuning).
  bool stop_before_postprocessing = false;
};

/// Execute every step in topological order, fitting stateful steps and
/// recording each step's wall-clock time. Step errors are rethrown with the
/// step id as context.
FittedPipeline fit(const Pipeline& pipeline, const Signal& signal, const FitOptions& options = {});

/// Fit and return the final data context as well.
FittedPipeline fit(const Pipeline& pipeline, const Signal& signal, const FitOptions& options,
                   DataContext& final_context);

/// Run the fitted pipeline without refitting. Throws ShapeMismatch when the
/// channel count differs from training.
EventList detect(const FittedPipeline& fitted, const Signal& signal);
DetectRun detect_run(const FittedPipeline& fitted, const Signal& signal);

/// Seed the raw slots of a context from a signal.
DataContext raw_context(const Signal& signal, const EventList* labels = nullptr);

}  // namespace tsad
