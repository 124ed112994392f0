#pragma once

#include "tsad/tuning/gp.hpp"
#include "tsad/tuning/space.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <random>
#include <string>

namespace tsad {

struct Trial {
  std::size_t index = 0;  // 1-based
  Point point;            // canonical encoding of lambda
  Assignment lambda;
  double score = 0.0;     // -inf marks a failed evaluation
  double duration_s = 0.0;
};

struct TunerConfig {
  std::size_t budget = 20;
  std::uint64_t seed = 0;
  // Proposals before the GP takes over; the first is the defaults.
  std::size_t initial_trials = 5;
  std::size_t candidates = 1000;
  GpConfig gp;
};

/// Single-owner state of one Bayesian optimisation run. Trial 1 proposes the
/// space defaults, trials 2..initial_trials are seeded uniform draws, later
/// trials maximise expected improvement over seeded uniform candidates.
class TuningSession {
 public:
  TuningSession(SearchSpace space, TunerConfig config);

  /// Throws BudgetExhausted once `budget` proposals were made.
  Assignment propose();
  void record(const Assignment& lambda, double score, double duration_s);

  const SearchSpace& space() const noexcept { return space_; }
  const std::vector<Trial>& trials() const noexcept { return trials_; }
  std::size_t budget() const noexcept { return config_.budget; }
  bool exhausted() const noexcept { return proposed_ >= config_.budget; }

  // Argmax over finite scores, earliest on ties; empty when every trial failed.
  std::optional<std::size_t> best_index() const;

  /// One JSON object per trial: {index, lambda, score, duration_s}. Failed
  /// trials carry a null score.
  std::string log_jsonl() const;

 private:
  Point random_point();

  SearchSpace space_;
  TunerConfig config_;
  std::mt19937_64 rng_;
  std::size_t proposed_ = 0;
  std::vector<Trial> trials_;
};

nlohmann::json assignment_to_json(const Assignment& lambda);
nlohmann::json trial_to_json(const Trial& trial);

/// Drive a session against an arbitrary scoring function. Exceptions from
/// `score` are recorded as -inf.
TuningSession tune_function(const SearchSpace& space,
                            const std::function<double(const Assignment&)>& score,
                            const TunerConfig& config);

enum class ObjectiveKind { unsupervised_mse, unsupervised_mae, supervised_f1 };

ObjectiveKind parse_objective_kind(std::string_view text);
std::string_view to_string(ObjectiveKind kind) noexcept;

struct Objective {
  ObjectiveKind kind = ObjectiveKind::unsupervised_mse;
  const Signal* signal = nullptr;
  const EventList* truth = nullptr;  // required for supervised_f1
};

/// Unsupervised kinds fit up to the modeling engine and return -MSE or -MAE
/// of predictions against targets. supervised_f1 fits the whole pipeline and
/// returns overlapping-segment F1 of its events (undefined counts as 0).
double evaluate_objective(const Pipeline& pipeline, const Objective& objective);

struct TuneResult {
  Pipeline best;
  double best_score = 0.0;
  std::vector<Trial> trials;
  std::string log_jsonl;
};

/// Throws InvalidArgument for a zero budget or a supervised objective without
/// ground truth, AllTrialsFailed when no trial produced a finite score.
TuneResult tune(const TemplatePtr& tmpl, const Objective& objective, std::size_t budget,
                SpaceScope scope, std::uint64_t seed = 0);

}  // namespace tsad
