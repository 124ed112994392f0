#include "tsad/tuning/tuner.hpp"

#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/metrics/segment.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsad {

namespace {

constexpr std::uint64_t kTunerStream = 0x54554e45;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TuningSession::TuningSession(SearchSpace space, TunerConfig config)
    : space_(std::move(space)), config_(config), rng_(seeded_engine(config.seed, kTunerStream)) {
  if (config_.budget == 0) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
  if (config_.candidates == 0) throw Error(ErrorCode::InvalidArgument, "candidates must be >= 1");
}

Point TuningSession::random_point() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point p(space_.width());
  for (double& v : p) v = unit(rng_);
  return p;
}

Assignment TuningSession::propose() {
  if (exhausted()) {
    throw Error(ErrorCode::BudgetExhausted,
                "all " + std::to_string(config_.budget) + " trials of the budget were proposed");
  }
  const std::size_t k = proposed_++;
  if (k == 0) return space_.defaults();

  std::vector<Point> xs;
  std::vector<double> ys;
  for (const Trial& t : trials_) {
    if (std::isfinite(t.score)) {
      xs.push_back(t.point);
      ys.push_back(t.score);
    }
  }
  if (k < config_.initial_trials || xs.empty() || space_.empty()) {
    return space_.decode(random_point());
  }

  std::vector<Point> candidates(config_.candidates);
  for (Point& c : candidates) c = random_point();
  const Posterior post = gp_posterior(xs, ys, candidates, config_.gp);
  const double best = *std::max_element(ys.begin(), ys.end());
  std::size_t pick = 0;
  double pick_ei = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double ei = expected_improvement(post.mean[i], std::sqrt(post.variance[i]), best);
    if (ei > pick_ei) {
      pick_ei = ei;
      pick = i;
    }
  }
  return space_.decode(candidates[pick]);
}

void TuningSession::record(const Assignment& lambda, double score, double duration_s) {
  Trial t;
  t.index = trials_.size() + 1;
  t.point = space_.encode(lambda);
  t.lambda = lambda;
  t.score = std::isnan(score) ? -std::numeric_limits<double>::infinity() : score;
  t.duration_s = duration_s;
  trials_.push_back(std::move(t));
}

std::optional<std::size_t> TuningSession::best_index() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials_.size(); ++i) {
    if (!std::isfinite(trials_[i].score)) continue;
    if (!best || trials_[i].score > trials_[*best].score) best = i;
  }
  return best;
}

nlohmann::json assignment_to_json(const Assignment& lambda) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : lambda) j[key.str()] = value_to_json(value);
  return j;
}

nlohmann::json trial_to_json(const Trial& trial) {
  nlohmann::json j;
  j["index"] = trial.index;
  j["lambda"] = assignment_to_json(trial.lambda);
  j["score"] = std::isfinite(trial.score) ? nlohmann::json(trial.score) : nlohmann::json(nullptr);
  j["duration_s"] = trial.duration_s;
  return j;
}

std::string TuningSession::log_jsonl() const {
  std::ostringstream out;
  for (const Trial& t : trials_) out << trial_to_json(t).dump() << '\n';
  return out.str();
}

TuningSession tune_function(const SearchSpace& space,
                            const std::function<double(const Assignment&)>& score,
                            const TunerConfig& config) {
  TuningSession session(space, config);
  while (!session.exhausted()) {
    const Assignment lambda = session.propose();
    const auto start = std::chrono::steady_clock::now();
    double s = -std::numeric_limits<double>::infinity();
    try {
      s = score(lambda);
    } catch (const std::exception&) {
    }
    session.record(lambda, s, seconds_since(start));
  }
  return session;
}

ObjectiveKind parse_objective_kind(std::string_view text) {
  if (text == "unsupervised_mse") return ObjectiveKind::unsupervised_mse;
  if (text == "unsupervised_mae") return ObjectiveKind::unsupervised_mae;
  if (text == "supervised_f1") return ObjectiveKind::supervised_f1;
  throw Error(ErrorCode::InvalidArgument, "unknown objective '" + std::string(text) + "'");
}

std::string_view to_string(ObjectiveKind kind) noexcept {
  switch (kind) {
    case ObjectiveKind::unsupervised_mse:
      return "unsupervised_mse";
    case ObjectiveKind::unsupervised_mae:
      return "unsupervised_mae";
    case ObjectiveKind::supervised_f1:
      return "supervised_f1";
  }
  return "unsupervised_mse";
}

double evaluate_objective(const Pipeline& pipeline, const Objective& objective) {
  if (objective.signal == nullptr) throw Error(ErrorCode::InvalidArgument, "objective has no signal");
  if (objective.kind == ObjectiveKind::supervised_f1) {
    if (objective.truth == nullptr || objective.truth->empty()) {
      throw Error(ErrorCode::InvalidArgument, "supervised objective needs nonempty ground truth");
    }
    FitOptions options;
    options.labels = objective.truth;
    const FittedPipeline fitted = fit(pipeline, *objective.signal, options);
    const EventList truth =
        clip_events(*objective.truth, objective.signal->start(), objective.signal->end());
    const Scores s = score_from_confusion(overlapping_segment(truth, fitted.fit_events));
    return std::isnan(s.f1) ? 0.0 : s.f1;
  }

  FitOptions options;
  options.stop_before_postprocessing = true;
  DataContext ctx;
  fit(pipeline, *objective.signal, options, ctx);
  const Matrix& predicted = ctx.require_predictions();
  const Matrix& actual = ctx.require_targets();
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols() || actual.size() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "predictions and targets differ in shape");
  }
  const Eigen::ArrayXXd diff = (predicted - actual).array();
  const double loss = objective.kind == ObjectiveKind::unsupervised_mse ? diff.square().mean()
                                                                        : diff.abs().mean();
  return -loss;
}

TuneResult tune(const TemplatePtr& tmpl, const Objective& objective, std::size_t budget,
                SpaceScope scope, std::uint64_t seed) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
  if (objective.kind == ObjectiveKind::supervised_f1 &&
      (objective.truth == nullptr || objective.truth->empty())) {
    throw Error(ErrorCode::InvalidArgument, "supervised tuning needs a nonempty ground truth set");
  }
  TunerConfig config;
  config.budget = budget;
  config.seed = seed;
  const SearchSpace space(hyperparameter_space(*tmpl, scope));
  TuningSession session = tune_function(
      space,
      [&](const Assignment& lambda) { return evaluate_objective(instantiate(tmpl, lambda), objective); },
      config);

  const auto best = session.best_index();
  if (!best) {
    throw Error(ErrorCode::AllTrialsFailed,
                "none of the " + std::to_string(budget) + " trials produced a finite score");
  }
  const Trial& t = session.trials()[*best];
  return TuneResult{instantiate(tmpl, t.lambda), t.score, session.trials(), session.log_jsonl()};
}

}  // namespace tsad
