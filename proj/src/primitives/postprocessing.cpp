#include "tsad/primitives/postprocessing.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace tsad {
namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(std::span<const double> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

std::vector<Run> runs_above(std::span<const double> errors, double epsilon) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > epsilon)) continue;
    if (!runs.empty() && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }
  return runs;
}

}  // namespace

std::vector<double> regression_errors(const Matrix& actual, const Matrix& predicted, bool smooth,
                                      double ewma_alpha) {
  if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "actual and predicted shapes differ");
  }
  if (smooth && !(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ewma_alpha must be in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(actual.rows());
  std::vector<double> e(n, 0.0);
  if (actual.cols() == 0) return e;
  const double inv = 1.0 / static_cast<double>(actual.cols());
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    e[t] = (predicted.row(row) - actual.row(row)).cwiseAbs().sum() * inv;
  }
  if (smooth) {
    for (std::size_t t = 1; t < n; ++t) e[t] = ewma_alpha * e[t] + (1.0 - ewma_alpha) * e[t - 1];
  }
  return e;
}

ThresholdChoice select_threshold(std::span<const double> errors, const ThresholdParams& params) {
  if (!(params.z_step > 0.0) || params.z_min > params.z_max) {
    throw Error(ErrorCode::InvalidArgument, "z grid needs z_step > 0 and z_min <= z_max");
  }
  const Moments all = moments(errors);
  ThresholdChoice best;
  best.mean = all.mean;
  best.sd = all.sd;
  best.z = params.z_min;
  best.epsilon = all.mean + params.z_min * all.sd;
  best.score = -std::numeric_limits<double>::infinity();
  if (!(all.sd > 0.0)) return best;

  std::vector<double> below;
  below.reserve(errors.size());
  const auto steps = static_cast<std::size_t>(std::floor((params.z_max - params.z_min) / params.z_step + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double z = params.z_min + static_cast<double>(k) * params.z_step;
    const double epsilon = all.mean + z * all.sd;
    below.clear();
    for (double x : errors) {
      if (!(x > epsilon)) below.push_back(x);
    }
    const std::size_t above = errors.size() - below.size();
    double score = 0.0;
    if (above > 0 && !below.empty()) {
      const Moments rest = moments(below);
      const double delta_mean = all.mean - rest.mean;
      const double delta_sd = all.sd - rest.sd;
      const auto runs = static_cast<double>(runs_above(errors, epsilon).size());
      score = (delta_mean / all.mean + delta_sd / all.sd) / (static_cast<double>(above) + runs * runs);
    }
    if (score >= best.score) {
      best.z = z;
      best.epsilon = epsilon;
      best.score = score;
    }
  }
  return best;
}

std::vector<std::size_t> prune_by_decrease(std::span<const double> maxima, double prune_p) {
  std::vector<std::size_t> order(maxima.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return maxima[a] > maxima[b]; });
  std::optional<std::size_t> last_drop;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const double current = maxima[order[i]];
    const double next = maxima[order[i + 1]];
    if (current > 0.0 && (current - next) / current > prune_p) last_drop = i;
  }
  if (last_drop) order.resize(*last_drop + 1);
  return order;
}

EventList find_anomalies(std::span<const double> errors, std::span<const Timestamp> timestamps,
                         const ThresholdParams& params) {
  if (errors.size() != timestamps.size()) {
    throw Error(ErrorCode::ShapeMismatch, "errors and timestamps differ in length");
  }
  if (errors.empty()) throw Error(ErrorCode::InvalidArgument, "error sequence is empty");
  for (double e : errors) {
    if (!std::isfinite(e) || e < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "errors must be finite and nonnegative");
    }
  }
  const std::size_t n = errors.size();
  const std::size_t size = params.window_size == 0 ? n : std::min(params.window_size, n);
  const std::size_t step = params.window_step == 0 ? size : params.window_step;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + size <= n; s += step) starts.push_back(s);
  if (starts.back() + size < n) starts.push_back(n - size);

  // excess[i]: largest (e_i - epsilon) / sd over the windows flagging point i.
  constexpr double none = -std::numeric_limits<double>::infinity();
  std::vector<double> excess(n, none);
  for (std::size_t s : starts) {
    const auto window = errors.subspan(s, size);
    const ThresholdChoice choice = select_threshold(window, params);
    if (!(choice.sd > 0.0)) continue;
    for (std::size_t i = 0; i < size; ++i) {
      if (window[i] > choice.epsilon) {
        excess[s + i] = std::max(excess[s + i], (window[i] - choice.epsilon) / choice.sd);
      }
    }
  }

  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (excess[i] == none) continue;
    if (!runs.empty() && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }
  std::vector<Run> merged;
  for (const Run& run : runs) {
    if (!merged.empty() && run.first - merged.back().last - 1 < params.min_gap_samples) {
      merged.back().last = run.last;
    } else {
      merged.push_back(run);
    }
  }
  if (merged.empty()) return {};

  std::vector<double> maxima(merged.size());
  std::vector<double> severity(merged.size(), 0.0);
  for (std::size_t k = 0; k < merged.size(); ++k) {
    for (std::size_t i = merged[k].first; i <= merged[k].last; ++i) {
      maxima[k] = std::max(maxima[k], errors[i]);
      severity[k] = std::max(severity[k], excess[i]);
    }
  }
  const auto kept = prune_by_decrease(maxima, params.prune_p);

  EventList events;
  for (std::size_t k : kept) {
    const Run& run = merged[k];
    Timestamp t_s = timestamps[run.first];
    Timestamp t_e = timestamps[run.last];
    if (run.first == run.last) {
      // A single sample widens to its neighbour so that t_s < t_e holds.
      if (run.last + 1 < n) {
        t_e = timestamps[run.last + 1];
      } else if (run.first > 0) {
        t_s = timestamps[run.first - 1];
      } else {
        t_e = t_s + 1;
      }
    }
    events.push_back(make_event(t_s, t_e, severity[k]));
  }
  sort_events(events);
  return events;
}

}  // namespace tsad
