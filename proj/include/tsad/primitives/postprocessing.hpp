#pragma once

#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"

#include <span>
#include <vector>

namespace tsad {

/// e_t = mean over columns of |predicted - actual|, optionally EWMA-smoothed
/// afterwards with e'_0 = e_0 and e'_t = alpha*e_t + (1-alpha)*e'_{t-1}.
/// Throws ShapeMismatch.
std::vector<double> regression_errors(const Matrix& actual, const Matrix& predicted, bool smooth,
                                      double ewma_alpha);

struct ThresholdParams {
  double z_min = 2.0;
  double z_max = 10.0;
  double z_step = 0.5;
  double prune_p = 0.13;
  std::size_t min_gap_samples = 1;
  // Threshold each window of `window_size` errors separately, sliding by
  // `window_step` (0 means window_size). 0 thresholds the whole sequence once.
  std::size_t window_size = 0;
  std::size_t window_step = 0;
};

struct ThresholdChoice {
  double z = 0.0;
  double epsilon = 0.0;
  double score = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Scan z over the grid and keep the one maximising
///   (dmean/mean + dsd/sd) / (|above| + runs^2)
/// where dmean, dsd are the drops after removing points above mean + z*sd.
/// Ties go to the larger z.
ThresholdChoice select_threshold(std::span<const double> errors, const ThresholdParams& params);

// Maximal runs of consecutive indices, as inclusive [first, last] pairs.
struct Run {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

/// Drop every candidate after the last successive relative decrease of the
/// sorted maxima that exceeds `prune_p`. Returns the kept indices into
/// `maxima`, in descending order of maximum.
std::vector<std::size_t> prune_by_decrease(std::span<const double> maxima, double prune_p);

/// Nonparametric dynamic threshold over an error sequence. Returns events in
/// the timestamp domain given by `timestamps` (one per error), with severity
/// (max error - epsilon) / sd. A constant error sequence yields no events.
///
/// With windowing, a point is anomalous when any window containing it flags
/// it; runs are then merged and pruned over the whole sequence, and severity
/// uses the epsilon and sd of the flagging window.
EventList find_anomalies(std::span<const double> errors, std::span<const Timestamp> timestamps,
                         const ThresholdParams& params = {});

}  // namespace tsad
