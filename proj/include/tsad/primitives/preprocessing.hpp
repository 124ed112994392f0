#pragma once

#include "tsad/core/signal.hpp"

#include <string_view>
#include <vector>

namespace tsad {

enum class AggregateMethod { mean, median };
AggregateMethod parse_aggregate_method(std::string_view text);

struct RegularSeries {
  std::vector<Timestamp> timestamps;
  Matrix values;
};

/// Resample onto t0, t0+interval, ... up to the last timestamp. Each output
/// row aggregates the input samples in [t, t+interval) per channel, ignoring
/// NaN inputs. Empty buckets yield NaN.
RegularSeries time_segments_aggregate(std::span<const Timestamp> timestamps, const Matrix& values,
                                      Timestamp interval, AggregateMethod method);

// Median spacing between consecutive timestamps (at least 1).
Timestamp median_spacing(std::span<const Timestamp> timestamps);

/// Per-channel mean over non-NaN entries. Throws AllMissingChannel.
Vector channel_means(const Matrix& values);

/// Replace every NaN by its channel mean. Throws AllMissingChannel.
Matrix impute_mean(const Matrix& values);
Matrix impute_with(const Matrix& values, const Vector& fill);

struct ScalerParams {
  Vector min;
  Vector max;
  double lo = -1.0;
  double hi = 1.0;
};

struct Scaled {
  Matrix values;
  ScalerParams params;
};

/// Linear per-channel map [min, max] -> [lo, hi]; constant channels map to
/// the midpoint. NaN entries are ignored when fitting and stay NaN.
Scaled scale_minmax(const Matrix& values, double lo, double hi);
Matrix apply_minmax(const Matrix& values, const ScalerParams& params);
Matrix inverse_minmax(const Matrix& scaled, const ScalerParams& params);

struct StandardParams {
  Vector mean;
  Vector sd;  // a zero sd is stored as 1
};

StandardParams fit_standard(const Matrix& values);
Matrix apply_standard(const Matrix& values, const StandardParams& params);

/// Sliding windows over the rows of `values`.
///
/// Window i covers rows [i*step, i*step + window_size). With horizon >= 1 the
/// target is row i*step + window_size + horizon - 1; with horizon 0 the target
/// is the flattened window itself. Rows are flattened time-major:
/// column k*m + c holds time offset k of channel c.
struct Windows {
  Matrix windows;   // count x (window_size * m)
  Matrix targets;   // count x m, or count x (window_size * m) for horizon 0
  std::vector<Timestamp> target_timestamps;
  std::vector<std::size_t> starts;  // first row of each window
  std::size_t window_size = 0;
  std::size_t channels = 0;
  std::size_t horizon = 0;
};

std::size_t window_count(std::size_t n, std::size_t window_size, std::size_t step,
                         std::size_t horizon);

/// Throws SignalTooShort when n < window_size + horizon, InvalidArgument for
/// a zero window size or step.
Windows make_windows(const Matrix& values, std::span<const Timestamp> timestamps,
                     std::size_t window_size, std::size_t step, std::size_t horizon);

}  // namespace tsad
