#include "tsad/primitives/preprocessing.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsad {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double>& xs) {
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) return upper;
  const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

AggregateMethod parse_aggregate_method(std::string_view text) {
  if (text == "mean") return AggregateMethod::mean;
  if (text == "median") return AggregateMethod::median;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation method '" + std::string(text) + "'");
}

Timestamp median_spacing(std::span<const Timestamp> timestamps) {
  if (timestamps.size() < 2) return 1;
  std::vector<Timestamp> gaps(timestamps.size() - 1);
  for (std::size_t i = 1; i < timestamps.size(); ++i) gaps[i - 1] = timestamps[i] - timestamps[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  return std::max<Timestamp>(1, gaps[gaps.size() / 2]);
}

RegularSeries time_segments_aggregate(std::span<const Timestamp> timestamps, const Matrix& values,
                                      Timestamp interval, AggregateMethod method) {
  if (interval <= 0) throw Error(ErrorCode::InvalidArgument, "aggregation interval must be > 0");
  if (timestamps.empty()) throw Error(ErrorCode::EmptySignal, "cannot aggregate an empty signal");
  if (static_cast<std::size_t>(values.rows()) != timestamps.size()) {
    throw Error(ErrorCode::ShapeMismatch, "values and timestamps differ in length");
  }
  const Timestamp t0 = timestamps.front();
  const auto buckets = static_cast<std::size_t>((timestamps.back() - t0) / interval) + 1;
  const Eigen::Index m = values.cols();

  RegularSeries out;
  out.timestamps.resize(buckets);
  out.values = Matrix::Constant(static_cast<Eigen::Index>(buckets), m, kNaN);

  std::size_t row = 0;
  std::vector<double> bucket;
  for (std::size_t b = 0; b < buckets; ++b) {
    const Timestamp t = t0 + static_cast<Timestamp>(b) * interval;
    out.timestamps[b] = t;
    const std::size_t first = row;
    while (row < timestamps.size() && timestamps[row] < t + interval) ++row;
    for (Eigen::Index c = 0; c < m; ++c) {
      bucket.clear();
      for (std::size_t i = first; i < row; ++i) {
        const double v = values(static_cast<Eigen::Index>(i), c);
        if (!std::isnan(v)) bucket.push_back(v);
      }
      if (bucket.empty()) continue;
      double agg = 0.0;
      if (method == AggregateMethod::mean) {
        for (double v : bucket) agg += v;
        agg /= static_cast<double>(bucket.size());
      } else {
        agg = median_of(bucket);
      }
      out.values(static_cast<Eigen::Index>(b), c) = agg;
    }
  }
  return out;
}

Vector channel_means(const Matrix& values) {
  Vector means(values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, c);
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    if (count == 0) {
      throw Error(ErrorCode::AllMissingChannel, "channel " + std::to_string(c) + " has no values");
    }
    means(c) = sum / static_cast<double>(count);
  }
  return means;
}

Matrix impute_with(const Matrix& values, const Vector& fill) {
  if (fill.size() != values.cols()) throw Error(ErrorCode::ShapeMismatch, "imputer channel count differs");
  Matrix out = values;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (std::isnan(out(i, c))) out(i, c) = fill(c);
    }
  }
  return out;
}

Matrix impute_mean(const Matrix& values) { return impute_with(values, channel_means(values)); }

Scaled scale_minmax(const Matrix& values, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "scale range needs lo < hi");
  ScalerParams params;
  params.lo = lo;
  params.hi = hi;
  params.min = Vector::Constant(values.cols(), kNaN);
  params.max = Vector::Constant(values.cols(), kNaN);
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, c);
      if (std::isnan(v)) continue;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mn > mx) {
      throw Error(ErrorCode::AllMissingChannel, "channel " + std::to_string(c) + " has no values");
    }
    params.min(c) = mn;
    params.max(c) = mx;
  }
  return Scaled{apply_minmax(values, params), params};
}

Matrix apply_minmax(const Matrix& values, const ScalerParams& params) {
  if (params.min.size() != values.cols()) throw Error(ErrorCode::ShapeMismatch, "scaler channel count differs");
  Matrix out(values.rows(), values.cols());
  const double mid = 0.5 * (params.lo + params.hi);
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    const double span = params.max(c) - params.min(c);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, c);
      if (span > 0.0) {
        out(i, c) = params.lo + (v - params.min(c)) * (params.hi - params.lo) / span;
      } else {
        out(i, c) = std::isnan(v) ? v : mid;
      }
    }
  }
  return out;
}

Matrix inverse_minmax(const Matrix& scaled, const ScalerParams& params) {
  if (params.min.size() != scaled.cols()) throw Error(ErrorCode::ShapeMismatch, "scaler channel count differs");
  Matrix out(scaled.rows(), scaled.cols());
  for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
    const double span = params.max(c) - params.min(c);
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
      const double y = scaled(i, c);
      if (span > 0.0) {
        out(i, c) = params.min(c) + (y - params.lo) * span / (params.hi - params.lo);
      } else {
        out(i, c) = std::isnan(y) ? y : params.min(c);
      }
    }
  }
  return out;
}

StandardParams fit_standard(const Matrix& values) {
  StandardParams params;
  params.mean = channel_means(values);
  params.sd = Vector::Ones(values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double ss = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, c);
      if (std::isnan(v)) continue;
      ss += (v - params.mean(c)) * (v - params.mean(c));
      ++count;
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    if (sd > 0.0) params.sd(c) = sd;
  }
  return params;
}

Matrix apply_standard(const Matrix& values, const StandardParams& params) {
  if (params.mean.size() != values.cols()) throw Error(ErrorCode::ShapeMismatch, "scaler channel count differs");
  Matrix out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    out.col(c) = (values.col(c).array() - params.mean(c)) / params.sd(c);
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t window_size, std::size_t step,
                         std::size_t horizon) {
  const std::size_t span = window_size + std::max<std::size_t>(horizon, 1) - (horizon == 0 ? 1 : 0);
  if (step == 0 || window_size == 0 || n < span) return 0;
  return (n - span) / step + 1;
}

Windows make_windows(const Matrix& values, std::span<const Timestamp> timestamps,
                     std::size_t window_size, std::size_t step, std::size_t horizon) {
  if (window_size == 0) throw Error(ErrorCode::InvalidArgument, "window_size must be >= 1");
  if (step == 0) throw Error(ErrorCode::InvalidArgument, "step must be >= 1");
  const auto n = static_cast<std::size_t>(values.rows());
  if (timestamps.size() != n) throw Error(ErrorCode::ShapeMismatch, "values and timestamps differ in length");
  if (n < window_size + horizon) {
    throw Error(ErrorCode::SignalTooShort, "signal of " + std::to_string(n) +
                                               " samples is shorter than window_size + horizon = " +
                                               std::to_string(window_size + horizon));
  }
  const std::size_t count = window_count(n, window_size, step, horizon);
  if (count == 0) throw Error(ErrorCode::SignalTooShort, "signal produces no windows");

  const auto m = static_cast<std::size_t>(values.cols());
  const auto width = static_cast<Eigen::Index>(window_size * m);
  Windows out;
  out.window_size = window_size;
  out.channels = m;
  out.horizon = horizon;
  out.windows.resize(static_cast<Eigen::Index>(count), width);
  out.targets.resize(static_cast<Eigen::Index>(count), horizon == 0 ? width : static_cast<Eigen::Index>(m));
  out.target_timestamps.resize(count);
  out.starts.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * step;
    const auto row = static_cast<Eigen::Index>(i);
    out.starts[i] = start;
    for (std::size_t k = 0; k < window_size; ++k) {
      for (std::size_t c = 0; c < m; ++c) {
        out.windows(row, static_cast<Eigen::Index>(k * m + c)) =
            values(static_cast<Eigen::Index>(start + k), static_cast<Eigen::Index>(c));
      }
    }
    if (horizon == 0) {
      out.targets.row(row) = out.windows.row(row);
      out.target_timestamps[i] = timestamps[start + window_size - 1];
    } else {
      const std::size_t target = start + window_size + horizon - 1;
      out.targets.row(row) = values.row(static_cast<Eigen::Index>(target));
      out.target_timestamps[i] = timestamps[target];
    }
  }
  return out;
}

}  // namespace tsad
