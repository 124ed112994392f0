#include "tsad/core/signal.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace tsad {

Signal::Signal(std::string name, std::vector<Timestamp> timestamps, Matrix values,
               std::optional<std::string> source_uri)
    : name_(std::move(name)),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)),
      source_uri_(std::move(source_uri)) {
  if (timestamps_.size() < 2) {
    throw Error(ErrorCode::EmptySignal,
                "signal needs at least 2 samples, got " + std::to_string(timestamps_.size()));
  }
  if (values_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "signal needs at least one channel");
  }
  if (static_cast<std::size_t>(values_.rows()) != timestamps_.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "value rows (" + std::to_string(values_.rows()) + ") != timestamps (" +
                    std::to_string(timestamps_.size()) + ")");
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (timestamps_[i] == timestamps_[i - 1]) {
      throw Error(ErrorCode::DuplicateTimestamp,
                  "duplicate timestamp " + std::to_string(timestamps_[i]));
    }
    if (timestamps_[i] < timestamps_[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "timestamps must be strictly increasing");
    }
  }
}

Signal Signal::with_name(std::string name) const {
  Signal copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

bool operator==(const Signal& a, const Signal& b) {
  if (a.name_ != b.name_ || a.timestamps_ != b.timestamps_) return false;
  if (a.values_.rows() != b.values_.rows() || a.values_.cols() != b.values_.cols()) return false;
  for (Eigen::Index i = 0; i < a.values_.size(); ++i) {
    const double x = a.values_.data()[i];
    const double y = b.values_.data()[i];
    if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
  }
  return true;
}

std::size_t lower_index(std::span<const Timestamp> timestamps, Timestamp t) {
  return static_cast<std::size_t>(
      std::lower_bound(timestamps.begin(), timestamps.end(), t) - timestamps.begin());
}

Signal slice(const Signal& signal, Timestamp t0, Timestamp t1) {
  if (t0 >= t1) {
    throw Error(ErrorCode::InvalidArgument, "slice requires t0 < t1");
  }
  const auto& ts = signal.timestamps();
  const std::size_t first = lower_index(ts, t0);
  const std::size_t last = static_cast<std::size_t>(
      std::upper_bound(ts.begin(), ts.end(), t1) - ts.begin());
  if (last <= first || last - first < 2) {
    throw Error(ErrorCode::EmptySlice, "fewer than 2 samples in [" + std::to_string(t0) + ", " +
                                           std::to_string(t1) + "]");
  }
  std::vector<Timestamp> out_ts(ts.begin() + static_cast<std::ptrdiff_t>(first),
                                ts.begin() + static_cast<std::ptrdiff_t>(last));
  Matrix out_values = signal.values().middleRows(static_cast<Eigen::Index>(first),
                                                 static_cast<Eigen::Index>(last - first));
  return Signal(signal.name(), std::move(out_ts), std::move(out_values), signal.source_uri());
}

}  // namespace tsad
