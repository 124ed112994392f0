#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsad {

// Integer Unix seconds. Sub-second data must be pre-scaled by the caller.
using Timestamp = std::int64_t;

// Rows are samples, columns are channels. Missing samples are NaN.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An immutable, timestamped univariate or multivariate series.
///
/// Construction validates the invariants: at least two samples, at least one
/// channel, strictly increasing timestamps, and one value row per timestamp.
class Signal {
 public:
  Signal(std::string name, std::vector<Timestamp> timestamps, Matrix values,
         std::optional<std::string> source_uri = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const Matrix& values() const noexcept { return values_; }
  const std::optional<std::string>& source_uri() const noexcept { return source_uri_; }

  std::size_t size() const noexcept { return timestamps_.size(); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  Timestamp start() const noexcept { return timestamps_.front(); }
  Timestamp end() const noexcept { return timestamps_.back(); }

  Signal with_name(std::string name) const;

  // NaN compares equal to NaN; the source uri is ignored.
  friend bool operator==(const Signal& a, const Signal& b);

 private:
  std::string name_;
  std::vector<Timestamp> timestamps_;
  Matrix values_;
  std::optional<std::string> source_uri_;
};

/// Restrict `signal` to the samples whose timestamp lies in [t0, t1].
/// Throws EmptySlice when fewer than two samples remain.
Signal slice(const Signal& signal, Timestamp t0, Timestamp t1);

/// Index of the first timestamp >= t (timestamps.size() if none).
std::size_t lower_index(std::span<const Timestamp> timestamps, Timestamp t);

}  // namespace tsad
