#pragma once

#include "tsad/pipeline/pipeline.hpp"

#include <span>
#include <utility>
#include <vector>

namespace tsad {

/// An ordered list of tunables and its embedding in the unit cube. Numeric
/// ranges take one coordinate; categorical and boolean specs are one-hot.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<std::pair<HyperparamKey, HyperparamSpec>> dims);

  const std::vector<std::pair<HyperparamKey, HyperparamSpec>>& dims() const noexcept { return dims_; }
  std::size_t width() const noexcept { return width_; }
  bool empty() const noexcept { return dims_.empty(); }

  /// Throws OutOfRange for a missing key or a value outside its spec.
  std::vector<double> encode(const Assignment& lambda) const;

  /// Ints round half up and clamp; one-hot groups take the argmax, ties to
  /// the first choice.
  Assignment decode(std::span<const double> point) const;

  Assignment defaults() const;

 private:
  std::vector<std::pair<HyperparamKey, HyperparamSpec>> dims_;
  std::size_t width_ = 0;
};

}  // namespace tsad
