#include "tsad/tuning/space.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace tsad {

namespace {

std::size_t dim_width(const HyperparamSpec& spec) {
  switch (spec.kind) {
    case HyperparamKind::int_range:
    case HyperparamKind::float_range:
      return 1;
    case HyperparamKind::categorical:
      return spec.choices.size();
    case HyperparamKind::boolean:
      return 2;
  }
  return 1;
}

}  // namespace

SearchSpace::SearchSpace(std::vector<std::pair<HyperparamKey, HyperparamSpec>> dims)
    : dims_(std::move(dims)) {
  for (const auto& [key, spec] : dims_) width_ += dim_width(spec);
}

std::vector<double> SearchSpace::encode(const Assignment& lambda) const {
  std::vector<double> point;
  point.reserve(width_);
  for (const auto& [key, spec] : dims_) {
    auto it = lambda.find(key);
    if (it == lambda.end()) throw Error(ErrorCode::OutOfRange, "no value for " + key.str(), key.str());
    const HyperparamValue& value = it->second;
    if (!spec.contains(value)) {
      throw Error(ErrorCode::OutOfRange, key.str() + " = " + value_to_string(value) + " outside its spec",
                  key.str());
    }
    switch (spec.kind) {
      case HyperparamKind::int_range:
      case HyperparamKind::float_range: {
        const double v = std::holds_alternative<std::int64_t>(value)
                             ? static_cast<double>(std::get<std::int64_t>(value))
                             : std::get<double>(value);
        point.push_back((v - spec.lo) / (spec.hi - spec.lo));
        break;
      }
      case HyperparamKind::categorical: {
        const auto& choice = std::get<std::string>(value);
        for (const auto& c : spec.choices) point.push_back(c == choice ? 1.0 : 0.0);
        break;
      }
      case HyperparamKind::boolean: {
        const bool b = std::get<bool>(value);
        point.push_back(b ? 0.0 : 1.0);
        point.push_back(b ? 1.0 : 0.0);
        break;
      }
    }
  }
  return point;
}

Assignment SearchSpace::decode(std::span<const double> point) const {
  if (point.size() != width_) {
    throw Error(ErrorCode::InvalidArgument, "point has " + std::to_string(point.size()) +
                                                " coordinates, space needs " + std::to_string(width_));
  }
  Assignment lambda;
  std::size_t at = 0;
  for (const auto& [key, spec] : dims_) {
    switch (spec.kind) {
      case HyperparamKind::int_range: {
        const double raw = spec.lo + std::clamp(point[at], 0.0, 1.0) * (spec.hi - spec.lo);
        const double rounded = std::clamp(std::floor(raw + 0.5), spec.lo, spec.hi);
        lambda[key] = static_cast<std::int64_t>(rounded);
        at += 1;
        break;
      }
      case HyperparamKind::float_range:
        lambda[key] = std::clamp(spec.lo + point[at] * (spec.hi - spec.lo), spec.lo, spec.hi);
        at += 1;
        break;
      case HyperparamKind::categorical: {
        std::size_t best = 0;
        for (std::size_t i = 1; i < spec.choices.size(); ++i) {
          if (point[at + i] > point[at + best]) best = i;
        }
        lambda[key] = spec.choices[best];
        at += spec.choices.size();
        break;
      }
      case HyperparamKind::boolean:
        lambda[key] = point[at + 1] > point[at];
        at += 2;
        break;
    }
  }
  return lambda;
}

Assignment SearchSpace::defaults() const {
  Assignment lambda;
  for (const auto& [key, spec] : dims_) lambda[key] = spec.default_value;
  return lambda;
}

}  // namespace tsad
