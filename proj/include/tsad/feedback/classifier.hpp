#pragma once

#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace tsad {

struct ClassifierHyperparams {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  bool balanced = true;  // weight both classes equally in the loss
};

/// Logistic regression over window features, standardised with the
/// training set's feature mean and sd.
struct ClassifierModel {
  std::size_t window_size = 0;
  std::size_t channels = 0;
  Vector feature_mean;
  Vector feature_sd;
  Vector weights;
  double bias = 0.0;
};

/// Raw window values, then per channel: mean, sd, and max |first difference|.
Matrix window_features(const Matrix& windows, std::size_t window_size, std::size_t channels);

/// Full-batch gradient descent on the (optionally class-balanced) logistic
/// loss. `labels` holds 1 for anomalous and 0 for normal windows.
///
/// Throws SingleClassData unless both classes are present.
ClassifierModel train_classifier(const Matrix& windows, const std::vector<int>& labels,
                                 std::size_t window_size, std::size_t channels,
                                 const ClassifierHyperparams& hp = {});

Vector predict_proba(const ClassifierModel& model, const Matrix& windows);

/// Join windows whose probability exceeds `threshold` into events. Marked
/// windows separated by at most `merge` unmarked windows fuse; an event spans
/// from its first window's start to its last window's end and its severity is
/// the mean probability of its marked windows.
EventList merge_marked_windows(const Vector& probabilities, std::span<const Timestamp> start_ts,
                               std::span<const Timestamp> end_ts, std::size_t merge,
                               double threshold = 0.5);

nlohmann::json to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);

}  // namespace tsad
