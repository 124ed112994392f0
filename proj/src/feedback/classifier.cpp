#include "tsad/feedback/classifier.hpp"

#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/primitives/models.hpp"

#include <cmath>
#include <random>

namespace tsad {

Matrix window_features(const Matrix& windows, std::size_t window_size, std::size_t channels) {
  const auto w = static_cast<Eigen::Index>(window_size);
  const auto m = static_cast<Eigen::Index>(channels);
  if (w * m != windows.cols()) throw Error(ErrorCode::ShapeMismatch, "window width differs from w*m");
  Matrix features(windows.rows(), w * m + 3 * m);
  features.leftCols(w * m) = windows;
  for (Eigen::Index r = 0; r < windows.rows(); ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < w; ++k) sum += windows(r, k * m + c);
      const double mean = sum / static_cast<double>(w);
      double ss = 0.0;
      double max_diff = 0.0;
      for (Eigen::Index k = 0; k < w; ++k) {
        const double v = windows(r, k * m + c);
        ss += (v - mean) * (v - mean);
        if (k > 0) max_diff = std::max(max_diff, std::abs(v - windows(r, (k - 1) * m + c)));
      }
      features(r, w * m + 3 * c) = mean;
      features(r, w * m + 3 * c + 1) = std::sqrt(ss / static_cast<double>(w));
      features(r, w * m + 3 * c + 2) = max_diff;
    }
  }
  return features;
}

ClassifierModel train_classifier(const Matrix& windows, const std::vector<int>& labels,
                                 std::size_t window_size, std::size_t channels,
                                 const ClassifierHyperparams& hp) {
  if (static_cast<std::size_t>(windows.rows()) != labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one label per window is required");
  }
  std::size_t positives = 0;
  for (int y : labels) positives += y != 0 ? 1 : 0;
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::SingleClassData,
                "training needs at least one anomalous and one normal window (" +
                    std::to_string(positives) + " of " + std::to_string(labels.size()) + " anomalous)");
  }
  if (!windows.allFinite()) throw Error(ErrorCode::InvalidArgument, "windows contain NaN");

  const Matrix raw = window_features(windows, window_size, channels);
  ClassifierModel model;
  model.window_size = window_size;
  model.channels = channels;
  model.feature_mean = raw.colwise().mean().transpose();
  model.feature_sd = ((raw.rowwise() - model.feature_mean.transpose()).array().square().colwise().mean())
                         .sqrt()
                         .transpose();
  for (Eigen::Index j = 0; j < model.feature_sd.size(); ++j) {
    if (!(model.feature_sd(j) > 1e-12)) model.feature_sd(j) = 1.0;
  }
  const Matrix x = ((raw.rowwise() - model.feature_mean.transpose()).array().rowwise() /
                    model.feature_sd.transpose().array())
                       .matrix();

  const auto n = x.rows();
  Vector y(n);
  Vector sample_weight(n);
  const double pos = static_cast<double>(positives);
  const double neg = static_cast<double>(labels.size() - positives);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = labels[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
    if (hp.balanced) {
      sample_weight(i) = y(i) > 0.5 ? 0.5 / pos : 0.5 / neg;
    } else {
      sample_weight(i) = 1.0 / static_cast<double>(n);
    }
  }

  auto rng = seeded_engine(hp.seed, 0x4c4f47);
  std::normal_distribution<double> init(0.0, 0.01);
  model.weights.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) model.weights(j) = init(rng);
  model.bias = 0.0;

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    const Vector logits = (x * model.weights).array() + model.bias;
    const Vector p = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
    const Vector residual = ((p - y).array() * sample_weight.array()).matrix();
    const Vector grad_w = x.transpose() * residual + hp.l2 * model.weights;
    const double grad_b = residual.sum();
    model.weights -= hp.learning_rate * grad_w;
    model.bias -= hp.learning_rate * grad_b;
    if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
      throw Error(ErrorCode::NonFiniteLoss, "classifier training diverged");
    }
  }
  return model;
}

Vector predict_proba(const ClassifierModel& model, const Matrix& windows) {
  const Matrix raw = window_features(windows, model.window_size, model.channels);
  if (raw.cols() != model.weights.size()) throw Error(ErrorCode::ShapeMismatch, "feature width differs");
  const Matrix x = ((raw.rowwise() - model.feature_mean.transpose()).array().rowwise() /
                    model.feature_sd.transpose().array())
                       .matrix();
  const Vector logits = (x * model.weights).array() + model.bias;
  return (1.0 / (1.0 + (-logits.array()).exp())).matrix();
}

EventList merge_marked_windows(const Vector& probabilities, std::span<const Timestamp> start_ts,
                               std::span<const Timestamp> end_ts, std::size_t merge,
                               double threshold) {
  const auto n = static_cast<std::size_t>(probabilities.size());
  if (start_ts.size() != n || end_ts.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "one span per window is required");
  }
  EventList events;
  std::size_t i = 0;
  while (i < n) {
    if (!(probabilities(static_cast<Eigen::Index>(i)) > threshold)) {
      ++i;
      continue;
    }
    std::size_t last = i;
    double sum = 0.0;
    std::size_t marked = 0;
    std::size_t j = i;
    while (j < n) {
      if (probabilities(static_cast<Eigen::Index>(j)) > threshold) {
        sum += probabilities(static_cast<Eigen::Index>(j));
        ++marked;
        last = j;
      } else if (j - last > merge) {
        break;
      }
      ++j;
    }
    Timestamp t_s = start_ts[i];
    Timestamp t_e = std::max(end_ts[last], t_s + 1);
    // Windows from a strided grid may overlap the previous event.
    if (!events.empty() && t_s <= events.back().t_e) {
      events.back().t_e = std::max(events.back().t_e, t_e);
    } else {
      events.push_back(make_event(t_s, t_e, sum / static_cast<double>(marked)));
    }
    i = last + 1;
  }
  return events;
}

nlohmann::json to_json(const ClassifierModel& model) {
  return {{"window_size", model.window_size},
          {"channels", model.channels},
          {"feature_mean", vector_to_json(model.feature_mean)},
          {"feature_sd", vector_to_json(model.feature_sd)},
          {"weights", vector_to_json(model.weights)},
          {"bias", model.bias}};
}

ClassifierModel classifier_from_json(const nlohmann::json& j) {
  ClassifierModel model;
  model.window_size = j.at("window_size").get<std::size_t>();
  model.channels = j.at("channels").get<std::size_t>();
  model.feature_mean = vector_from_json(j.at("feature_mean"));
  model.feature_sd = vector_from_json(j.at("feature_sd"));
  model.weights = vector_from_json(j.at("weights"));
  model.bias = j.at("bias").get<double>();
  return model;
}

}  // namespace tsad
