#pragma once

#include "tsad/core/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <variant>
#include <vector>

namespace tsad {

/// Per-channel autoregressive model: one coefficient per lag plus an
/// intercept, fitted by ordinary least squares on the normal equations.
struct ArModel {
  std::size_t window_size = 0;
  std::size_t channels = 0;
  Matrix coefficients;  // channels x window_size, column k multiplies time offset k
  Vector intercepts;    // channels
};

/// One hidden tanh layer followed by a linear output layer.
struct DenseNet {
  Matrix w1;  // hidden x inputs
  Vector b1;
  Matrix w2;  // outputs x hidden
  Vector b2;
  std::vector<double> loss_history;  // training MSE before each epoch, then the final loss

  Matrix forward(const Matrix& inputs) const;
};

struct MlpHyperparams {
  std::size_t hidden = 32;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

struct MlpModel {
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  DenseNet net;
};

using ForecastModel = std::variant<ArModel, MlpModel>;

enum class ForecasterKind { ar, mlp };

ArModel fit_ar(const Matrix& windows, const Matrix& targets, std::size_t channels);
MlpModel fit_mlp(const Matrix& windows, const Matrix& targets, const MlpHyperparams& hp);

/// AR needs one target column per channel and windows of width
/// window_size * channels; the MLP maps the flattened window to the targets.
///
/// Throws SingularSystem (ar) or NonFiniteLoss (mlp).
ForecastModel fit_forecaster(ForecasterKind kind, const Matrix& windows, const Matrix& targets,
                             std::size_t channels, const MlpHyperparams& hp = {});

/// One prediction row per window. Throws ShapeMismatch.
Matrix forecast(const ForecastModel& model, const Matrix& windows);

struct AutoencoderHyperparams {
  std::size_t latent_dim = 4;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

struct AeModel {
  std::size_t width = 0;
  DenseNet net;
};

/// Dense autoencoder: tanh encoder to `latent_dim`, linear decoder back to
/// the window width. Throws InvalidArgument when latent_dim >= width.
AeModel fit_autoencoder(const Matrix& windows, const AutoencoderHyperparams& hp);
Matrix reconstruct(const AeModel& model, const Matrix& windows);

nlohmann::json to_json(const ArModel& model);
nlohmann::json to_json(const MlpModel& model);
nlohmann::json to_json(const AeModel& model);
ArModel ar_from_json(const nlohmann::json& j);
MlpModel mlp_from_json(const nlohmann::json& j);
AeModel ae_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace tsad
