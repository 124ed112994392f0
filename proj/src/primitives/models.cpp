#include "tsad/primitives/models.hpp"

#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"

#include <cmath>
#include <random>

namespace tsad {
namespace {

constexpr double kRidgeJitter = 1e-8;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " contain NaN or infinite values");
  }
}

// Glorot-uniform initialisation followed by full-batch gradient descent on
// the mean squared error.
DenseNet train_dense(const Matrix& inputs, const Matrix& targets, std::size_t hidden,
                     double learning_rate, std::size_t epochs, std::uint64_t seed) {
  const auto n = inputs.rows();
  const auto in = inputs.cols();
  const auto out = targets.cols();
  const auto h = static_cast<Eigen::Index>(hidden);

  auto rng = seeded_engine(seed, 0x4d4c50);
  auto init = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    return w;
  };

  DenseNet net;
  net.w1 = init(h, in);
  net.b1 = Vector::Zero(h);
  net.w2 = init(out, h);
  net.b2 = Vector::Zero(out);

  const double scale = 1.0 / static_cast<double>(n * out);
  for (std::size_t epoch = 0; epoch <= epochs; ++epoch) {
    Matrix pre = inputs * net.w1.transpose();
    pre.rowwise() += net.b1.transpose();
    const Matrix act = pre.array().tanh().matrix();
    Matrix pred = act * net.w2.transpose();
    pred.rowwise() += net.b2.transpose();
    const Matrix diff = pred - targets;
    const double loss = diff.squaredNorm() * scale;
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "training diverged at epoch " + std::to_string(epoch));
    }
    net.loss_history.push_back(loss);
    if (epoch == epochs) break;

    const Matrix grad_pred = 2.0 * scale * diff;
    const Matrix grad_w2 = grad_pred.transpose() * act;
    const Vector grad_b2 = grad_pred.colwise().sum().transpose();
    const Matrix grad_act = grad_pred * net.w2;
    const Matrix grad_pre = (grad_act.array() * (1.0 - act.array().square())).matrix();
    const Matrix grad_w1 = grad_pre.transpose() * inputs;
    const Vector grad_b1 = grad_pre.colwise().sum().transpose();

    net.w2 -= learning_rate * grad_w2;
    net.b2 -= learning_rate * grad_b2;
    net.w1 -= learning_rate * grad_w1;
    net.b1 -= learning_rate * grad_b1;
  }
  return net;
}

}  // namespace

Matrix DenseNet::forward(const Matrix& inputs) const {
  Matrix pre = inputs * w1.transpose();
  pre.rowwise() += b1.transpose();
  Matrix out = pre.array().tanh().matrix() * w2.transpose();
  out.rowwise() += b2.transpose();
  return out;
}

ArModel fit_ar(const Matrix& windows, const Matrix& targets, std::size_t channels) {
  if (channels == 0 || windows.rows() == 0 || windows.rows() != targets.rows() ||
      windows.cols() % static_cast<Eigen::Index>(channels) != 0 ||
      targets.cols() != static_cast<Eigen::Index>(channels)) {
    throw Error(ErrorCode::ShapeMismatch, "ar needs windows (count x w*m) and targets (count x m)");
  }
  require_finite(windows, "windows");
  require_finite(targets, "targets");
  const auto m = static_cast<Eigen::Index>(channels);
  const Eigen::Index w = windows.cols() / m;
  const Eigen::Index n = windows.rows();

  ArModel model;
  model.window_size = static_cast<std::size_t>(w);
  model.channels = channels;
  model.coefficients.resize(m, w);
  model.intercepts.resize(m);

  Matrix design(n, w + 1);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index k = 0; k < w; ++k) design.col(k) = windows.col(k * m + c);
    design.col(w).setOnes();
    Matrix gram = design.transpose() * design;
    gram.diagonal().array() += kRidgeJitter;
    const Vector rhs = design.transpose() * targets.col(c);
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularSystem, "normal equations are not positive definite");
    }
    const Vector beta = llt.solve(rhs);
    if (!beta.allFinite()) throw Error(ErrorCode::SingularSystem, "least-squares solution is not finite");
    model.coefficients.row(c) = beta.head(w).transpose();
    model.intercepts(c) = beta(w);
  }
  return model;
}

MlpModel fit_mlp(const Matrix& windows, const Matrix& targets, const MlpHyperparams& hp) {
  if (windows.rows() == 0 || windows.rows() != targets.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "mlp needs as many target rows as windows");
  }
  if (hp.hidden == 0) throw Error(ErrorCode::InvalidArgument, "mlp hidden width must be >= 1");
  require_finite(windows, "windows");
  require_finite(targets, "targets");
  MlpModel model;
  model.input_width = static_cast<std::size_t>(windows.cols());
  model.output_width = static_cast<std::size_t>(targets.cols());
  model.net = train_dense(windows, targets, hp.hidden, hp.learning_rate, hp.epochs, hp.seed);
  return model;
}

ForecastModel fit_forecaster(ForecasterKind kind, const Matrix& windows, const Matrix& targets,
                             std::size_t channels, const MlpHyperparams& hp) {
  if (kind == ForecasterKind::ar) return fit_ar(windows, targets, channels);
  return fit_mlp(windows, targets, hp);
}

Matrix forecast(const ForecastModel& model, const Matrix& windows) {
  if (const auto* ar = std::get_if<ArModel>(&model)) {
    const auto m = static_cast<Eigen::Index>(ar->channels);
    const auto w = static_cast<Eigen::Index>(ar->window_size);
    if (windows.cols() != w * m) {
      throw Error(ErrorCode::ShapeMismatch, "window width " + std::to_string(windows.cols()) +
                                                " differs from the fitted width " + std::to_string(w * m));
    }
    Matrix out(windows.rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
      Vector col = Vector::Constant(windows.rows(), ar->intercepts(c));
      for (Eigen::Index k = 0; k < w; ++k) col += ar->coefficients(c, k) * windows.col(k * m + c);
      out.col(c) = col;
    }
    return out;
  }
  const auto& mlp = std::get<MlpModel>(model);
  if (windows.cols() != static_cast<Eigen::Index>(mlp.input_width)) {
    throw Error(ErrorCode::ShapeMismatch, "window width " + std::to_string(windows.cols()) +
                                              " differs from the fitted width " +
                                              std::to_string(mlp.input_width));
  }
  return mlp.net.forward(windows);
}

AeModel fit_autoencoder(const Matrix& windows, const AutoencoderHyperparams& hp) {
  if (windows.rows() == 0) throw Error(ErrorCode::InvalidArgument, "autoencoder needs at least one window");
  if (hp.latent_dim == 0 || hp.latent_dim >= static_cast<std::size_t>(windows.cols())) {
    throw Error(ErrorCode::InvalidArgument,
                "latent_dim must be in [1, window width), got " + std::to_string(hp.latent_dim));
  }
  require_finite(windows, "windows");
  AeModel model;
  model.width = static_cast<std::size_t>(windows.cols());
  model.net = train_dense(windows, windows, hp.latent_dim, hp.learning_rate, hp.epochs, hp.seed);
  return model;
}

Matrix reconstruct(const AeModel& model, const Matrix& windows) {
  if (windows.cols() != static_cast<Eigen::Index>(model.width)) {
    throw Error(ErrorCode::ShapeMismatch, "window width differs from the fitted autoencoder");
  }
  return model.net.forward(windows);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  }
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::CorruptModel, "matrix payload has the wrong size");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

namespace {

nlohmann::json net_to_json(const DenseNet& net) {
  return {{"w1", matrix_to_json(net.w1)},
          {"b1", vector_to_json(net.b1)},
          {"w2", matrix_to_json(net.w2)},
          {"b2", vector_to_json(net.b2)}};
}

DenseNet net_from_json(const nlohmann::json& j) {
  DenseNet net;
  net.w1 = matrix_from_json(j.at("w1"));
  net.b1 = vector_from_json(j.at("b1"));
  net.w2 = matrix_from_json(j.at("w2"));
  net.b2 = vector_from_json(j.at("b2"));
  return net;
}

}  // namespace

nlohmann::json to_json(const ArModel& model) {
  return {{"window_size", model.window_size},
          {"channels", model.channels},
          {"coefficients", matrix_to_json(model.coefficients)},
          {"intercepts", vector_to_json(model.intercepts)}};
}

nlohmann::json to_json(const MlpModel& model) {
  return {{"input_width", model.input_width},
          {"output_width", model.output_width},
          {"net", net_to_json(model.net)}};
}

nlohmann::json to_json(const AeModel& model) {
  return {{"width", model.width}, {"net", net_to_json(model.net)}};
}

ArModel ar_from_json(const nlohmann::json& j) {
  ArModel model;
  model.window_size = j.at("window_size").get<std::size_t>();
  model.channels = j.at("channels").get<std::size_t>();
  model.coefficients = matrix_from_json(j.at("coefficients"));
  model.intercepts = vector_from_json(j.at("intercepts"));
  return model;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  MlpModel model;
  model.input_width = j.at("input_width").get<std::size_t>();
  model.output_width = j.at("output_width").get<std::size_t>();
  model.net = net_from_json(j.at("net"));
  return model;
}

AeModel ae_from_json(const nlohmann::json& j) {
  AeModel model;
  model.width = j.at("width").get<std::size_t>();
  model.net = net_from_json(j.at("net"));
  return model;
}

}  // namespace tsad
