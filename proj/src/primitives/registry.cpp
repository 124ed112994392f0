#include "tsad/core/error.hpp"
#include "tsad/feedback/classifier.hpp"
#include "tsad/primitives/models.hpp"
#include "tsad/primitives/postprocessing.hpp"
#include "tsad/primitives/preprocessing.hpp"
#include "tsad/primitives/primitive.hpp"

#include <algorithm>
#include <cmath>

namespace tsad {

std::string_view to_string(Engine engine) noexcept {
  switch (engine) {
    case Engine::preprocessing: return "preprocessing";
    case Engine::modeling: return "modeling";
    case Engine::postprocessing: return "postprocessing";
  }
  return "preprocessing";
}

bool PrimitiveMeta::reads_slot(Slot slot) const {
  return std::find(reads.begin(), reads.end(), slot) != reads.end() ||
         std::find(fit_reads.begin(), fit_reads.end(), slot) != fit_reads.end();
}

bool PrimitiveMeta::writes_slot(Slot slot) const {
  return std::find(writes.begin(), writes.end(), slot) != writes.end();
}

nlohmann::json to_json(const PrimitiveMeta& meta) {
  nlohmann::json j;
  j["name"] = meta.name;
  j["engine"] = to_string(meta.engine);
  j["description"] = meta.description;
  j["doc_url"] = meta.doc_url ? nlohmann::json(*meta.doc_url) : nlohmann::json(nullptr);
  auto slots = [](const std::vector<Slot>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (Slot s : list) out.push_back(to_string(s));
    return out;
  };
  j["reads"] = slots(meta.reads);
  j["fit_reads"] = slots(meta.fit_reads);
  j["writes"] = slots(meta.writes);
  j["hyperparameters"] = nlohmann::json::object();
  for (const auto& [name, spec] : meta.hyperparameters) j["hyperparameters"][name] = spec_to_json(spec);
  return j;
}

std::shared_ptr<const StepState> Primitive::load_state(const nlohmann::json&) const { return nullptr; }

void PrimitiveRegistry::add(std::unique_ptr<Primitive> primitive) {
  if (find(primitive->meta().name) != nullptr) {
    throw Error(ErrorCode::InvalidArgument, "duplicate primitive " + primitive->meta().name);
  }
  primitives_.push_back(std::move(primitive));
}

const Primitive* PrimitiveRegistry::find(std::string_view name) const noexcept {
  for (const auto& p : primitives_) {
    if (p->meta().name == name) return p.get();
  }
  return nullptr;
}

const Primitive& PrimitiveRegistry::at(std::string_view name) const {
  const Primitive* p = find(name);
  if (p == nullptr) {
    throw Error(ErrorCode::UnknownPrimitive, "no primitive named '" + std::string(name) + "'",
                std::string(name));
  }
  return *p;
}

std::vector<const Primitive*> PrimitiveRegistry::list() const {
  std::vector<const Primitive*> out;
  for (const auto& p : primitives_) out.push_back(p.get());
  return out;
}

nlohmann::json PrimitiveRegistry::catalog() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : primitives_) out.push_back(to_json(p->meta()));
  return out;
}

namespace {

constexpr std::int64_t kMaxSeed = 2147483647;

// State held as a JSON document plus a decoded payload.
template <typename T>
class TypedState final : public StepState {
 public:
  TypedState(T value, nlohmann::json json) : value_(std::move(value)), json_(std::move(json)) {}
  nlohmann::json to_json() const override { return json_; }
  const T& value() const noexcept { return value_; }

 private:
  T value_;
  nlohmann::json json_;
};

template <typename T>
const T& state_as(const StepState* state, const std::string& name) {
  const auto* typed = dynamic_cast<const TypedState<T>*>(state);
  if (typed == nullptr) throw Error(ErrorCode::CorruptModel, name + " has no fitted state", name);
  return typed->value();
}

class PrimitiveBase : public Primitive {
 public:
  explicit PrimitiveBase(PrimitiveMeta meta) : meta_(std::move(meta)) {}
  const PrimitiveMeta& meta() const override { return meta_; }

 protected:
  PrimitiveMeta meta_;
};

class TimeSegmentsAggregate final : public PrimitiveBase {
 public:
  TimeSegmentsAggregate()
      : PrimitiveBase({"time_segments_aggregate",
                       Engine::preprocessing,
                       "Resample onto a regular grid by aggregating samples in each interval.",
                       std::nullopt,
                       {{"interval", HyperparamSpec::int_range(0, 604800, 0)},
                        {"method", HyperparamSpec::categorical({"mean", "median"}, "mean")}},
                       {Slot::timestamps, Slot::values},
                       {},
                       {Slot::timestamps, Slot::values}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    Timestamp interval = params.get_int("interval");
    // 0 selects the median spacing of the training signal.
    if (interval == 0) interval = median_spacing(ctx.require_timestamps());
    auto state = std::make_shared<TypedState<Timestamp>>(interval, nlohmann::json{{"interval", interval}});
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet& params, const StepState* state) const override {
    const Timestamp interval = state_as<Timestamp>(state, meta_.name);
    auto out = time_segments_aggregate(ctx.require_timestamps(), ctx.require_values(), interval,
                                       parse_aggregate_method(params.get_string("method")));
    ctx.timestamps = std::move(out.timestamps);
    ctx.values = std::move(out.values);
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    const auto interval = j.at("interval").get<Timestamp>();
    return std::make_shared<TypedState<Timestamp>>(interval, j);
  }
};

class ImputeMean final : public PrimitiveBase {
 public:
  ImputeMean()
      : PrimitiveBase({"impute_mean",
                       Engine::preprocessing,
                       "Replace missing values with the channel mean seen during fit.",
                       std::nullopt,
                       {},
                       {Slot::values},
                       {},
                       {Slot::values}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    Vector means = channel_means(ctx.require_values());
    auto state = std::make_shared<TypedState<Vector>>(means, nlohmann::json{{"means", vector_to_json(means)}});
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.values = impute_with(ctx.require_values(), state_as<Vector>(state, meta_.name));
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    return std::make_shared<TypedState<Vector>>(vector_from_json(j.at("means")), j);
  }
};

class ScaleMinmax final : public PrimitiveBase {
 public:
  ScaleMinmax()
      : PrimitiveBase({"scale_minmax",
                       Engine::preprocessing,
                       "Linearly map each channel's fitted [min, max] onto [lo, hi].",
                       std::nullopt,
                       {{"lo", HyperparamSpec::float_range(-1e6, 1e6, -1.0)},
                        {"hi", HyperparamSpec::float_range(-1e6, 1e6, 1.0)}},
                       {Slot::values},
                       {},
                       {Slot::values}}) {}

  static nlohmann::json encode(const ScalerParams& p) {
    return {{"min", vector_to_json(p.min)}, {"max", vector_to_json(p.max)}, {"lo", p.lo}, {"hi", p.hi}};
  }

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    auto scaled = scale_minmax(ctx.require_values(), params.get_double("lo"), params.get_double("hi"));
    ctx.values = std::move(scaled.values);
    return std::make_shared<TypedState<ScalerParams>>(scaled.params, encode(scaled.params));
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.values = apply_minmax(ctx.require_values(), state_as<ScalerParams>(state, meta_.name));
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    ScalerParams p;
    p.min = vector_from_json(j.at("min"));
    p.max = vector_from_json(j.at("max"));
    p.lo = j.at("lo").get<double>();
    p.hi = j.at("hi").get<double>();
    return std::make_shared<TypedState<ScalerParams>>(p, j);
  }
};

class ScaleStandard final : public PrimitiveBase {
 public:
  ScaleStandard()
      : PrimitiveBase({"scale_standard",
                       Engine::preprocessing,
                       "z-score normalisation with the fitted channel mean and sd.",
                       std::nullopt,
                       {},
                       {Slot::values},
                       {},
                       {Slot::values}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    StandardParams p = fit_standard(ctx.require_values());
    auto state = std::make_shared<TypedState<StandardParams>>(
        p, nlohmann::json{{"mean", vector_to_json(p.mean)}, {"sd", vector_to_json(p.sd)}});
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.values = apply_standard(ctx.require_values(), state_as<StandardParams>(state, meta_.name));
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    StandardParams p{vector_from_json(j.at("mean")), vector_from_json(j.at("sd"))};
    return std::make_shared<TypedState<StandardParams>>(p, j);
  }
};

class MakeWindows final : public PrimitiveBase {
 public:
  MakeWindows()
      : PrimitiveBase({"make_windows",
                       Engine::preprocessing,
                       "Cut the series into sliding windows with forecast or reconstruction targets.",
                       std::nullopt,
                       {{"window_size", HyperparamSpec::int_range(1, 500, 10)},
                        {"step", HyperparamSpec::int_range(1, 100, 1)},
                        {"horizon", HyperparamSpec::int_range(0, 50, 1)}},
                       {Slot::values, Slot::timestamps},
                       {},
                       {Slot::windows, Slot::targets, Slot::target_timestamps}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    produce(ctx, params, nullptr);
    return nullptr;
  }

  void produce(DataContext& ctx, const ParamSet& params, const StepState*) const override {
    const auto& ts = ctx.require_timestamps();
    Windows w = make_windows(ctx.require_values(), ts, static_cast<std::size_t>(params.get_int("window_size")),
                             static_cast<std::size_t>(params.get_int("step")),
                             static_cast<std::size_t>(params.get_int("horizon")));
    WindowSet set;
    set.window_size = w.window_size;
    set.channels = w.channels;
    set.start_ts.reserve(w.starts.size());
    set.end_ts.reserve(w.starts.size());
    for (std::size_t start : w.starts) {
      set.start_ts.push_back(ts[start]);
      set.end_ts.push_back(ts[start + w.window_size - 1]);
    }
    set.data = std::move(w.windows);
    ctx.windows = std::move(set);
    ctx.targets = std::move(w.targets);
    ctx.target_timestamps = std::move(w.target_timestamps);
  }
};

class ArForecaster final : public PrimitiveBase {
 public:
  ArForecaster()
      : PrimitiveBase({"ar_forecaster",
                       Engine::modeling,
                       "Per-channel autoregressive model fitted by least squares.",
                       std::nullopt,
                       {},
                       {Slot::windows},
                       {Slot::targets},
                       {Slot::predictions}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    const auto& windows = ctx.require_windows();
    ArModel model = fit_ar(windows.data, ctx.require_targets(), windows.channels);
    auto state = std::make_shared<TypedState<ForecastModel>>(ForecastModel(model), tsad::to_json(model));
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.predictions = forecast(state_as<ForecastModel>(state, meta_.name), ctx.require_windows().data);
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    return std::make_shared<TypedState<ForecastModel>>(ForecastModel(ar_from_json(j)), j);
  }
};

MlpHyperparams mlp_params(const ParamSet& params) {
  MlpHyperparams hp;
  hp.hidden = static_cast<std::size_t>(params.get_int("hidden"));
  hp.learning_rate = params.get_double("learning_rate");
  hp.epochs = static_cast<std::size_t>(params.get_int("epochs"));
  hp.seed = static_cast<std::uint64_t>(params.get_int("seed"));
  return hp;
}

class MlpForecaster final : public PrimitiveBase {
 public:
  MlpForecaster()
      : PrimitiveBase({"mlp_forecaster",
                       Engine::modeling,
                       "One-hidden-layer tanh network trained by full-batch gradient descent.",
                       std::nullopt,
                       {{"hidden", HyperparamSpec::int_range(1, 256, 32)},
                        {"learning_rate", HyperparamSpec::float_range(1e-5, 1.0, 0.01)},
                        {"epochs", HyperparamSpec::int_range(1, 100000, 200)},
                        {"seed", HyperparamSpec::int_range(0, kMaxSeed, 0)}},
                       {Slot::windows},
                       {Slot::targets},
                       {Slot::predictions}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    MlpModel model = fit_mlp(ctx.require_windows().data, ctx.require_targets(), mlp_params(params));
    auto json = tsad::to_json(model);
    auto state = std::make_shared<TypedState<ForecastModel>>(ForecastModel(std::move(model)), std::move(json));
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.predictions = forecast(state_as<ForecastModel>(state, meta_.name), ctx.require_windows().data);
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    return std::make_shared<TypedState<ForecastModel>>(ForecastModel(mlp_from_json(j)), j);
  }
};

class DenseAutoencoder final : public PrimitiveBase {
 public:
  DenseAutoencoder()
      : PrimitiveBase({"dense_autoencoder",
                       Engine::modeling,
                       "Dense autoencoder reconstructing each flattened window.",
                       std::nullopt,
                       {{"latent_dim", HyperparamSpec::int_range(1, 256, 4)},
                        {"learning_rate", HyperparamSpec::float_range(1e-5, 1.0, 0.01)},
                        {"epochs", HyperparamSpec::int_range(1, 100000, 200)},
                        {"seed", HyperparamSpec::int_range(0, kMaxSeed, 0)}},
                       {Slot::windows},
                       {},
                       {Slot::predictions}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    AutoencoderHyperparams hp;
    hp.latent_dim = static_cast<std::size_t>(params.get_int("latent_dim"));
    hp.learning_rate = params.get_double("learning_rate");
    hp.epochs = static_cast<std::size_t>(params.get_int("epochs"));
    hp.seed = static_cast<std::uint64_t>(params.get_int("seed"));
    AeModel model = fit_autoencoder(ctx.require_windows().data, hp);
    auto json = tsad::to_json(model);
    auto state = std::make_shared<TypedState<AeModel>>(std::move(model), std::move(json));
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    ctx.predictions = reconstruct(state_as<AeModel>(state, meta_.name), ctx.require_windows().data);
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    return std::make_shared<TypedState<AeModel>>(ae_from_json(j), j);
  }
};

class WindowClassifier final : public PrimitiveBase {
 public:
  WindowClassifier()
      : PrimitiveBase({"window_classifier",
                       Engine::modeling,
                       "Logistic window classifier trained on windows overlapping labelled events.",
                       std::nullopt,
                       {{"learning_rate", HyperparamSpec::float_range(1e-4, 10.0, 0.1)},
                        {"epochs", HyperparamSpec::int_range(1, 100000, 500)},
                        {"l2", HyperparamSpec::float_range(0.0, 10.0, 1e-4)},
                        {"seed", HyperparamSpec::int_range(0, kMaxSeed, 0)}},
                       {Slot::windows},
                       {Slot::labels},
                       {Slot::predictions}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    const auto& windows = ctx.require_windows();
    const auto& labels = ctx.require_labels();
    std::vector<int> y(windows.start_ts.size(), 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const Event span{windows.start_ts[i], windows.end_ts[i]};
      for (const auto& e : labels) {
        if (overlaps(span, e)) {
          y[i] = 1;
          break;
        }
      }
    }
    ClassifierHyperparams hp;
    hp.learning_rate = params.get_double("learning_rate");
    hp.epochs = static_cast<std::size_t>(params.get_int("epochs"));
    hp.l2 = params.get_double("l2");
    hp.seed = static_cast<std::uint64_t>(params.get_int("seed"));
    ClassifierModel model = train_classifier(windows.data, y, windows.window_size, windows.channels, hp);
    auto json = tsad::to_json(model);
    auto state = std::make_shared<TypedState<ClassifierModel>>(std::move(model), std::move(json));
    produce(ctx, params, state.get());
    return state;
  }

  void produce(DataContext& ctx, const ParamSet&, const StepState* state) const override {
    const Vector p = predict_proba(state_as<ClassifierModel>(state, meta_.name), ctx.require_windows().data);
    ctx.predictions = Matrix(p);
  }

  std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const override {
    return std::make_shared<TypedState<ClassifierModel>>(classifier_from_json(j), j);
  }
};

class RegressionErrors final : public PrimitiveBase {
 public:
  RegressionErrors()
      : PrimitiveBase({"regression_errors",
                       Engine::postprocessing,
                       "Absolute point-wise difference between predictions and targets.",
                       std::nullopt,
                       {{"smooth", HyperparamSpec::boolean(false)},
                        {"ewma_alpha", HyperparamSpec::float_range(0.01, 1.0, 0.3)}},
                       {Slot::targets, Slot::predictions},
                       {},
                       {Slot::errors}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    produce(ctx, params, nullptr);
    return nullptr;
  }

  void produce(DataContext& ctx, const ParamSet& params, const StepState*) const override {
    ctx.errors = regression_errors(ctx.require_targets(), ctx.require_predictions(),
                                   params.get_bool("smooth"), params.get_double("ewma_alpha"));
  }
};

class FindAnomalies final : public PrimitiveBase {
 public:
  FindAnomalies()
      : PrimitiveBase({"find_anomalies",
                       Engine::postprocessing,
                       "Dynamic threshold over the error sequence with percentage pruning.",
                       std::nullopt,
                       {{"z_min", HyperparamSpec::float_range(0.0, 20.0, 2.0)},
                        {"z_max", HyperparamSpec::float_range(0.0, 50.0, 10.0)},
                        {"z_step", HyperparamSpec::float_range(0.01, 5.0, 0.5)},
                        {"prune_p", HyperparamSpec::float_range(0.0, 1.0, 0.13)},
                        {"min_gap_samples", HyperparamSpec::int_range(1, 10000, 1)},
                        {"window_size", HyperparamSpec::int_range(0, 1000000, 0)},
                        {"window_step", HyperparamSpec::int_range(0, 1000000, 0)}},
                       {Slot::errors, Slot::target_timestamps},
                       {},
                       {Slot::events}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    produce(ctx, params, nullptr);
    return nullptr;
  }

  void produce(DataContext& ctx, const ParamSet& params, const StepState*) const override {
    ThresholdParams tp;
    tp.z_min = params.get_double("z_min");
    tp.z_max = params.get_double("z_max");
    tp.z_step = params.get_double("z_step");
    tp.prune_p = params.get_double("prune_p");
    tp.min_gap_samples = static_cast<std::size_t>(params.get_int("min_gap_samples"));
    tp.window_size = static_cast<std::size_t>(params.get_int("window_size"));
    tp.window_step = static_cast<std::size_t>(params.get_int("window_step"));
    ctx.events = find_anomalies(ctx.require_errors(), ctx.require_target_timestamps(), tp);
  }
};

class WindowEvents final : public PrimitiveBase {
 public:
  WindowEvents()
      : PrimitiveBase({"window_events",
                       Engine::postprocessing,
                       "Merge windows whose anomaly probability exceeds the threshold into events.",
                       std::nullopt,
                       {{"merge", HyperparamSpec::int_range(0, 1000, 0)},
                        {"threshold", HyperparamSpec::float_range(0.0, 1.0, 0.5)}},
                       {Slot::predictions, Slot::windows},
                       {},
                       {Slot::events}}) {}

  std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const override {
    produce(ctx, params, nullptr);
    return nullptr;
  }

  void produce(DataContext& ctx, const ParamSet& params, const StepState*) const override {
    const auto& windows = ctx.require_windows();
    const Matrix& p = ctx.require_predictions();
    if (p.cols() != 1 || static_cast<std::size_t>(p.rows()) != windows.start_ts.size()) {
      throw Error(ErrorCode::ShapeMismatch, "window_events needs one probability per window");
    }
    ctx.events = merge_marked_windows(p.col(0), windows.start_ts, windows.end_ts,
                                      static_cast<std::size_t>(params.get_int("merge")),
                                      params.get_double("threshold"));
  }
};

PrimitiveRegistry build_default_registry() {
  PrimitiveRegistry registry;
  registry.add(std::make_unique<TimeSegmentsAggregate>());
  registry.add(std::make_unique<ImputeMean>());
  registry.add(std::make_unique<ScaleMinmax>());
  registry.add(std::make_unique<ScaleStandard>());
  registry.add(std::make_unique<MakeWindows>());
  registry.add(std::make_unique<ArForecaster>());
  registry.add(std::make_unique<MlpForecaster>());
  registry.add(std::make_unique<DenseAutoencoder>());
  registry.add(std::make_unique<WindowClassifier>());
  registry.add(std::make_unique<RegressionErrors>());
  registry.add(std::make_unique<FindAnomalies>());
  registry.add(std::make_unique<WindowEvents>());
  return registry;
}

}  // namespace

const PrimitiveRegistry& default_registry() {
  static const PrimitiveRegistry registry = build_default_registry();
  return registry;
}

}  // namespace tsad
