#pragma once

#include "tsad/primitives/data_context.hpp"
#include "tsad/primitives/hyperparam.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tsad {

enum class Engine { preprocessing, modeling, postprocessing };

std::string_view to_string(Engine engine) noexcept;

struct PrimitiveMeta {
  std::string name;
  Engine engine = Engine::preprocessing;
  std::string description;
  std::optional<std::string> doc_url;
  std::map<std::string, HyperparamSpec> hyperparameters;
  std::vector<Slot> reads;
  std::vector<Slot> fit_reads;  // read only while fitting (e.g. labels)
  std::vector<Slot> writes;

  bool reads_slot(Slot slot) const;
  bool writes_slot(Slot slot) const;
};

nlohmann::json to_json(const PrimitiveMeta& meta);

/// Fitted state of one step: scaler parameters, model weights, inferred
/// intervals. Immutable once produced and shareable across threads.
class StepState {
 public:
  virtual ~StepState() = default;
  virtual nlohmann::json to_json() const = 0;
};

/// A single-responsibility pipeline step. Implementations are stateless
/// objects; everything learned during `fit` lives in the returned StepState.
class Primitive {
 public:
  virtual ~Primitive() = default;

  virtual const PrimitiveMeta& meta() const = 0;

  /// Learn from the context and transform it in place. Stateless primitives
  /// return nullptr.
  virtual std::shared_ptr<const StepState> fit(DataContext& ctx, const ParamSet& params) const = 0;

  /// Transform the context using previously fitted state.
  virtual void produce(DataContext& ctx, const ParamSet& params, const StepState* state) const = 0;

  virtual std::shared_ptr<const StepState> load_state(const nlohmann::json& j) const;
};

class PrimitiveRegistry {
 public:
  void add(std::unique_ptr<Primitive> primitive);

  const Primitive* find(std::string_view name) const noexcept;
  // Throws UnknownPrimitive.
  const Primitive& at(std::string_view name) const;

  std::vector<const Primitive*> list() const;
  nlohmann::json catalog() const;

 private:
  std::vector<std::unique_ptr<Primitive>> primitives_;
};

/// The built-in catalog across the three engines.
const PrimitiveRegistry& default_registry();

}  // namespace tsad
