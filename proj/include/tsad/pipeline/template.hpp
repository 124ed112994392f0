#pragma once

#include "tsad/primitives/primitive.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tsad {

struct TemplateStep {
  std::string id;
  std::string primitive;
  nlohmann::json config = nlohmann::json::object();  // static overrides of primitive defaults
};

struct TemplateEdge {
  std::string from;
  std::string to;
  Slot slot = Slot::values;
};

// "<step_id>.<param>"
struct HyperparamKey {
  std::string step;
  std::string param;

  std::string str() const { return step + "." + param; }
  static HyperparamKey parse(const std::string& text);
  friend auto operator<=>(const HyperparamKey&, const HyperparamKey&) = default;
};

/// A DAG of primitive steps with data-flow edges and a joint tunable space.
/// Instances only come out of load_template / validate_template and are
/// immutable afterwards.
class Template {
 public:
  const std::string& name() const noexcept { return name_; }
  const std::vector<TemplateStep>& steps() const noexcept { return steps_; }
  const std::vector<TemplateEdge>& edges() const noexcept { return edges_; }
  const std::map<HyperparamKey, HyperparamSpec>& space() const noexcept { return space_; }

  // Step indices in execution order: topological, ties by declaration order.
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  const Primitive& primitive(std::size_t step) const { return *primitives_.at(step); }
  std::size_t step_index(const std::string& id) const;

  // Defaults for step `index`: primitive defaults, then the static config.
  const ParamSet& static_params(std::size_t index) const { return static_params_.at(index); }

  nlohmann::json to_json() const;

  friend std::shared_ptr<const Template> load_template(const nlohmann::json& json,
                                                       const PrimitiveRegistry& registry);

 private:
  std::string name_;
  std::vector<TemplateStep> steps_;
  std::vector<TemplateEdge> edges_;
  std::map<HyperparamKey, HyperparamSpec> space_;
  std::vector<std::size_t> order_;
  std::vector<const Primitive*> primitives_;
  std::vector<ParamSet> static_params_;
};

using TemplatePtr = std::shared_ptr<const Template>;

/// Parse and fully validate a template: schema, unknown keys, primitives,
/// hyperparameter specs, cycles and slot satisfaction. Error messages name the
/// offending step.
///
/// Throws SchemaError, CycleError, UnsatisfiedSlot, UnknownPrimitive or
/// BadHyperparamSpec.
TemplatePtr load_template(const nlohmann::json& json,
                          const PrimitiveRegistry& registry = default_registry());
TemplatePtr parse_template(std::string_view json_text,
                          const PrimitiveRegistry& registry = default_registry());
TemplatePtr load_template_file(const std::filesystem::path& path,
                               const PrimitiveRegistry& registry = default_registry());

/// Resolve a template argument: an existing file path, or the name of a
/// bundled template (with or without the .json suffix).
std::filesystem::path resolve_template_path(const std::string& name_or_path);
std::filesystem::path bundled_template_dir();

enum class SpaceScope { full, unsupervised_subpipeline };

/// Tunables in execution order, then by parameter name. The unsupervised
/// scope keeps preprocessing and modeling steps only.
std::vector<std::pair<HyperparamKey, HyperparamSpec>> hyperparameter_space(const Template& tmpl,
                                                                           SpaceScope scope);

}  // namespace tsad
