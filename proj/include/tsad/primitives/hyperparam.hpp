#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tsad {

using HyperparamValue = std::variant<std::int64_t, double, bool, std::string>;

enum class HyperparamKind { int_range, float_range, categorical, boolean };

std::string_view to_string(HyperparamKind kind) noexcept;
HyperparamKind parse_hyperparam_kind(std::string_view text);

/// Declared domain of one hyperparameter: a closed numeric range, a list of
/// categorical choices, or a boolean, plus a default inside that domain.
struct HyperparamSpec {
  HyperparamKind kind = HyperparamKind::float_range;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> choices;
  HyperparamValue default_value = 0.0;

  static HyperparamSpec int_range(std::int64_t lo, std::int64_t hi, std::int64_t def);
  static HyperparamSpec float_range(double lo, double hi, double def);
  static HyperparamSpec categorical(std::vector<std::string> choices, std::string def);
  static HyperparamSpec boolean(bool def);

  bool contains(const HyperparamValue& value) const;

  // Throws BadHyperparamSpec when lo >= hi, choices are empty, or the default
  // lies outside the domain.
  void validate(const std::string& key) const;

  // Coerce a JSON scalar into this spec's value type (ints stay ints, etc).
  // Throws OutOfRange when the value has the wrong type.
  HyperparamValue value_from_json(const nlohmann::json& j, const std::string& key) const;

  friend bool operator==(const HyperparamSpec&, const HyperparamSpec&) = default;
};

nlohmann::json value_to_json(const HyperparamValue& value);
std::string value_to_string(const HyperparamValue& value);

nlohmann::json spec_to_json(const HyperparamSpec& spec);
HyperparamSpec spec_from_json(const nlohmann::json& j, const std::string& key);

/// Resolved hyperparameters of one step, keyed by parameter name.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::map<std::string, HyperparamValue> values) : values_(std::move(values)) {}

  void set(const std::string& name, HyperparamValue value) { values_[name] = std::move(value); }
  bool has(const std::string& name) const { return values_.count(name) > 0; }

  std::int64_t get_int(const std::string& name) const;
  double get_double(const std::string& name) const;  // ints widen
  bool get_bool(const std::string& name) const;
  const std::string& get_string(const std::string& name) const;

  const std::map<std::string, HyperparamValue>& values() const noexcept { return values_; }
  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  const HyperparamValue& at(const std::string& name) const;
  std::map<std::string, HyperparamValue> values_;
};

}  // namespace tsad
