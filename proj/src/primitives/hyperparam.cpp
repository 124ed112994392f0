#include "tsad/primitives/hyperparam.hpp"

#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace tsad {

std::string_view to_string(HyperparamKind kind) noexcept {
  switch (kind) {
    case HyperparamKind::int_range: return "int_range";
    case HyperparamKind::float_range: return "float_range";
    case HyperparamKind::categorical: return "categorical";
    case HyperparamKind::boolean: return "boolean";
  }
  return "float_range";
}

HyperparamKind parse_hyperparam_kind(std::string_view text) {
  if (text == "int_range") return HyperparamKind::int_range;
  if (text == "float_range") return HyperparamKind::float_range;
  if (text == "categorical") return HyperparamKind::categorical;
  if (text == "boolean") return HyperparamKind::boolean;
  throw Error(ErrorCode::BadHyperparamSpec, "unknown hyperparameter kind '" + std::string(text) + "'");
}

HyperparamSpec HyperparamSpec::int_range(std::int64_t lo, std::int64_t hi, std::int64_t def) {
  HyperparamSpec s;
  s.kind = HyperparamKind::int_range;
  s.lo = static_cast<double>(lo);
  s.hi = static_cast<double>(hi);
  s.default_value = def;
  return s;
}

HyperparamSpec HyperparamSpec::float_range(double lo, double hi, double def) {
  HyperparamSpec s;
  s.kind = HyperparamKind::float_range;
  s.lo = lo;
  s.hi = hi;
  s.default_value = def;
  return s;
}

HyperparamSpec HyperparamSpec::categorical(std::vector<std::string> choices, std::string def) {
  HyperparamSpec s;
  s.kind = HyperparamKind::categorical;
  s.lo = 0.0;
  s.hi = 0.0;
  s.choices = std::move(choices);
  s.default_value = std::move(def);
  return s;
}

HyperparamSpec HyperparamSpec::boolean(bool def) {
  HyperparamSpec s;
  s.kind = HyperparamKind::boolean;
  s.lo = 0.0;
  s.hi = 0.0;
  s.default_value = def;
  return s;
}

bool HyperparamSpec::contains(const HyperparamValue& value) const {
  switch (kind) {
    case HyperparamKind::int_range: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v && static_cast<double>(*v) >= lo && static_cast<double>(*v) <= hi;
    }
    case HyperparamKind::float_range: {
      double x = 0.0;
      if (const auto* d = std::get_if<double>(&value)) {
        x = *d;
      } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
        x = static_cast<double>(*i);
      } else {
        return false;
      }
      return std::isfinite(x) && x >= lo && x <= hi;
    }
    case HyperparamKind::categorical: {
      const auto* v = std::get_if<std::string>(&value);
      return v && std::find(choices.begin(), choices.end(), *v) != choices.end();
    }
    case HyperparamKind::boolean:
      return std::holds_alternative<bool>(value);
  }
  return false;
}

void HyperparamSpec::validate(const std::string& key) const {
  if ((kind == HyperparamKind::int_range || kind == HyperparamKind::float_range) && !(lo < hi)) {
    throw Error(ErrorCode::BadHyperparamSpec, key + ": range needs lo < hi", key);
  }
  if (kind == HyperparamKind::categorical && choices.empty()) {
    throw Error(ErrorCode::BadHyperparamSpec, key + ": categorical spec has no choices", key);
  }
  if (!contains(default_value)) {
    throw Error(ErrorCode::BadHyperparamSpec,
                key + ": default " + value_to_string(default_value) + " outside its domain", key);
  }
}

HyperparamValue HyperparamSpec::value_from_json(const nlohmann::json& j, const std::string& key) const {
  switch (kind) {
    case HyperparamKind::int_range:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      if (j.is_number_float()) {
        const double d = j.get<double>();
        if (std::floor(d) == d) return static_cast<std::int64_t>(d);
      }
      break;
    case HyperparamKind::float_range:
      if (j.is_number()) return j.get<double>();
      break;
    case HyperparamKind::categorical:
      if (j.is_string()) return j.get<std::string>();
      break;
    case HyperparamKind::boolean:
      if (j.is_boolean()) return j.get<bool>();
      break;
  }
  throw Error(ErrorCode::OutOfRange,
              key + ": value " + j.dump() + " does not fit a " + std::string(to_string(kind)), key);
}

nlohmann::json value_to_json(const HyperparamValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

std::string value_to_string(const HyperparamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return value_to_json(value).dump();
}

nlohmann::json spec_to_json(const HyperparamSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case HyperparamKind::int_range:
      j["lo"] = static_cast<std::int64_t>(spec.lo);
      j["hi"] = static_cast<std::int64_t>(spec.hi);
      break;
    case HyperparamKind::float_range:
      j["lo"] = spec.lo;
      j["hi"] = spec.hi;
      break;
    case HyperparamKind::categorical:
      j["choices"] = spec.choices;
      break;
    case HyperparamKind::boolean:
      break;
  }
  j["default"] = value_to_json(spec.default_value);
  return j;
}

HyperparamSpec spec_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_object()) throw Error(ErrorCode::BadHyperparamSpec, key + ": spec must be an object", key);
  static const std::vector<std::string> allowed{"kind", "lo", "hi", "choices", "default"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw Error(ErrorCode::BadHyperparamSpec, key + ": unknown spec field '" + k + "'", key);
    }
  }
  if (!j.contains("kind") || !j["kind"].is_string() || !j.contains("default")) {
    throw Error(ErrorCode::BadHyperparamSpec, key + ": spec needs 'kind' and 'default'", key);
  }
  HyperparamSpec spec;
  spec.kind = parse_hyperparam_kind(j["kind"].get<std::string>());
  auto number = [&](const char* field) {
    if (!j.contains(field) || !j[field].is_number()) {
      throw Error(ErrorCode::BadHyperparamSpec, key + ": range spec needs numeric '" + field + "'", key);
    }
    return j[field].get<double>();
  };
  switch (spec.kind) {
    case HyperparamKind::int_range:
    case HyperparamKind::float_range:
      spec.lo = number("lo");
      spec.hi = number("hi");
      break;
    case HyperparamKind::categorical:
      if (!j.contains("choices") || !j["choices"].is_array()) {
        throw Error(ErrorCode::BadHyperparamSpec, key + ": categorical spec needs 'choices'", key);
      }
      for (const auto& c : j["choices"]) {
        if (!c.is_string()) throw Error(ErrorCode::BadHyperparamSpec, key + ": choices must be strings", key);
        spec.choices.push_back(c.get<std::string>());
      }
      spec.lo = spec.hi = 0.0;
      break;
    case HyperparamKind::boolean:
      spec.lo = spec.hi = 0.0;
      break;
  }
  try {
    spec.default_value = spec.value_from_json(j["default"], key);
  } catch (const Error&) {
    throw Error(ErrorCode::BadHyperparamSpec, key + ": default has the wrong type", key);
  }
  spec.validate(key);
  return spec;
}

const HyperparamValue& ParamSet::at(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw Error(ErrorCode::UnknownHyperparam, "missing hyperparameter " + name, name);
  return it->second;
}

std::int64_t ParamSet::get_int(const std::string& name) const {
  const auto& v = at(name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw Error(ErrorCode::OutOfRange, name + " is not an integer", name);
}

double ParamSet::get_double(const std::string& name) const {
  const auto& v = at(name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Error(ErrorCode::OutOfRange, name + " is not a number", name);
}

bool ParamSet::get_bool(const std::string& name) const {
  const auto& v = at(name);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw Error(ErrorCode::OutOfRange, name + " is not a boolean", name);
}

const std::string& ParamSet::get_string(const std::string& name) const {
  const auto& v = at(name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw Error(ErrorCode::OutOfRange, name + " is not a string", name);
}

}  // namespace tsad
