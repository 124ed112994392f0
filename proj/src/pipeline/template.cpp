#include "tsad/pipeline/template.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef TSAD_TEMPLATE_DIR
#define TSAD_TEMPLATE_DIR "templates"
#endif

namespace tsad {
namespace {

void reject_unknown_keys(const nlohmann::json& object, std::initializer_list<const char*> allowed,
                         const std::string& where, const std::string& context) {
  for (const auto& [key, _] : object.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::SchemaError, where + ": unknown key '" + key + "'", context);
    }
  }
}

const std::string& require_string(const nlohmann::json& object, const char* key, const std::string& where,
                                  const std::string& context) {
  if (!object.contains(key) || !object[key].is_string() || object[key].get_ref<const std::string&>().empty()) {
    throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be a nonempty string", context);
  }
  return object[key].get_ref<const std::string&>();
}

bool range_within(const HyperparamSpec& inner, const HyperparamSpec& outer) {
  switch (inner.kind) {
    case HyperparamKind::int_range:
    case HyperparamKind::float_range:
      return inner.lo >= outer.lo && inner.hi <= outer.hi;
    case HyperparamKind::categorical:
      return std::all_of(inner.choices.begin(), inner.choices.end(), [&](const std::string& c) {
        return std::find(outer.choices.begin(), outer.choices.end(), c) != outer.choices.end();
      });
    case HyperparamKind::boolean:
      return true;
  }
  return false;
}

}  // namespace

HyperparamKey HyperparamKey::parse(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size()) {
    throw Error(ErrorCode::UnknownHyperparam, "hyperparameter key '" + text + "' is not <step>.<param>", text);
  }
  return {text.substr(0, dot), text.substr(dot + 1)};
}

std::size_t Template::step_index(const std::string& id) const {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].id == id) return i;
  }
  throw Error(ErrorCode::SchemaError, "no step named '" + id + "'", id);
}

nlohmann::json Template::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps_) {
    j["steps"].push_back({{"id", s.id}, {"primitive", s.primitive}, {"config", s.config}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges_) {
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"slot", to_string(e.slot)}});
  }
  j["hyperparameters"] = nlohmann::json::object();
  for (const auto& [key, spec] : space_) j["hyperparameters"][key.str()] = spec_to_json(spec);
  return j;
}

TemplatePtr load_template(const nlohmann::json& json, const PrimitiveRegistry& registry) {
  if (!json.is_object()) throw Error(ErrorCode::SchemaError, "template must be a JSON object");
  reject_unknown_keys(json, {"name", "steps", "edges", "hyperparameters"}, "template", "");

  auto tmpl = std::make_shared<Template>();
  tmpl->name_ = require_string(json, "name", "template", "");

  if (!json.contains("steps") || !json["steps"].is_array() || json["steps"].empty()) {
    throw Error(ErrorCode::SchemaError, "template: 'steps' must be a nonempty array");
  }
  std::set<std::string> ids;
  for (const auto& step_json : json["steps"]) {
    if (!step_json.is_object()) throw Error(ErrorCode::SchemaError, "template: each step must be an object");
    TemplateStep step;
    step.id = require_string(step_json, "id", "step", "");
    reject_unknown_keys(step_json, {"id", "primitive", "config"}, "step '" + step.id + "'", step.id);
    step.primitive = require_string(step_json, "primitive", "step '" + step.id + "'", step.id);
    if (!ids.insert(step.id).second) {
      throw Error(ErrorCode::SchemaError, "duplicate step id '" + step.id + "'", step.id);
    }
    const Primitive* primitive = registry.find(step.primitive);
    if (primitive == nullptr) {
      throw Error(ErrorCode::UnknownPrimitive,
                  "step '" + step.id + "' uses unknown primitive '" + step.primitive + "'", step.id);
    }
    ParamSet params;
    for (const auto& [name, spec] : primitive->meta().hyperparameters) params.set(name, spec.default_value);
    if (step_json.contains("config")) {
      if (!step_json["config"].is_object()) {
        throw Error(ErrorCode::SchemaError, "step '" + step.id + "': 'config' must be an object", step.id);
      }
      step.config = step_json["config"];
      for (const auto& [name, value] : step.config.items()) {
        const auto& declared = primitive->meta().hyperparameters;
        const auto it = declared.find(name);
        if (it == declared.end()) {
          throw Error(ErrorCode::SchemaError,
                      "step '" + step.id + "': primitive " + step.primitive + " has no parameter '" + name + "'",
                      step.id);
        }
        HyperparamValue v;
        try {
          v = it->second.value_from_json(value, step.id + "." + name);
        } catch (const Error&) {
          throw Error(ErrorCode::SchemaError, "step '" + step.id + "': config " + name + " has the wrong type",
                      step.id);
        }
        if (!it->second.contains(v)) {
          throw Error(ErrorCode::SchemaError, "step '" + step.id + "': config " + name + " outside its domain",
                      step.id);
        }
        params.set(name, v);
      }
    }
    tmpl->steps_.push_back(std::move(step));
    tmpl->primitives_.push_back(primitive);
    tmpl->static_params_.push_back(std::move(params));
  }

  const std::size_t n = tmpl->steps_.size();
  std::vector<std::vector<std::size_t>> successors(n);
  std::vector<std::size_t> indegree(n, 0);
  std::set<std::pair<std::size_t, Slot>> incoming;
  if (json.contains("edges")) {
    if (!json["edges"].is_array()) throw Error(ErrorCode::SchemaError, "template: 'edges' must be an array");
    for (const auto& edge_json : json["edges"]) {
      if (!edge_json.is_object()) throw Error(ErrorCode::SchemaError, "template: each edge must be an object");
      reject_unknown_keys(edge_json, {"from", "to", "slot"}, "edge", "");
      TemplateEdge edge;
      edge.from = require_string(edge_json, "from", "edge", "");
      edge.to = require_string(edge_json, "to", "edge", "");
      const std::string& slot_name = require_string(edge_json, "slot", "edge", edge.to);
      const auto slot = parse_slot(slot_name);
      if (!slot) throw Error(ErrorCode::SchemaError, "edge into '" + edge.to + "': unknown slot '" + slot_name + "'", edge.to);
      edge.slot = *slot;
      if (!ids.count(edge.from) || !ids.count(edge.to)) {
        throw Error(ErrorCode::SchemaError, "edge " + edge.from + " -> " + edge.to + " names an unknown step",
                    ids.count(edge.from) ? edge.to : edge.from);
      }
      if (edge.from == edge.to) {
        throw Error(ErrorCode::CycleError, "step '" + edge.from + "' has an edge to itself", edge.from);
      }
      const std::size_t from = tmpl->step_index(edge.from);
      const std::size_t to = tmpl->step_index(edge.to);
      if (!tmpl->primitives_[from]->meta().writes_slot(edge.slot)) {
        throw Error(ErrorCode::UnsatisfiedSlot,
                    "step '" + edge.from + "' does not write slot '" + slot_name + "'", edge.from);
      }
      if (!tmpl->primitives_[to]->meta().reads_slot(edge.slot)) {
        throw Error(ErrorCode::SchemaError, "step '" + edge.to + "' does not read slot '" + slot_name + "'",
                    edge.to);
      }
      if (!incoming.insert({to, edge.slot}).second) {
        throw Error(ErrorCode::SchemaError, "step '" + edge.to + "' receives slot '" + slot_name + "' twice",
                    edge.to);
      }
      successors[from].push_back(to);
      ++indegree[to];
      tmpl->edges_.push_back(std::move(edge));
    }
  }

  // Kahn's algorithm, always releasing the earliest declared ready step.
  std::vector<bool> done(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t next = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && indegree[i] == 0) {
        next = i;
        break;
      }
    }
    if (next == n) {
      std::size_t culprit = 0;
      while (done[culprit]) ++culprit;
      throw Error(ErrorCode::CycleError, "steps form a cycle through '" + tmpl->steps_[culprit].id + "'",
                  tmpl->steps_[culprit].id);
    }
    done[next] = true;
    tmpl->order_.push_back(next);
    for (std::size_t s : successors[next]) --indegree[s];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& meta = tmpl->primitives_[i]->meta();
    std::vector<Slot> needed = meta.reads;
    needed.insert(needed.end(), meta.fit_reads.begin(), meta.fit_reads.end());
    for (Slot slot : needed) {
      if (incoming.count({i, slot}) || is_raw_slot(slot)) continue;
      throw Error(ErrorCode::UnsatisfiedSlot,
                  "step '" + tmpl->steps_[i].id + "' reads slot '" + std::string(to_string(slot)) +
                      "' that no upstream step provides",
                  tmpl->steps_[i].id);
    }
  }

  if (json.contains("hyperparameters")) {
    if (!json["hyperparameters"].is_object()) {
      throw Error(ErrorCode::SchemaError, "template: 'hyperparameters' must be an object");
    }
    for (const auto& [key_text, spec_json] : json["hyperparameters"].items()) {
      HyperparamKey key;
      try {
        key = HyperparamKey::parse(key_text);
      } catch (const Error&) {
        throw Error(ErrorCode::BadHyperparamSpec, "hyperparameter key '" + key_text + "' is not <step>.<param>",
                    key_text);
      }
      if (!ids.count(key.step)) {
        throw Error(ErrorCode::BadHyperparamSpec, key_text + ": no step named '" + key.step + "'", key.step);
      }
      const auto& declared = tmpl->primitives_[tmpl->step_index(key.step)]->meta().hyperparameters;
      const auto it = declared.find(key.param);
      if (it == declared.end()) {
        throw Error(ErrorCode::BadHyperparamSpec, key_text + ": primitive has no parameter '" + key.param + "'",
                    key.step);
      }
      HyperparamSpec spec = spec_from_json(spec_json, key_text);
      if (spec.kind != it->second.kind || !range_within(spec, it->second)) {
        throw Error(ErrorCode::BadHyperparamSpec,
                    key_text + ": spec must match the primitive's kind and lie within its domain", key.step);
      }
      tmpl->space_.emplace(key, std::move(spec));
    }
  }
  return tmpl;
}

TemplatePtr parse_template(std::string_view json_text, const PrimitiveRegistry& registry) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("template is not valid JSON: ") + e.what());
  }
  return load_template(json, registry);
}

TemplatePtr load_template_file(const std::filesystem::path& path, const PrimitiveRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open template " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_template(buffer.str(), registry);
}

std::filesystem::path bundled_template_dir() {
  if (const char* env = std::getenv("TSAD_TEMPLATE_DIR")) return env;
  return TSAD_TEMPLATE_DIR;
}

std::filesystem::path resolve_template_path(const std::string& name_or_path) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::exists(direct)) return direct;
  const auto dir = bundled_template_dir();
  for (const auto& candidate : {dir / name_or_path, dir / (name_or_path + ".json")}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw Error(ErrorCode::Io, "no template file or bundled template named '" + name_or_path + "'");
}

std::vector<std::pair<HyperparamKey, HyperparamSpec>> hyperparameter_space(const Template& tmpl,
                                                                           SpaceScope scope) {
  std::vector<std::pair<HyperparamKey, HyperparamSpec>> out;
  for (std::size_t index : tmpl.order()) {
    const auto& step = tmpl.steps()[index];
    if (scope == SpaceScope::unsupervised_subpipeline &&
        tmpl.primitive(index).meta().engine == Engine::postprocessing) {
      continue;
    }
    // space_ is ordered by (step, param), so params come out sorted by name.
    for (const auto& [key, spec] : tmpl.space()) {
      if (key.step == step.id) out.emplace_back(key, spec);
    }
  }
  return out;
}

}  // namespace tsad
