#include "tsad/core/error.hpp"
#include "tsad/store/store.hpp"

namespace tsad {

namespace {

FieldSpec req(std::string name, FieldType type) { return {std::move(name), type, true, std::nullopt, {}}; }
FieldSpec opt(std::string name, FieldType type) { return {std::move(name), type, false, std::nullopt, {}}; }
FieldSpec ref(std::string name, Collection target, bool required = true) {
  return {std::move(name), FieldType::ref, required, target, {}};
}
FieldSpec one_of(FieldSpec f, std::vector<std::string> allowed) {
  f.allowed = std::move(allowed);
  return f;
}

using T = FieldType;
using C = Collection;

const std::map<Collection, std::vector<FieldSpec>>& table() {
  static const std::map<Collection, std::vector<FieldSpec>> t{
      {C::Dataset, {req("name", T::string), opt("description", T::string)}},
      {C::Signal,
       {ref("dataset_id", C::Dataset), req("name", T::string), req("data_uri", T::string),
        opt("timestamp_column", T::string), opt("value_columns", T::array), opt("start", T::integer),
        opt("end", T::integer)}},
      {C::PipelineTemplate, {req("name", T::string), req("json", T::object)}},
      {C::Pipeline,
       {ref("template_id", C::PipelineTemplate), req("name", T::string), req("hyperparameters", T::object),
        opt("kind", T::string), opt("model", T::object), opt("metrics", T::object)}},
      {C::Experiment,
       {req("name", T::string), ref("dataset_id", C::Dataset), ref("template_id", C::PipelineTemplate),
        {"signal_ids", T::ref_list, false, C::Signal, {}}, opt("project", T::string)}},
      {C::Datarun,
       {ref("experiment_id", C::Experiment), req("status", T::string), ref("pipeline_id", C::Pipeline, false),
        opt("started_at", T::integer), opt("ended_at", T::integer)}},
      {C::Signalrun,
       {ref("datarun_id", C::Datarun), ref("signal_id", C::Signal), ref("pipeline_id", C::Pipeline, false),
        req("num_events", T::integer), req("status", T::string), opt("profile", T::object),
        opt("metrics", T::object), opt("model_uri", T::string)}},
      {C::Event,
       {ref("signal_id", C::Signal), {"signalrun_id", T::nullable_ref, false, C::Signalrun, {}},
        req("t_s", T::integer), req("t_e", T::integer), opt("severity", T::number),
        one_of(req("source", T::string), {"detected", "manual"})}},
      {C::EventInteraction,
       {ref("event_id", C::Event),
        one_of(req("action", T::string), {"create", "modify", "delete", "tag", "comment"}),
        opt("payload", T::object), opt("user", T::string)}},
      {C::Annotation,
       {ref("event_id", C::Event), req("user", T::string),
        one_of(req("tag", T::string), {"confirmed", "normal", "investigate", "other:*"}),
        opt("comment", T::string)}},
  };
  return t;
}

std::string_view type_name(FieldType t) {
  switch (t) {
    case T::string: return "string";
    case T::number: return "number";
    case T::integer: return "integer";
    case T::boolean: return "boolean";
    case T::object: return "object";
    case T::array: return "array";
    case T::ref: return "ref";
    case T::nullable_ref: return "nullable_ref";
    case T::ref_list: return "ref_list";
  }
  return "string";
}

}  // namespace

std::string_view to_string(Collection c) noexcept {
  switch (c) {
    case C::Dataset: return "Dataset";
    case C::Signal: return "Signal";
    case C::PipelineTemplate: return "PipelineTemplate";
    case C::Pipeline: return "Pipeline";
    case C::Experiment: return "Experiment";
    case C::Datarun: return "Datarun";
    case C::Signalrun: return "Signalrun";
    case C::Event: return "Event";
    case C::EventInteraction: return "EventInteraction";
    case C::Annotation: return "Annotation";
  }
  return "Dataset";
}

Collection parse_collection(std::string_view text) {
  for (Collection c : kAllCollections) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::UnknownCollection, "unknown collection '" + std::string(text) + "'", std::string(text));
}

bool is_append_only(Collection c) noexcept { return c == C::EventInteraction || c == C::Annotation; }

const std::vector<FieldSpec>& collection_schema(Collection c) { return table().at(c); }

nlohmann::json knowledge_base_schema() {
  nlohmann::json collections = nlohmann::json::object();
  for (Collection c : kAllCollections) {
    nlohmann::json fields = nlohmann::json::object();
    for (const FieldSpec& f : collection_schema(c)) {
      nlohmann::json j{{"type", type_name(f.type)}, {"required", f.required}};
      if (f.target) j["target"] = to_string(*f.target);
      if (!f.allowed.empty()) j["enum"] = f.allowed;
      fields[f.name] = std::move(j);
    }
    collections[std::string(to_string(c))] = {{"append_only", is_append_only(c)}, {"fields", std::move(fields)}};
  }
  return {{"version", 1}, {"collections", std::move(collections)}};
}

}  // namespace tsad
