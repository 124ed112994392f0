#include "tsad/pipeline/pipeline.hpp"

#include "tsad/core/error.hpp"

#include <chrono>

namespace tsad {
namespace {

HyperparamValue coerce(const HyperparamSpec& spec, const HyperparamValue& value) {
  if (spec.kind == HyperparamKind::float_range) {
    if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  }
  return value;
}

enum class Mode { fit, detect };

struct Execution {
  std::vector<std::shared_ptr<const StepState>> states;
  std::vector<StepTiming> timings;
  DataContext merged;
};

// Runs the steps in topological order. Each step receives only the slots it
// reads, taken from the producing step named by its incoming edge or from the
// raw context.
Execution execute(const Pipeline& pipeline, const DataContext& raw, Mode mode,
                  const std::vector<std::shared_ptr<const StepState>>* fitted, bool stop_before_post) {
  const Template& tmpl = *pipeline.tmpl();
  const std::size_t n = tmpl.steps().size();
  std::vector<DataContext> outputs(n);
  Execution exec;
  exec.states.resize(n);
  exec.merged = raw;

  for (std::size_t index : tmpl.order()) {
    const Primitive& primitive = tmpl.primitive(index);
    const auto& meta = primitive.meta();
    if (stop_before_post && meta.engine == Engine::postprocessing) break;
    const std::string& id = tmpl.steps()[index].id;

    DataContext ctx;
    auto bring = [&](Slot slot) {
      for (const auto& edge : tmpl.edges()) {
        if (edge.slot == slot && tmpl.step_index(edge.to) == index) {
          ctx.copy_slot(slot, outputs[tmpl.step_index(edge.from)]);
          return;
        }
      }
      ctx.copy_slot(slot, raw);
    };
    for (Slot slot : meta.reads) bring(slot);
    if (mode == Mode::fit) {
      for (Slot slot : meta.fit_reads) bring(slot);
    }

    const ParamSet params = pipeline.params(index);
    const auto started = std::chrono::steady_clock::now();
    try {
      if (mode == Mode::fit) {
        exec.states[index] = primitive.fit(ctx, params);
      } else {
        primitive.produce(ctx, params, (*fitted)[index].get());
      }
    } catch (const Error& e) {
      throw Error(e.code(), "step '" + id + "': " + e.what(), id);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "step '" + id + "': " + e.what(), id);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    exec.timings.push_back({id, elapsed.count()});

    for (Slot slot : meta.writes) exec.merged.copy_slot(slot, ctx);
    outputs[index] = std::move(ctx);
  }
  return exec;
}

}  // namespace

ParamSet Pipeline::params(std::size_t index) const {
  const Template& tmpl = *template_;
  ParamSet params = tmpl.static_params(index);
  const std::string& id = tmpl.steps()[index].id;
  for (const auto& [key, value] : assignment_) {
    if (key.step == id) params.set(key.param, value);
  }
  if (seed_ && params.has("seed")) params.set("seed", *seed_);
  return params;
}

Pipeline Pipeline::with_seed(std::int64_t seed) const {
  Pipeline copy = *this;
  copy.seed_ = seed;
  return copy;
}

nlohmann::json Pipeline::assignment_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : assignment_) j[key.str()] = value_to_json(value);
  return j;
}

Pipeline instantiate(TemplatePtr tmpl, const Assignment& partial) {
  if (!tmpl) throw Error(ErrorCode::InvalidArgument, "instantiate needs a template");
  Pipeline pipeline;
  for (const auto& [key, value] : partial) {
    const auto it = tmpl->space().find(key);
    if (it == tmpl->space().end()) {
      throw Error(ErrorCode::UnknownHyperparam, key.str() + " is not a tunable of template " + tmpl->name(),
                  key.str());
    }
    const HyperparamValue v = coerce(it->second, value);
    if (!it->second.contains(v)) {
      throw Error(ErrorCode::OutOfRange, key.str() + " = " + value_to_string(v) + " is outside its domain",
                  key.str());
    }
    pipeline.assignment_[key] = v;
  }
  for (const auto& [key, spec] : tmpl->space()) {
    pipeline.assignment_.try_emplace(key, spec.default_value);
  }
  pipeline.template_ = std::move(tmpl);
  return pipeline;
}

Pipeline instantiate(TemplatePtr tmpl, const nlohmann::json& partial) {
  if (!tmpl) throw Error(ErrorCode::InvalidArgument, "instantiate needs a template");
  if (!partial.is_object()) throw Error(ErrorCode::InvalidArgument, "hyperparameters must be a JSON object");
  Assignment assignment;
  for (const auto& [text, value] : partial.items()) {
    const HyperparamKey key = HyperparamKey::parse(text);
    const auto it = tmpl->space().find(key);
    if (it == tmpl->space().end()) {
      throw Error(ErrorCode::UnknownHyperparam, text + " is not a tunable of template " + tmpl->name(), text);
    }
    assignment[key] = it->second.value_from_json(value, text);
  }
  return instantiate(std::move(tmpl), assignment);
}

DataContext raw_context(const Signal& signal, const EventList* labels) {
  DataContext ctx;
  ctx.timestamps = signal.timestamps();
  ctx.values = signal.values();
  if (labels != nullptr) ctx.labels = *labels;
  return ctx;
}

FittedPipeline fit(const Pipeline& pipeline, const Signal& signal, const FitOptions& options,
                   DataContext& final_context) {
  Execution exec = execute(pipeline, raw_context(signal, options.labels), Mode::fit, nullptr,
                           options.stop_before_postprocessing);
  FittedPipeline fitted;
  fitted.pipeline = pipeline;
  fitted.states = std::move(exec.states);
  fitted.channels = signal.channels();
  fitted.train_start = signal.start();
  fitted.train_end = signal.end();
  fitted.fit_timings = std::move(exec.timings);
  if (exec.merged.events) fitted.fit_events = *exec.merged.events;
  fitted.complete = !options.stop_before_postprocessing;
  final_context = std::move(exec.merged);
  return fitted;
}

FittedPipeline fit(const Pipeline& pipeline, const Signal& signal, const FitOptions& options) {
  DataContext unused;
  return fit(pipeline, signal, options, unused);
}

DetectRun detect_run(const FittedPipeline& fitted, const Signal& signal) {
  if (signal.channels() != fitted.channels) {
    throw Error(ErrorCode::ShapeMismatch, "signal has " + std::to_string(signal.channels()) +
                                              " channels but the pipeline was fitted on " +
                                              std::to_string(fitted.channels));
  }
  if (!fitted.complete || fitted.states.size() != fitted.pipeline.tmpl()->steps().size()) {
    throw Error(ErrorCode::InvalidArgument, "fitted pipeline is incomplete");
  }
  Execution exec = execute(fitted.pipeline, raw_context(signal), Mode::detect, &fitted.states, false);
  DetectRun run;
  if (exec.merged.events) run.events = *exec.merged.events;
  run.timings = std::move(exec.timings);
  run.context = std::move(exec.merged);
  return run;
}

EventList detect(const FittedPipeline& fitted, const Signal& signal) {
  return detect_run(fitted, signal).events;
}

}  // namespace tsad
