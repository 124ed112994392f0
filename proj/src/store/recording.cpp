#include "tsad/store/recording.hpp"

#include "tsad/core/error.hpp"

#include <chrono>
#include <cmath>

namespace tsad {

namespace {

std::int64_t now_s() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

BenchmarkRecording register_benchmark(Store& store, const std::vector<NamedPipeline>& pipelines,
                                      const std::vector<Dataset>& datasets, const std::string& experiment) {
  BenchmarkRecording rec;
  WriteBatch batch = store.batch();
  std::map<std::string, std::string> template_ids;
  for (const NamedPipeline& p : pipelines) {
    const Template& tmpl = *p.pipeline.tmpl();
    auto [it, fresh] = template_ids.try_emplace(tmpl.name());
    if (fresh) {
      it->second = batch.put(Collection::PipelineTemplate, {{"name", tmpl.name()}, {"json", tmpl.to_json()}}).id;
    }
    nlohmann::json body{{"template_id", it->second},
                        {"name", p.name},
                        {"hyperparameters", p.pipeline.assignment_json()}};
    rec.pipeline_ids[p.name] = batch.put(Collection::Pipeline, std::move(body)).id;
  }
  for (const Dataset& d : datasets) {
    const std::string dataset_id = batch.put(Collection::Dataset, {{"name", d.name}}).id;
    rec.dataset_ids[d.name] = dataset_id;
    nlohmann::json signal_ids = nlohmann::json::array();
    for (const LabeledSignal& s : d.signals) {
      nlohmann::json body{{"dataset_id", dataset_id},
                          {"name", s.signal.name()},
                          {"data_uri", s.data_uri.empty() ? "memory:" + s.signal.name() : s.data_uri},
                          {"start", s.signal.start()},
                          {"end", s.signal.end()}};
      const std::string id = batch.put(Collection::Signal, std::move(body)).id;
      rec.signal_ids[{d.name, s.signal.name()}] = id;
      signal_ids.push_back(id);
    }
    for (const NamedPipeline& p : pipelines) {
      const std::string exp_id =
          batch
              .put(Collection::Experiment, {{"name", experiment},
                                            {"dataset_id", dataset_id},
                                            {"template_id", template_ids.at(p.pipeline.tmpl()->name())},
                                            {"signal_ids", signal_ids}})
              .id;
      rec.datarun_ids[{d.name, p.name}] = batch
                                              .put(Collection::Datarun, {{"experiment_id", exp_id},
                                                                         {"pipeline_id", rec.pipeline_ids.at(p.name)},
                                                                         {"status", "running"},
                                                                         {"started_at", now_s()}})
                                              .id;
    }
  }
  batch.commit();
  return rec;
}

std::function<void(const BenchmarkRow&, const EventList&)> benchmark_sink(Store& store,
                                                                          BenchmarkRecording recording) {
  return [&store, rec = std::move(recording)](const BenchmarkRow& row, const EventList& events) {
    const auto signal = rec.signal_ids.find({row.dataset, row.signal});
    const auto datarun = rec.datarun_ids.find({row.dataset, row.pipeline});
    if (signal == rec.signal_ids.end() || datarun == rec.datarun_ids.end()) {
      throw Error(ErrorCode::NotFound, "benchmark cell " + row.pipeline + "/" + row.dataset + "/" + row.signal +
                                           " was not registered");
    }
    auto score = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    const nlohmann::json metrics{{"f1_w", score(row.weighted.f1)},
                                 {"precision_w", score(row.weighted.precision)},
                                 {"recall_w", score(row.weighted.recall)},
                                 {"f1_o", score(row.overlapping.f1)},
                                 {"precision_o", score(row.overlapping.precision)},
                                 {"recall_o", score(row.overlapping.recall)}};
    record_signalrun(store, datarun->second, signal->second, rec.pipeline_ids.at(row.pipeline), events,
                     &row.profile, row.status, metrics);
  };
}

void finish_benchmark(Store& store, const BenchmarkRecording& recording) {
  WriteBatch batch = store.batch();
  for (const auto& [key, id] : recording.datarun_ids) {
    batch.update(Collection::Datarun, id, {{"status", "done"}, {"ended_at", now_s()}});
  }
  batch.commit();
}

}  // namespace tsad
