#pragma once

#include "tsad/bench/benchmark.hpp"
#include "tsad/store/store.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tsad {

/// Store documents created for one benchmark run: a Dataset and its Signals
/// per dataset, a PipelineTemplate and Pipeline per pipeline, and an
/// Experiment with one Datarun per (dataset, pipeline) pair.
struct BenchmarkRecording {
  std::map<std::string, std::string> dataset_ids;                            // dataset name
  std::map<std::pair<std::string, std::string>, std::string> signal_ids;     // (dataset, signal)
  std::map<std::string, std::string> pipeline_ids;                           // pipeline name
  std::map<std::pair<std::string, std::string>, std::string> datarun_ids;   // (dataset, pipeline)
};

BenchmarkRecording register_benchmark(Store& store, const std::vector<NamedPipeline>& pipelines,
                                      const std::vector<Dataset>& datasets, const std::string& experiment);

/// A BenchmarkOptions::on_cell callback that records each cell as a
/// Signalrun with its detected events.
std::function<void(const BenchmarkRow&, const EventList&)> benchmark_sink(Store& store,
                                                                          BenchmarkRecording recording);

/// Mark every Datarun of the recording done.
void finish_benchmark(Store& store, const BenchmarkRecording& recording);

}  // namespace tsad
