#pragma once

#include "tsad/metrics/segment.hpp"
#include "tsad/pipeline/pipeline.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsad {

struct LabeledSignal {
  Signal signal;
  EventList truth;
  std::string data_uri;  // where the samples came from, when known
};

struct Dataset {
  std::string name;
  std::vector<LabeledSignal> signals;
};

struct NamedPipeline {
  std::string name;
  Pipeline pipeline;
};

struct StepProfile {
  std::string step_id;
  double fit_s = 0.0;
  double detect_s = 0.0;
};

struct ComputeProfile {
  double train_time_s = 0.0;
  double detect_latency_s = 0.0;
  std::uint64_t peak_memory_bytes = 0;
  bool memory_available = false;  // false when resident-set sampling is unsupported
  std::vector<StepProfile> per_step;
};

/// Fit then detect `pipeline` on `signal`, timing both with a monotonic
/// clock while a background thread samples the resident set size.
/// `labels` feeds supervised templates; `events` receives the detections.
ComputeProfile measure_compute(const Pipeline& pipeline, const Signal& signal,
                               const EventList* labels = nullptr, EventList* events = nullptr);

struct BenchmarkRow {
  std::string pipeline;
  std::string dataset;
  std::string signal;
  Scores weighted;
  Scores overlapping;
  ComputeProfile profile;
  std::string status = "ok";  // or "failed:<ErrorCode>"
};

struct BenchmarkOptions {
  std::uint64_t seed = 0;
  // Cells evaluated concurrently; 1 keeps timings free of interference.
  std::size_t parallel = 1;
  // Called once per finished cell, in report order, with the detections.
  std::function<void(const BenchmarkRow&, const EventList&)> on_cell;
};

/// One row per (pipeline, signal), datasets in order, pipelines innermost.
/// Each cell fits and detects on the full signal with the pipeline reseeded
/// to `options.seed`. Failures become status "failed:<code>" rows.
std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedPipeline>& pipelines,
                                        const std::vector<Dataset>& datasets,
                                        const BenchmarkOptions& options = {});

inline constexpr const char* kReportHeader =
    "pipeline,dataset,signal,f1_w,precision_w,recall_w,f1_o,precision_o,recall_o,train_s,"
    "latency_s,peak_mem_bytes,status";

void write_report_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);
/// Throws MalformedCsv.
std::vector<BenchmarkRow> read_report_csv(std::istream& in);

struct OverheadProfile {
  double standalone_total_s = 0.0;
  double pipeline_total_s = 0.0;
  double delta_s = 0.0;
  double pct_increase = 0.0;
  EventList standalone_events;
  EventList pipeline_events;
};

/// Run the pipeline's primitives by hand on one shared context and again
/// through the engine; each side keeps the fastest of `repeats` runs.
/// On glibc, the first call fixes the allocator's mmap and trim thresholds
/// for the rest of the process.
OverheadProfile profile_overhead(const Pipeline& pipeline, const Signal& signal,
                                 std::size_t repeats = 3);

}  // namespace tsad
