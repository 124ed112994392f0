#include "tsad/bench/benchmark.hpp"

#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"

#include <unistd.h>
#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace tsad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Resident set size from /proc/self/statm, 0 when unreadable.
std::uint64_t read_rss() {
  std::ifstream statm("/proc/self/statm");
  std::uint64_t size = 0, resident = 0;
  if (!(statm >> size >> resident)) return 0;
  return resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
}

// Samples the resident set every 10 ms until stopped and keeps the peak.
class RssSampler {
 public:
  RssSampler() : peak_(read_rss()), available_(peak_ > 0) {
    if (available_) thread_ = std::thread([this] { loop(); });
  }
  ~RssSampler() { stop(); }

  std::uint64_t stop() {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
    peak_ = std::max(peak_.load(), read_rss());
    return peak_;
  }
  bool available() const { return available_; }

 private:
  void loop() {
    std::unique_lock lock(mutex_);
    while (!cv_.wait_for(lock, std::chrono::milliseconds(10), [this] { return done_; })) {
      peak_ = std::max(peak_.load(), read_rss());
    }
  }

  std::atomic<std::uint64_t> peak_;
  bool available_;
  bool done_ = false;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::thread thread_;
};

std::string status_for(const Error& e) { return "failed:" + std::string(to_string(e.code())); }

struct Cell {
  std::size_t pipeline;
  std::size_t dataset;
  std::size_t signal;
};

BenchmarkRow run_cell(const NamedPipeline& p, const Dataset& d, const LabeledSignal& s,
                      std::uint64_t seed, EventList& events) {
  BenchmarkRow row;
  row.pipeline = p.name;
  row.dataset = d.name;
  row.signal = s.signal.name();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  row.weighted = row.overlapping = Scores{nan, nan, nan};
  try {
    const Pipeline seeded = p.pipeline.with_seed(static_cast<std::int64_t>(seed));
    row.profile = measure_compute(seeded, s.signal, &s.truth, &events);
    const Timestamp t0 = s.signal.start();
    const Timestamp t1 = s.signal.end();
    const EventList truth = clip_events(s.truth, t0, t1);
    const EventList pred = clip_events(events, t0, t1);
    row.weighted = score_from_confusion(weighted_segment(truth, pred, t0, t1));
    row.overlapping = score_from_confusion(overlapping_segment(truth, pred));
  } catch (const Error& e) {
    row.status = status_for(e);
    events.clear();
  } catch (const std::exception& e) {
    row.status = "failed:InternalError";
    events.clear();
  }
  return row;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t line) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::MalformedCsv, "bad number '" + text + "' on line " + std::to_string(line));
  }
  return v;
}

// glibc trims the heap top and maps large blocks on demand with thresholds
// that adapt to past frees, so a run's page-fault count depends on what ran
// before it. Fixed thresholds give both sides of a comparison the same heap.
void pin_allocator() {
#if defined(__GLIBC__)
  static const bool pinned = [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    return true;
  }();
  (void)pinned;
#endif
}

}  // namespace

ComputeProfile measure_compute(const Pipeline& pipeline, const Signal& signal,
                               const EventList* labels, EventList* events) {
  ComputeProfile profile;
  RssSampler sampler;
  FitOptions options;
  options.labels = labels;

  const auto t0 = Clock::now();
  const FittedPipeline fitted = fit(pipeline, signal, options);
  const auto t1 = Clock::now();
  DetectRun run = detect_run(fitted, signal);
  const auto t2 = Clock::now();

  profile.peak_memory_bytes = sampler.stop();
  profile.memory_available = sampler.available();
  profile.train_time_s = seconds(t0, t1);
  profile.detect_latency_s = seconds(t1, t2);
  for (const StepTiming& t : fitted.fit_timings) profile.per_step.push_back({t.step_id, t.seconds, 0.0});
  for (const StepTiming& t : run.timings) {
    for (StepProfile& s : profile.per_step) {
      if (s.step_id == t.step_id) s.detect_s = t.seconds;
    }
  }
  if (events != nullptr) *events = std::move(run.events);
  return profile;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedPipeline>& pipelines,
                                        const std::vector<Dataset>& datasets,
                                        const BenchmarkOptions& options) {
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t s = 0; s < datasets[d].signals.size(); ++s) {
      for (std::size_t p = 0; p < pipelines.size(); ++p) cells.push_back({p, d, s});
    }
  }
  std::vector<BenchmarkRow> rows(cells.size());
  std::vector<EventList> events(cells.size());
  auto work = [&](std::size_t i) {
    const Cell& c = cells[i];
    rows[i] = run_cell(pipelines[c.pipeline], datasets[c.dataset], datasets[c.dataset].signals[c.signal],
                       options.seed, events[i]);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallel, cells.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  if (options.on_cell) {
    for (std::size_t i = 0; i < rows.size(); ++i) options.on_cell(rows[i], events[i]);
  }
  return rows;
}

void write_report_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << kReportHeader << '\n';
  for (const BenchmarkRow& r : rows) {
    out << r.pipeline << ',' << r.dataset << ',' << r.signal << ',' << format_double(r.weighted.f1) << ','
        << format_double(r.weighted.precision) << ',' << format_double(r.weighted.recall) << ','
        << format_double(r.overlapping.f1) << ',' << format_double(r.overlapping.precision) << ','
        << format_double(r.overlapping.recall) << ',' << format_double(r.profile.train_time_s) << ','
        << format_double(r.profile.detect_latency_s) << ',' << r.profile.peak_memory_bytes << ','
        << r.status << '\n';
  }
}

std::vector<BenchmarkRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw Error(ErrorCode::MalformedCsv, "report header mismatch");
  }
  std::vector<BenchmarkRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) {
      throw Error(ErrorCode::MalformedCsv, "expected 13 fields on line " + std::to_string(number));
    }
    BenchmarkRow r;
    r.pipeline = f[0];
    r.dataset = f[1];
    r.signal = f[2];
    r.weighted = {parse_number(f[4], number), parse_number(f[5], number), parse_number(f[3], number)};
    r.overlapping = {parse_number(f[7], number), parse_number(f[8], number), parse_number(f[6], number)};
    r.profile.train_time_s = parse_number(f[9], number);
    r.profile.detect_latency_s = parse_number(f[10], number);
    r.profile.peak_memory_bytes = static_cast<std::uint64_t>(parse_number(f[11], number));
    r.status = f[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

OverheadProfile profile_overhead(const Pipeline& pipeline, const Signal& signal, std::size_t repeats) {
  if (repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  const Template& tmpl = *pipeline.tmpl();
  std::vector<ParamSet> params;
  for (std::size_t i = 0; i < tmpl.steps().size(); ++i) params.push_back(pipeline.params(i));

  pin_allocator();
  OverheadProfile out;
  out.standalone_total_s = std::numeric_limits<double>::infinity();
  out.pipeline_total_s = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    // Loading the raw slots counts on both sides.
    auto start = Clock::now();
    DataContext ctx = raw_context(signal);
    double total = seconds(start, Clock::now());
    for (std::size_t i : tmpl.order()) {
      start = Clock::now();
      tmpl.primitive(i).fit(ctx, params[i]);
      total += seconds(start, Clock::now());
    }
    out.standalone_total_s = std::min(out.standalone_total_s, total);
    if (ctx.events) out.standalone_events = *ctx.events;

    // Wall time of the whole engine call, so slot routing and copies count.
    start = Clock::now();
    const FittedPipeline fitted = fit(pipeline, signal);
    out.pipeline_total_s = std::min(out.pipeline_total_s, seconds(start, Clock::now()));
    out.pipeline_events = fitted.fit_events;
  }
  out.delta_s = out.pipeline_total_s - out.standalone_total_s;
  out.pct_increase = out.standalone_total_s > 0.0 ? 100.0 * out.delta_s / out.standalone_total_s : 0.0;
  return out;
}

}  // namespace tsad
