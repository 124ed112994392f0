#include "tsad/bench/datasets.hpp"

#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace tsad {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEventsSuffix = ".events.csv";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int parse_field(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc() || ptr != first + len) {
    throw Error(ErrorCode::MalformedCsv, "bad timestamp '" + std::string(whole) + "'");
  }
  return v;
}

LabeledSignal load_nab_signal(const fs::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptySignal, path.string() + " is empty");
  std::vector<Timestamp> ts;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::MalformedCsv, "missing value in " + path.string());
    ts.push_back(parse_utc_timestamp(std::string_view(line).substr(0, comma)));
    const std::string cell = line.substr(comma + 1);
    double v = std::numeric_limits<double>::quiet_NaN();
    if (!cell.empty()) {
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc()) throw Error(ErrorCode::MalformedCsv, "bad value '" + cell + "' in " + path.string());
    }
    values.push_back(v);
  }
  // NAB files are sorted, but keep the loader honest.
  std::vector<std::size_t> idx(ts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ts[a] < ts[b]; });
  std::vector<Timestamp> sorted_ts(ts.size());
  Matrix m(static_cast<Eigen::Index>(ts.size()), 1);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sorted_ts[i] = ts[idx[i]];
    m(static_cast<Eigen::Index>(i), 0) = values[idx[i]];
  }
  return LabeledSignal{Signal(name, std::move(sorted_ts), std::move(m)), {},
                       "file://" + fs::absolute(path).string()};
}

}  // namespace

Timestamp parse_utc_timestamp(std::string_view text) {
  // YYYY-MM-DD HH:MM:SS[.ffffff]
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || text[16] != ':') {
    throw Error(ErrorCode::MalformedCsv, "bad timestamp '" + std::string(text) + "'");
  }
  std::tm tm{};
  tm.tm_year = parse_field(text, 0, 4, text) - 1900;
  tm.tm_mon = parse_field(text, 5, 2, text) - 1;
  tm.tm_mday = parse_field(text, 8, 2, text);
  tm.tm_hour = parse_field(text, 11, 2, text);
  tm.tm_min = parse_field(text, 14, 2, text);
  tm.tm_sec = parse_field(text, 17, 2, text);
  if (text.size() > 19) {
    if (text[19] != '.') throw Error(ErrorCode::MalformedCsv, "bad timestamp '" + std::string(text) + "'");
    parse_field(text, 20, text.size() - 20, text);
  }
  if (tm.tm_mon < 0 || tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 ||
      tm.tm_min > 59 || tm.tm_sec > 60) {
    throw Error(ErrorCode::MalformedCsv, "bad timestamp '" + std::string(text) + "'");
  }
  return static_cast<Timestamp>(timegm(&tm));
}

Dataset load_dataset_dir(const fs::path& dir, std::string name) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  Dataset ds;
  ds.name = name.empty() ? dir.filename().string() : std::move(name);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (entry.is_regular_file() && ends_with(file, ".csv") && !ends_with(file, kEventsSuffix)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    LabeledSignal ls{load_signal_csv(file), {}, "file://" + fs::absolute(file).string()};
    const fs::path events = dir / (file.stem().string() + std::string(kEventsSuffix));
    if (fs::exists(events)) ls.truth = load_events_csv(events);
    ds.signals.push_back(std::move(ls));
  }
  return ds;
}

void save_dataset_dir(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  for (const LabeledSignal& ls : dataset.signals) {
    write_signal_csv(dir / (ls.signal.name() + ".csv"), ls.signal);
    write_events_csv(dir / (ls.signal.name() + std::string(kEventsSuffix)), ls.truth, false);
  }
}

std::vector<Dataset> load_nab(const fs::path& root, const NabOptions& options) {
  const fs::path labels_path = root / "labels" / "combined_windows.json";
  std::ifstream labels_in(labels_path);
  if (!labels_in) throw Error(ErrorCode::Io, "cannot open " + labels_path.string());
  nlohmann::json windows;
  try {
    labels_in >> windows;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedCsv, labels_path.string() + ": " + e.what());
  }

  std::vector<Dataset> out;
  for (const std::string& category : options.categories) {
    const fs::path dir = root / "data" / category;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Dataset ds{category, {}};
    for (const fs::path& file : files) {
      const std::string key = category + "/" + file.filename().string();
      EventList truth;
      if (auto it = windows.find(key); it != windows.end()) {
        for (const auto& w : *it) {
          if (!w.is_array() || w.size() != 2) throw Error(ErrorCode::MalformedCsv, "bad window for " + key);
          truth.push_back(make_event(parse_utc_timestamp(w[0].get<std::string>()),
                                     parse_utc_timestamp(w[1].get<std::string>()), 0.0, EventSource::manual));
        }
      }
      if (truth.empty() && !options.include_unlabelled) continue;
      LabeledSignal ls = load_nab_signal(file, file.stem().string());
      ls.truth = std::move(truth);
      ds.signals.push_back(std::move(ls));
    }
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace tsad
