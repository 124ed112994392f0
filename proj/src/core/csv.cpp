#include "tsad/core/csv.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>

namespace tsad {
namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(begin));
      break;
    }
    cells.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  for (auto& cell : cells) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  }
  return cells;
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::int64_t parse_int(std::string_view cell, std::size_t row) {
  std::int64_t value = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw Error(ErrorCode::MalformedCsv,
                "row " + std::to_string(row) + ": '" + std::string(cell) + "' is not an integer");
  }
  return value;
}

double parse_real(std::string_view cell, std::size_t row) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (cell == "nan" || cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::MalformedCsv,
                "row " + std::to_string(row) + ": '" + std::string(cell) + "' is not a number");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Signal read_signal_csv(std::istream& in, std::string name, const CsvSchema& schema) {
  std::string line;
  if (!next_line(in, line)) throw Error(ErrorCode::MalformedCsv, "missing header");
  const auto header_cells = split_row(line);
  std::vector<std::string> header(header_cells.begin(), header_cells.end());

  const auto ts_it = std::find(header.begin(), header.end(), schema.timestamp_column);
  if (ts_it == header.end()) {
    throw Error(ErrorCode::MalformedCsv, "header lacks column '" + schema.timestamp_column + "'");
  }
  const std::size_t ts_col = static_cast<std::size_t>(ts_it - header.begin());

  std::vector<std::size_t> value_cols;
  if (schema.value_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != ts_col) value_cols.push_back(c);
    }
  } else {
    for (const auto& column : schema.value_columns) {
      const auto it = std::find(header.begin(), header.end(), column);
      if (it == header.end()) {
        throw Error(ErrorCode::MalformedCsv, "header lacks column '" + column + "'");
      }
      value_cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (value_cols.empty()) throw Error(ErrorCode::MalformedCsv, "no value columns");

  std::vector<std::int64_t> timestamps;
  std::vector<double> cells;
  std::size_t row = 1;
  while (next_line(in, line)) {
    ++row;
    const auto parts = split_row(line);
    if (parts.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(row) + " has " +
                                               std::to_string(parts.size()) + " cells, expected " +
                                               std::to_string(header.size()));
    }
    timestamps.push_back(parse_int(parts[ts_col], row));
    for (std::size_t c : value_cols) cells.push_back(parse_real(parts[c], row));
  }

  const std::size_t n = timestamps.size();
  const std::size_t m = value_cols.size();
  if (n < 2) {
    throw Error(ErrorCode::EmptySignal, "signal needs at least 2 samples, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return timestamps[a] < timestamps[b]; });

  std::vector<Timestamp> sorted_ts(n);
  Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    sorted_ts[i] = timestamps[order[i]];
    if (i > 0 && sorted_ts[i] == sorted_ts[i - 1]) {
      throw Error(ErrorCode::DuplicateTimestamp, "duplicate timestamp " + std::to_string(sorted_ts[i]));
    }
    for (std::size_t c = 0; c < m; ++c) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cells[order[i] * m + c];
    }
  }
  return Signal(std::move(name), std::move(sorted_ts), std::move(values));
}

Signal load_signal_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  auto in = open_input(path);
  Signal signal = read_signal_csv(in, path.stem().string(), schema);
  return Signal(signal.name(), signal.timestamps(), signal.values(), path.string());
}

void write_signal_csv(std::ostream& out, const Signal& signal) {
  const auto m = static_cast<Eigen::Index>(signal.channels());
  out << "timestamp";
  if (m == 1) {
    out << ",value";
  } else {
    for (Eigen::Index c = 0; c < m; ++c) out << ",value_" << c;
  }
  out << '\n';
  const auto& values = signal.values();
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out << signal.timestamps()[i];
    for (Eigen::Index c = 0; c < m; ++c) {
      out << ',';
      const double v = values(static_cast<Eigen::Index>(i), c);
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
}

void write_signal_csv(const std::filesystem::path& path, const Signal& signal) {
  auto out = open_output(path);
  write_signal_csv(out, signal);
}

EventList read_events_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw Error(ErrorCode::MalformedCsv, "missing header");
  const auto header_cells = split_row(line);
  std::vector<std::string> header(header_cells.begin(), header_cells.end());
  auto column = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto ts_col = column("t_s");
  const auto te_col = column("t_e");
  const auto sev_col = column("severity");
  if (ts_col < 0 || te_col < 0) throw Error(ErrorCode::MalformedCsv, "header must contain t_s,t_e");

  EventList events;
  std::size_t row = 1;
  while (next_line(in, line)) {
    ++row;
    const auto parts = split_row(line);
    if (parts.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(row) + " has wrong cell count");
    }
    const double severity = sev_col >= 0 ? parse_real(parts[static_cast<std::size_t>(sev_col)], row) : 0.0;
    try {
      events.push_back(make_event(parse_int(parts[static_cast<std::size_t>(ts_col)], row),
                                  parse_int(parts[static_cast<std::size_t>(te_col)], row),
                                  std::isnan(severity) ? 0.0 : severity));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedCsv) throw;
      throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(row) + ": " + e.what());
    }
  }
  sort_events(events);
  return events;
}

EventList load_events_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_events_csv(in);
}

void write_events_csv(std::ostream& out, const EventList& events, bool with_severity) {
  out << (with_severity ? "t_s,t_e,severity\n" : "t_s,t_e\n");
  for (const auto& e : events) {
    out << e.t_s << ',' << e.t_e;
    if (with_severity) out << ',' << format_double(e.severity);
    out << '\n';
  }
}

void write_events_csv(const std::filesystem::path& path, const EventList& events,
                      bool with_severity) {
  auto out = open_output(path);
  write_events_csv(out, events, with_severity);
}

}  // namespace tsad
