#pragma once

#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsad {

// Which columns of a signal CSV hold the timestamp and the values. An empty
// `value_columns` means every column other than the timestamp, in file order.
struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::vector<std::string> value_columns;
};

/// Parse a signal CSV. Rows may arrive in any order; they are sorted by
/// timestamp. Empty value cells become NaN.
///
/// Throws MalformedCsv, DuplicateTimestamp, or EmptySignal.
Signal read_signal_csv(std::istream& in, std::string name, const CsvSchema& schema = {});
Signal load_signal_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Canonical form: `timestamp,value` (or `value_0..value_{m-1}`), shortest
/// round-trip number formatting, NaN written as an empty cell, LF endings.
void write_signal_csv(std::ostream& out, const Signal& signal);
void write_signal_csv(const std::filesystem::path& path, const Signal& signal);

/// Ground-truth CSV with header `t_s,t_e`. Extra columns such as `severity`
/// are accepted and read when present.
EventList read_events_csv(std::istream& in);
EventList load_events_csv(const std::filesystem::path& path);

/// `t_s,t_e,severity` when `with_severity`, otherwise `t_s,t_e`.
void write_events_csv(std::ostream& out, const EventList& events, bool with_severity = true);
void write_events_csv(const std::filesystem::path& path, const EventList& events,
                      bool with_severity = true);

// Shortest representation that parses back to the same double. NaN -> "nan".
std::string format_double(double value);

}  // namespace tsad
