#pragma once

#include "tsad/bench/benchmark.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsad {

/// A directory of `<name>.csv` signals, each optionally paired with a
/// `<name>.events.csv` ground-truth file (`t_s,t_e`).
Dataset load_dataset_dir(const std::filesystem::path& dir, std::string name = {});
void save_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset);

struct NabOptions {
  std::vector<std::string> categories{"artificialWithAnomaly", "realAdExchange", "realAWSCloudwatch",
                                      "realTraffic", "realTweets"};
  // Signals without any labelled window carry no ground truth to score.
  bool include_unlabelled = false;
};

/// Read a NAB checkout: `data/<category>/<file>.csv` with `timestamp,value`
/// rows ("YYYY-MM-DD HH:MM:SS", UTC) and `labels/combined_windows.json`
/// mapping "<category>/<file>.csv" to [start, end] timestamp strings.
/// One dataset per category, signals sorted by file name.
std::vector<Dataset> load_nab(const std::filesystem::path& root, const NabOptions& options = {});

/// "YYYY-MM-DD HH:MM:SS" with optional fractional seconds, as UTC seconds.
Timestamp parse_utc_timestamp(std::string_view text);

}  // namespace tsad
