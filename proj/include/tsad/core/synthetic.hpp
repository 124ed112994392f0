#pragma once

#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace tsad {

enum class BaseProcess { sine, ar1, flat };
enum class AnomalyKind { spike, level_shift, dropout };

BaseProcess parse_base_process(std::string_view text);
AnomalyKind parse_anomaly_kind(std::string_view text);

struct AnomalySpec {
  std::size_t count = 0;
  AnomalyKind kind = AnomalyKind::spike;
  std::size_t min_len = 2;
  std::size_t max_len = 10;
  // Peak deviation from the base process, in units of noise_sd. Must be >= 4.
  double magnitude = 6.0;
};

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t m = 1;
  BaseProcess base = BaseProcess::sine;
  double noise_sd = 0.05;
  AnomalySpec anomalies;
  std::uint64_t seed = 0;
  Timestamp start = 1'600'000'000;
  Timestamp interval = 60;
  std::size_t period = 100;  // samples per sine cycle
  std::string name = "synthetic";
};

struct SyntheticSignal {
  Signal signal;
  EventList truth;
};

/// Generate base + noise and inject disjoint anomalies. The base process,
/// the noise and the anomaly placement draw from independent streams of the
/// seed, so `count = 0, noise_sd = 0` reproduces the base process exactly.
///
/// Throws InfeasibleSpec when the anomalies cannot be placed disjointly.
SyntheticSignal generate_synthetic(const SyntheticSpec& spec);

// Deterministic engine for one named stream of a seed.
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream);

}  // namespace tsad
