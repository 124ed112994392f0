#include "tsad/core/synthetic.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace tsad {
namespace {

constexpr std::uint64_t kBaseStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kAnomalyStream = 3;

Matrix base_process(const SyntheticSpec& spec) {
  auto rng = seeded_engine(spec.seed, kBaseStream);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto m = static_cast<Eigen::Index>(spec.m);
  Matrix base = Matrix::Zero(n, m);
  switch (spec.base) {
    case BaseProcess::sine: {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      const double period = static_cast<double>(std::max<std::size_t>(spec.period, 2));
      for (Eigen::Index c = 0; c < m; ++c) {
        const double offset = phase(rng);
        for (Eigen::Index i = 0; i < n; ++i) {
          base(i, c) = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period + offset);
        }
      }
      break;
    }
    case BaseProcess::ar1: {
      std::normal_distribution<double> innovation(0.0, 0.3);
      for (Eigen::Index c = 0; c < m; ++c) {
        double x = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          x = 0.8 * x + innovation(rng);
          base(i, c) = x;
        }
      }
      break;
    }
    case BaseProcess::flat:
      break;
  }
  return base;
}

}  // namespace

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

BaseProcess parse_base_process(std::string_view text) {
  if (text == "sine") return BaseProcess::sine;
  if (text == "ar1") return BaseProcess::ar1;
  if (text == "flat") return BaseProcess::flat;
  throw Error(ErrorCode::InvalidArgument, "unknown base process '" + std::string(text) + "'");
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
  if (text == "spike") return AnomalyKind::spike;
  if (text == "level_shift") return AnomalyKind::level_shift;
  if (text == "dropout") return AnomalyKind::dropout;
  throw Error(ErrorCode::InvalidArgument, "unknown anomaly kind '" + std::string(text) + "'");
}

SyntheticSignal generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 100) throw Error(ErrorCode::InvalidArgument, "synthetic signals need n >= 100");
  if (spec.m < 1) throw Error(ErrorCode::InvalidArgument, "synthetic signals need m >= 1");
  if (spec.interval < 1) throw Error(ErrorCode::InvalidArgument, "interval must be >= 1");
  if (!(spec.noise_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sd must be >= 0");
  const AnomalySpec& an = spec.anomalies;
  if (an.count > 0) {
    if (an.min_len < 2 || an.min_len > an.max_len) {
      throw Error(ErrorCode::InvalidArgument, "anomaly lengths need 2 <= min_len <= max_len");
    }
    if (!(an.magnitude >= 4.0)) {
      throw Error(ErrorCode::InvalidArgument, "anomaly magnitude must be >= 4 noise sd");
    }
    if (!(spec.noise_sd > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "anomalies are scaled by noise_sd, which must be > 0");
    }
  }

  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto m = static_cast<Eigen::Index>(spec.m);
  const Matrix base = base_process(spec);

  auto noise_rng = seeded_engine(spec.seed, kNoiseStream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix values = base;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < m; ++c) values(i, c) += spec.noise_sd * gauss(noise_rng);
  }

  std::vector<Timestamp> timestamps(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    timestamps[i] = spec.start + static_cast<Timestamp>(i) * spec.interval;
  }

  EventList truth;
  if (an.count > 0) {
    auto rng = seeded_engine(spec.seed, kAnomalyStream);
    std::uniform_int_distribution<std::size_t> length(an.min_len, an.max_len);
    std::vector<std::size_t> lengths(an.count);
    std::size_t total = 0;
    for (auto& len : lengths) {
      len = length(rng);
      total += len;
    }
    const std::size_t guard = std::min<std::size_t>(50, spec.n / 10);
    const std::size_t gap = an.max_len;
    const std::size_t needed = total + (an.count - 1) * gap + 2 * guard;
    if (needed > spec.n) {
      throw Error(ErrorCode::InfeasibleSpec,
                  std::to_string(an.count) + " anomalies need " + std::to_string(needed) +
                      " samples but the signal has " + std::to_string(spec.n));
    }
    const std::size_t slack = spec.n - needed;
    std::uniform_int_distribution<std::size_t> offset(0, slack);
    std::vector<std::size_t> offsets(an.count);
    for (auto& o : offsets) o = offset(rng);
    std::sort(offsets.begin(), offsets.end());

    std::bernoulli_distribution coin(0.5);
    const double amplitude = an.magnitude * spec.noise_sd;
    std::size_t cursor = guard;
    for (std::size_t k = 0; k < an.count; ++k) {
      const std::size_t begin = cursor + offsets[k];
      const std::size_t len = lengths[k];
      const double sign = coin(rng) ? 1.0 : -1.0;
      for (std::size_t i = begin; i < begin + len; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < m; ++c) {
          const double noise = values(row, c) - base(row, c);
          switch (an.kind) {
            case AnomalyKind::spike: {
              // Sudden onset at full amplitude, then a linear decay.
              const double profile = 1.0 - static_cast<double>(i - begin) / static_cast<double>(len);
              values(row, c) = i == begin ? base(row, c) + sign * amplitude
                                          : base(row, c) + sign * amplitude * profile + noise;
              break;
            }
            case AnomalyKind::level_shift:
              values(row, c) = i == begin ? base(row, c) + sign * amplitude
                                           : base(row, c) + sign * amplitude + noise;
              break;
            case AnomalyKind::dropout:
              values(row, c) = base(row, c) - amplitude;
              break;
          }
        }
      }
      truth.push_back(make_event(timestamps[begin], timestamps[begin + len - 1], 0.0,
                                 EventSource::manual));
      cursor = begin - offsets[k] + len + gap;
    }
  }

  return SyntheticSignal{Signal(spec.name, std::move(timestamps), std::move(values)),
                         std::move(truth)};
}

}  // namespace tsad
