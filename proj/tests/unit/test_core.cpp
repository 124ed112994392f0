#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"
#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"
#include "tsad/core/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace tsad;

namespace {

Signal make_signal(std::vector<Timestamp> ts, std::vector<double> v) {
  Matrix values(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) values(static_cast<Eigen::Index>(i), 0) = v[i];
  return Signal("s", std::move(ts), std::move(values));
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no tsad::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Signal, RejectsBadShapes) {
  EXPECT_EQ(code_of([] { make_signal({0}, {1.0}); }), ErrorCode::EmptySignal);
  EXPECT_EQ(code_of([] { make_signal({0, 0}, {1.0, 2.0}); }), ErrorCode::DuplicateTimestamp);
  EXPECT_THROW(make_signal({10, 5}, {1.0, 2.0}), Error);
  EXPECT_THROW(Signal("s", {0, 1}, Matrix(3, 1)), Error);
}

TEST(Csv, ParsesEmptyCellAsNan) {
  std::istringstream in("timestamp,value\n0,1.0\n60,2.0\n120,\n");
  Signal s = read_signal_csv(in, "x");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.channels(), 1u);
  EXPECT_EQ(s.values()(0, 0), 1.0);
  EXPECT_EQ(s.values()(1, 0), 2.0);
  EXPECT_TRUE(std::isnan(s.values()(2, 0)));
}

TEST(Csv, SortsOutOfOrderRows) {
  std::istringstream sorted("timestamp,value\n0,1\n60,2\n120,3\n");
  std::istringstream shuffled("timestamp,value\n0,1\n120,3\n60,2\n");
  EXPECT_EQ(read_signal_csv(sorted, "x"), read_signal_csv(shuffled, "x"));
}

TEST(Csv, DuplicateTimestamp) {
  std::istringstream in("timestamp,value\n0,1\n0,2\n");
  EXPECT_EQ(code_of([&] { read_signal_csv(in, "x"); }), ErrorCode::DuplicateTimestamp);
}

TEST(Csv, MalformedInput) {
  std::istringstream no_ts("time,value\n0,1\n1,2\n");
  EXPECT_EQ(code_of([&] { read_signal_csv(no_ts, "x"); }), ErrorCode::MalformedCsv);
  std::istringstream bad_number("timestamp,value\n0,abc\n1,2\n");
  EXPECT_EQ(code_of([&] { read_signal_csv(bad_number, "x"); }), ErrorCode::MalformedCsv);
  std::istringstream one_row("timestamp,value\n0,1\n");
  EXPECT_EQ(code_of([&] { read_signal_csv(one_row, "x"); }), ErrorCode::EmptySignal);
}

TEST(Csv, CanonicalRoundTripIsByteExact) {
  const std::string canonical = "timestamp,value\n0,1.5\n60,\n120,-0.1\n180,1e-07\n";
  std::istringstream in("timestamp,value\n120,-0.1\n0,1.5\n60,\n180,0.0000001\n");
  std::ostringstream out;
  write_signal_csv(out, read_signal_csv(in, "x"));
  EXPECT_EQ(out.str(), canonical);

  std::istringstream again(out.str());
  std::ostringstream out2;
  write_signal_csv(out2, read_signal_csv(again, "x"));
  EXPECT_EQ(out2.str(), canonical);
}

TEST(Csv, MultichannelRoundTrip) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  Matrix values(50, 3);
  std::vector<Timestamp> ts;
  for (int i = 0; i < 50; ++i) {
    ts.push_back(i * 7);
    for (int c = 0; c < 3; ++c) values(i, c) = dist(rng);
  }
  values(4, 1) = std::nan("");
  Signal s("m", ts, values);
  std::ostringstream out;
  write_signal_csv(out, s);
  EXPECT_EQ(out.str().substr(0, 34), "timestamp,value_0,value_1,value_2\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_signal_csv(in, "m"), s);
}

TEST(Csv, EventsRoundTrip) {
  EventList events{make_event(10, 20, 1.5), make_event(30, 45, 0.0)};
  std::ostringstream out;
  write_events_csv(out, events);
  std::istringstream in(out.str());
  EventList back = read_events_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].t_s, 10);
  EXPECT_EQ(back[1].t_e, 45);
  EXPECT_DOUBLE_EQ(back[0].severity, 1.5);
}

TEST(Slice, Examples) {
  Signal s = make_signal({0, 60, 120, 180}, {1, 2, 3, 4});
  Signal part = slice(s, 60, 120);
  EXPECT_EQ(part.timestamps(), (std::vector<Timestamp>{60, 120}));
  EXPECT_EQ(slice(s, 0, 180), s);
  EXPECT_EQ(code_of([&] { slice(s, 500, 600); }), ErrorCode::EmptySlice);
  EXPECT_EQ(code_of([&] { slice(s, 100, 100); }), ErrorCode::InvalidArgument);
}

TEST(Slice, Idempotent) {
  std::vector<Timestamp> ts;
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) {
    ts.push_back(i * 13);
    v.push_back(i);
  }
  Signal s = make_signal(ts, v);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<Timestamp> pick(0, 1300);
    Timestamp a = pick(rng), b = pick(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 30) continue;
    Signal once = slice(s, a, b);
    EXPECT_EQ(slice(once, a, b), once);
  }
}

TEST(Events, Validation) {
  EXPECT_THROW(make_event(5, 5), Error);
  EXPECT_THROW(make_event(5, 6, -1.0), Error);
  EXPECT_TRUE(overlaps(make_event(0, 10), make_event(10, 20)));
  EXPECT_FALSE(overlaps(make_event(0, 10), make_event(11, 20)));
}

TEST(Synthetic, Deterministic) {
  SyntheticSpec spec;
  spec.n = 1000;
  spec.noise_sd = 0.05;
  spec.anomalies.count = 3;
  spec.seed = 7;
  SyntheticSignal a = generate_synthetic(spec);
  SyntheticSignal b = generate_synthetic(spec);
  EXPECT_EQ(a.signal, b.signal);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.truth.size(), 3u);
}

TEST(Synthetic, NoAnomaliesGivesBasePlusNoise) {
  SyntheticSpec spec;
  spec.anomalies.count = 0;
  spec.seed = 5;
  EXPECT_TRUE(generate_synthetic(spec).truth.empty());
}

// Oracle: the base process alone is the same spec with noise and anomalies
// switched off, because each ingredient draws from its own stream.
TEST(Synthetic, InjectedDeviationAtLeastFourNoiseSd) {
  for (std::uint64_t seed : {1u, 7u, 42u}) {
    for (AnomalyKind kind : {AnomalyKind::spike, AnomalyKind::level_shift, AnomalyKind::dropout}) {
      SyntheticSpec spec;
      spec.n = 1000;
      spec.noise_sd = 0.05;
      spec.anomalies.count = 3;
      spec.anomalies.kind = kind;
      spec.seed = seed;
      SyntheticSignal full = generate_synthetic(spec);

      SyntheticSpec base_spec = spec;
      base_spec.noise_sd = 0.0;
      base_spec.anomalies.count = 0;
      Signal base = generate_synthetic(base_spec).signal;

      for (const Event& e : full.truth) {
        const std::size_t lo = lower_index(full.signal.timestamps(), e.t_s);
        const std::size_t hi = lower_index(full.signal.timestamps(), e.t_e);
        double worst = 0.0;
        for (std::size_t i = lo; i <= hi && i < full.signal.size(); ++i) {
          const auto r = static_cast<Eigen::Index>(i);
          worst = std::max(worst, std::abs(full.signal.values()(r, 0) - base.values()(r, 0)));
        }
        EXPECT_GE(worst, 4.0 * spec.noise_sd) << "seed " << seed;
      }
    }
  }
}

TEST(Synthetic, SineBaseMatchesClosedForm) {
  SyntheticSpec spec;
  spec.n = 300;
  spec.noise_sd = 0.0;
  spec.seed = 9;
  Signal s = generate_synthetic(spec).signal;
  // Period 100 samples: x[i + 100] == x[i].
  for (Eigen::Index i = 0; i + 100 < 300; ++i) {
    EXPECT_NEAR(s.values()(i, 0), s.values()(i + 100, 0), 1e-9);
  }
  EXPECT_EQ(s.timestamps()[1] - s.timestamps()[0], 60);
}

TEST(Synthetic, TruthDisjointAndInsideSpan) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    SyntheticSpec spec;
    spec.n = 200 + rng() % 2000;
    spec.m = 1 + rng() % 3;
    spec.base = static_cast<BaseProcess>(rng() % 3);
    spec.anomalies.count = rng() % 6;
    spec.anomalies.min_len = 2 + rng() % 5;
    spec.anomalies.max_len = spec.anomalies.min_len + rng() % 10;
    spec.anomalies.kind = static_cast<AnomalyKind>(rng() % 3);
    spec.seed = rng();
    SyntheticSignal out = generate_synthetic(spec);
    for (std::size_t i = 0; i < out.truth.size(); ++i) {
      EXPECT_LT(out.truth[i].t_s, out.truth[i].t_e);
      EXPECT_GE(out.truth[i].t_s, out.signal.start());
      EXPECT_LE(out.truth[i].t_e, out.signal.end());
      if (i > 0) EXPECT_FALSE(overlaps(out.truth[i - 1], out.truth[i]));
    }
  }
}

TEST(Synthetic, InfeasibleSpec) {
  SyntheticSpec spec;
  spec.n = 100;
  spec.anomalies.count = 20;
  spec.anomalies.min_len = 10;
  spec.anomalies.max_len = 10;
  EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::InfeasibleSpec);
}
