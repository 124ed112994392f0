#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/tuning/tuner.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace tsad;

namespace {

HyperparamKey key(const std::string& s) { return HyperparamKey::parse(s); }

SearchSpace mixed_space() {
  return SearchSpace({{key("a.int"), HyperparamSpec::int_range(1, 11, 3)},
                      {key("a.float"), HyperparamSpec::float_range(-2.0, 6.0, 0.0)},
                      {key("b.cat"), HyperparamSpec::categorical({"a", "b", "c"}, "a")},
                      {key("b.flag"), HyperparamSpec::boolean(false)}});
}

TemplatePtr bundled(const std::string& name) {
  return load_template_file(std::filesystem::path(TSAD_TEST_TEMPLATE_DIR) / (name + ".json"));
}

}  // namespace

TEST(Encode, Examples) {
  SearchSpace ints({{key("s.k"), HyperparamSpec::int_range(1, 11, 1)}});
  EXPECT_EQ(ints.encode({{key("s.k"), std::int64_t{6}}}), (std::vector<double>{0.5}));
  EXPECT_EQ(std::get<std::int64_t>(ints.decode(std::vector<double>{0.5}).at(key("s.k"))), 6);
  EXPECT_EQ(std::get<std::int64_t>(ints.decode(std::vector<double>{0.45}).at(key("s.k"))), 6);
  EXPECT_EQ(std::get<std::int64_t>(ints.decode(std::vector<double>{0.44}).at(key("s.k"))), 5);

  SearchSpace cats({{key("s.c"), HyperparamSpec::categorical({"a", "b", "c"}, "a")}});
  EXPECT_EQ(cats.encode({{key("s.c"), std::string("b")}}), (std::vector<double>{0, 1, 0}));
  EXPECT_THROW(ints.encode({{key("s.k"), std::int64_t{12}}}), Error);
  EXPECT_THROW(ints.encode({}), Error);
}

TEST(Encode, RoundTripRandomAssignments) {
  SearchSpace space = mixed_space();
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    Assignment lambda;
    lambda[key("a.int")] = static_cast<std::int64_t>(1 + rng() % 11);
    lambda[key("a.float")] = std::uniform_real_distribution<double>(-2.0, 6.0)(rng);
    lambda[key("b.cat")] = std::string(1, static_cast<char>('a' + rng() % 3));
    lambda[key("b.flag")] = rng() % 2 == 0;
    const auto point = space.encode(lambda);
    for (double v : point) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    const Assignment back = space.decode(point);
    EXPECT_EQ(std::get<std::int64_t>(back.at(key("a.int"))), std::get<std::int64_t>(lambda.at(key("a.int"))));
    EXPECT_NEAR(std::get<double>(back.at(key("a.float"))), std::get<double>(lambda.at(key("a.float"))), 1e-12);
    EXPECT_EQ(back.at(key("b.cat")), lambda.at(key("b.cat")));
    EXPECT_EQ(back.at(key("b.flag")), lambda.at(key("b.flag")));
  }
}

TEST(Gp, InterpolatesSingleTrial) {
  std::vector<Point> x{{0.3, 0.7}};
  std::vector<double> y{2.5};
  Posterior post = gp_posterior(x, y, x);
  EXPECT_NEAR(post.mean[0], 2.5, 1e-6);
  EXPECT_NEAR(post.variance[0], 1e-6, 1e-7);
}

TEST(Gp, RevertsToPriorFarAway) {
  std::vector<Point> x{{0.0}, {0.05}};
  std::vector<double> y{1.0, 3.0};
  Posterior post = gp_posterior(x, y, std::vector<Point>{{1.0}});
  EXPECT_NEAR(post.mean[0], 2.0, 1e-6);
  // Prior variance on the standardised scale is 1; the score sd is 1.
  EXPECT_NEAR(post.variance[0], 1.0, 1e-6);
}

// Oracle: build K + noise*I directly and solve with a full-pivot LU.
TEST(Gp, MatchesDirectKernelSolve) {
  std::vector<Point> x{{0.05}, {0.3}, {0.5}, {0.72}, {0.95}};
  std::vector<double> y;
  for (const auto& p : x) y.push_back(std::sin(6.0 * p[0]));
  Posterior at_trials = gp_posterior(x, y, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(at_trials.mean[i], y[i], 1e-3);

  const double ell = 0.1;
  double m = 0;
  for (double v : y) m += v;
  m /= 5.0;
  double sd = 0;
  for (double v : y) sd += (v - m) * (v - m);
  sd = std::sqrt(sd / 5.0);
  Eigen::MatrixXd k(5, 5);
  Eigen::VectorXd z(5);
  for (int i = 0; i < 5; ++i) {
    z(i) = (y[static_cast<std::size_t>(i)] - m) / sd;
    for (int j = 0; j < 5; ++j) {
      const double d = x[static_cast<std::size_t>(i)][0] - x[static_cast<std::size_t>(j)][0];
      k(i, j) = std::exp(-d * d / (2 * ell * ell)) + (i == j ? 1e-6 : 0.0);
    }
  }
  const Eigen::VectorXd alpha = k.fullPivLu().solve(z);
  std::vector<Point> probes{{0.1}, {0.4}, {0.6}, {0.85}};
  Posterior post = gp_posterior(x, y, probes);
  for (std::size_t c = 0; c < probes.size(); ++c) {
    Eigen::VectorXd ks(5);
    for (int i = 0; i < 5; ++i) {
      const double d = x[static_cast<std::size_t>(i)][0] - probes[c][0];
      ks(i) = std::exp(-d * d / (2 * ell * ell));
    }
    EXPECT_NEAR(post.mean[c], m + sd * ks.dot(alpha), 1e-9);
    const double var = 1.0 - ks.dot(k.fullPivLu().solve(ks));
    EXPECT_NEAR(post.variance[c], std::max(var, 0.0) * sd * sd, 1e-9);
    EXPECT_GE(post.variance[c], 0.0);
  }
}

TEST(Gp, DuplicatePointsStillFactorise) {
  std::vector<Point> x(6, Point{0.5, 0.5});
  std::vector<double> y{1, 2, 3, 1, 2, 3};
  Posterior post = gp_posterior(x, y, x);
  EXPECT_TRUE(std::isfinite(post.mean[0]));
}

TEST(Ei, Properties) {
  EXPECT_EQ(expected_improvement(1.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(expected_improvement(2.0, 0.0, 1.0), 1.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 500; ++i) EXPECT_GE(expected_improvement(n(rng), std::abs(n(rng)), n(rng)), 0.0);
}

TEST(Session, DefaultsFirstAndDeterministic) {
  SearchSpace space = mixed_space();
  TunerConfig config;
  config.budget = 12;
  config.seed = 4;
  auto score = [](const Assignment& l) {
    return -std::pow(std::get<double>(l.at(HyperparamKey::parse("a.float"))) - 1.0, 2);
  };
  TuningSession a = tune_function(space, score, config);
  TuningSession b = tune_function(space, score, config);
  ASSERT_EQ(a.trials().size(), 12u);
  EXPECT_EQ(a.trials()[0].lambda, space.defaults());
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(a.trials()[i].lambda, b.trials()[i].lambda);
  EXPECT_EQ(a.best_index(), b.best_index());
  EXPECT_THROW(a.propose(), Error);
}

TEST(Session, BestIsArgmax) {
  SearchSpace space({{key("x.v"), HyperparamSpec::float_range(0.0, 1.0, 0.5)}});
  TunerConfig config;
  config.budget = 15;
  TuningSession s = tune_function(
      space, [](const Assignment& l) { return -std::pow(std::get<double>(l.begin()->second) - 0.3, 2); }, config);
  const auto best = s.best_index();
  ASSERT_TRUE(best);
  for (const Trial& t : s.trials()) EXPECT_LE(t.score, s.trials()[*best].score);
}

TEST(Session, FailedTrialsRecordedAsNegativeInfinity) {
  SearchSpace space({{key("x.v"), HyperparamSpec::float_range(0.0, 1.0, 0.5)}});
  TunerConfig config;
  config.budget = 8;
  TuningSession s = tune_function(
      space,
      [](const Assignment& l) -> double {
        if (std::get<double>(l.begin()->second) < 0.5) throw Error(ErrorCode::InvalidArgument, "no");
        return 1.0;
      },
      config);
  bool saw_failure = false;
  for (const Trial& t : s.trials()) saw_failure = saw_failure || std::isinf(t.score);
  EXPECT_TRUE(saw_failure);
  EXPECT_NE(s.log_jsonl().find("\"score\":null"), std::string::npos);
  auto line = nlohmann::json::parse(s.log_jsonl().substr(0, s.log_jsonl().find('\n')));
  EXPECT_TRUE(line.contains("index"));
  EXPECT_TRUE(line.contains("lambda"));
  EXPECT_TRUE(line.contains("duration_s"));
}

TEST(Session, FindsQuadraticOptimum) {
  SearchSpace space({{key("x.v"), HyperparamSpec::float_range(0.0, 1.0, 0.5)}});
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TunerConfig config;
    config.budget = 30;
    config.seed = seed;
    TuningSession s = tune_function(
        space, [](const Assignment& l) { return -std::pow(std::get<double>(l.begin()->second) - 0.3, 2); },
        config);
    const double best = std::get<double>(s.trials()[*s.best_index()].lambda.begin()->second);
    hits += std::abs(best - 0.3) <= 0.05 ? 1 : 0;
  }
  EXPECT_GE(hits, 19);
}

TEST(Tune, BudgetOneReturnsDefaults) {
  TemplatePtr ar = bundled("ar_dynamic_threshold");
  SyntheticSpec spec;
  spec.n = 500;
  Signal signal = generate_synthetic(spec).signal;
  Objective objective{ObjectiveKind::unsupervised_mse, &signal, nullptr};
  TuneResult r = tune(ar, objective, 1, SpaceScope::unsupervised_subpipeline);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best.assignment(), instantiate(ar).assignment());
  EXPECT_NEAR(r.best_score, evaluate_objective(r.best, objective), 1e-9);
  EXPECT_THROW(tune(ar, objective, 0, SpaceScope::full), Error);
}

TEST(Tune, SupervisedNeedsTruth) {
  TemplatePtr ar = bundled("ar_dynamic_threshold");
  SyntheticSpec spec;
  Signal signal = generate_synthetic(spec).signal;
  EventList empty;
  Objective objective{ObjectiveKind::supervised_f1, &signal, &empty};
  EXPECT_THROW(tune(ar, objective, 3, SpaceScope::full), Error);
}

TEST(Tune, SupervisedNeverWorseThanDefaults) {
  TemplatePtr ar = bundled("ar_dynamic_threshold");
  SyntheticSpec spec;
  spec.n = 1500;
  spec.anomalies.count = 3;
  spec.seed = 12;
  SyntheticSignal data = generate_synthetic(spec);
  Objective objective{ObjectiveKind::supervised_f1, &data.signal, &data.truth};
  const double default_score = evaluate_objective(instantiate(ar), objective);
  TuneResult r = tune(ar, objective, 8, SpaceScope::full, 3);
  EXPECT_GE(r.best_score, default_score);
  EXPECT_NEAR(r.best_score, evaluate_objective(r.best, objective), 1e-9);
}

// Oracle: the exhaustive sweep over window_size shows which lags suffice.
TEST(Tune, UnsupervisedArWindowCoversTrueOrder) {
  TemplatePtr ar = bundled("ar_dynamic_threshold");
  auto rng = seeded_engine(77, 0);
  std::normal_distribution<double> eps(0.0, 0.1);
  const std::size_t n = 1500;
  std::vector<Timestamp> ts(n);
  Matrix v(n, 1);
  double x1 = 0, x2 = 0, x3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 0.5 * x1 - 0.3 * x2 + 0.4 * x3 + eps(rng);
    x3 = x2;
    x2 = x1;
    x1 = x;
    ts[i] = static_cast<Timestamp>(i) * 60;
    v(static_cast<Eigen::Index>(i), 0) = x;
  }
  Signal signal("ar3", ts, v);
  Objective objective{ObjectiveKind::unsupervised_mse, &signal, nullptr};
  auto with_window = [&](std::int64_t w) {
    return evaluate_objective(instantiate(ar, Assignment{{key("make_windows.window_size"), w}}), objective);
  };
  EXPECT_LT(with_window(2), with_window(3));

  int hits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TuneResult r = tune(ar, objective, 12, SpaceScope::unsupervised_subpipeline, seed);
    hits += std::get<std::int64_t>(r.best.assignment().at(key("make_windows.window_size"))) >= 3 ? 1 : 0;
  }
  EXPECT_EQ(hits, 5);
}
