#include "tsad/tuning/gp.hpp"

#include "tsad/core/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tsad {

namespace {

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

Posterior gp_posterior(std::span<const Point> x, std::span<const double> y,
                       std::span<const Point> candidates, const GpConfig& config) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "gp needs at least one trial and one score per trial");
  }
  const std::size_t d = x.front().size();
  const double ell = config.length_scale > 0.0 ? config.length_scale
                                               : 0.1 * std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
  const double sf2 = config.signal_variance;
  auto kernel = [&](const Point& a, const Point& b) {
    return sf2 * std::exp(-sq_dist(a, b) / (2.0 * ell * ell));
  };

  const auto n = static_cast<Eigen::Index>(x.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(y.size()));
  if (!(sd > 0.0)) sd = 1.0;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = (y[static_cast<std::size_t>(i)] - mean) / sd;

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
    }
  }

  double noise = config.noise;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (;;) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise;
    llt.compute(kn);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const Eigen::MatrixXd l = llt.matrixL();
      ok = l.allFinite() && (l.diagonal().array() > 0.0).all();
    }
    if (ok) break;
    noise *= 10.0;
    if (noise > config.max_noise * (1.0 + 1e-9)) {
      throw Error(ErrorCode::NumericalFailure, "kernel matrix not positive definite");
    }
  }
  const Eigen::VectorXd alpha = llt.solve(z);

  Posterior post;
  post.noise_used = noise;
  post.mean.reserve(candidates.size());
  post.variance.reserve(candidates.size());
  Eigen::VectorXd ks(n);
  for (const Point& c : candidates) {
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x[static_cast<std::size_t>(i)], c);
    const double mu = ks.dot(alpha);
    const Eigen::VectorXd v = llt.matrixL().solve(ks);
    const double s2 = std::max(sf2 - v.squaredNorm(), 0.0);
    post.mean.push_back(mean + sd * mu);
    post.variance.push_back(s2 * sd * sd);
  }
  return post;
}

double expected_improvement(double mu, double sigma, double best) {
  if (!(sigma > 0.0)) return std::max(mu - best, 0.0);
  const double u = (mu - best) / sigma;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max((mu - best) * cdf + sigma * pdf, 0.0);
}

}  // namespace tsad
