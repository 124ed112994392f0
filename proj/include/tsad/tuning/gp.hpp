#pragma once

#include <span>
#include <vector>

namespace tsad {

using Point = std::vector<double>;

struct GpConfig {
  double signal_variance = 1.0;
  double noise = 1e-6;
  double max_noise = 1e-2;
  // Length-scale 0.1 * sqrt(d) when not set.
  double length_scale = 0.0;
};

struct Posterior {
  std::vector<double> mean;
  std::vector<double> variance;
  double noise_used = 0.0;
};

/// Zero-mean GP on standardised scores with an RBF kernel, solved exactly by
/// Cholesky. Mean and variance are returned on the original score scale.
/// When the factorisation fails the diagonal noise grows tenfold up to
/// `max_noise`, then NumericalFailure is thrown.
Posterior gp_posterior(std::span<const Point> x, std::span<const double> y,
                       std::span<const Point> candidates, const GpConfig& config = {});

/// EI for maximisation; sigma == 0 gives max(mu - best, 0).
double expected_improvement(double mu, double sigma, double best);

}  // namespace tsad
