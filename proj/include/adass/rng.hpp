#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace adass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seeded random stream. A (seed, stream_id) pair always reproduces the same
/// draw sequence; different stream ids give independent streams. Not
/// thread-safe: one handle per chain or replication.
class RngHandle {
 public:
  RngHandle(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
  /// variate itself underflows.
  double log_gamma_unit(double shape);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// GIG(a, b, c) with density proportional to z^{c-1} exp(-(a z + b / z) / 2).
/// Requires a > 0, b >= 0, and c > 0 whenever b == 0.
double sample_gig(double a, double b, double c, RngHandle& rng);

/// Gamma with the given shape and rate (mean shape / rate).
double sample_gamma(double shape, double rate, RngHandle& rng);

/// Inverse gamma with shape and rate: rate / Gamma(shape, 1). Draws that would
/// overflow are clamped to the largest finite double.
double sample_inverse_gamma(double shape, double rate, RngHandle& rng);

double sample_laplace_unit(RngHandle& rng);
double sample_exponential(double rate, RngHandle& rng);

/// Bernoulli with success probability 1 / (1 + exp(-log_odds)); exact for
/// arbitrarily large |log_odds|.
int sample_bernoulli_logit(double log_odds, RngHandle& rng);

/// N(mean, covariance) for symmetric positive semi-definite covariance.
Vector sample_mvn(const Vector& mean, const Matrix& covariance, RngHandle& rng);

/// Wishart(scale, dof) via the Bartlett decomposition.
Matrix sample_wishart(const Matrix& scale, double dof, RngHandle& rng);

/// Inverse-Wishart(scale, dof), mean scale / (dof - dim - 1). Drawn as the
/// inverse of a Wishart on the inverted scale.
Matrix sample_inverse_wishart(const Matrix& scale, double dof, RngHandle& rng);

// Log-densities, normalized.
double log_density_inverse_gamma(double x, double shape, double rate);
double log_density_gamma(double x, double shape, double rate);
double log_density_laplace_unit(double x);
double log_density_normal(double x, double mean, double variance);

/// Unnormalized GIG log-density (c - 1) log z - (a z + b / z) / 2.
double log_kernel_gig(double z, double a, double b, double c);

}  // namespace adass
