#include "adass/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "adass/errors.hpp"

namespace adass {

namespace {

constexpr double kGigGammaLimit = 1e-300;

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  }
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// The three generators below sample the standardized GIG with density
// proportional to x^{lambda-1} exp(-omega (x + 1/x) / 2), lambda >= 0.
// Hormann & Leydold (2014), Stat. Comput. 24:547-557.

// Ratio-of-uniforms with the mode shift; used for lambda > 2 or omega > 3.
double gig_rou_shift(double lambda, double omega, RngHandle& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Bounding rectangle from the roots of a depressed cubic.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  double x = 0.0;
  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) break;
  }
  return x;
}

// Ratio-of-uniforms without shift; log-concave region near the origin.
double gig_rou_noshift(double lambda, double omega, RngHandle& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);

  double x = 0.0;
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) break;
  }
  return x;
}

// Rejection from a three-piece hat; covers the non-log-concave corner
// (0 <= lambda < 1, omega small) which includes c = 1/2 with b -> 0.
double gig_three_piece(double lambda, double omega, RngHandle& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double xs = 2.0 / omega;
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double area0 = k0 * x0;
  double k1 = 0.0, area1 = 0.0, k2 = 0.0, area2 = 0.0;
  if (x0 >= xs) {
    k2 = std::pow(x0, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area1 = lambda == 0.0 ? k1 * std::log(xs / x0)
                          : k1 / lambda * (std::pow(xs, lambda) - std::pow(x0, lambda));
    k2 = std::pow(xs, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-omega * xs / 2.0) / omega;
  }
  const double total = area0 + area1 + area2;
  const double tail_start = std::max(x0, xs);

  for (;;) {
    double v = total * rng.uniform();
    double x = 0.0;
    double hx = 0.0;
    if (v <= area0) {
      x = x0 * v / area0;
      hx = k0;
    } else if ((v -= area0) <= area1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area1;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * tail_start) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace

RngHandle::RngHandle(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x5f3759dfu};
  engine_.seed(seq);
}

double RngHandle::uniform() {
  // 53 random bits centred in their cell: never 0, never 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngHandle::normal() { return normal_(engine_); }

double RngHandle::log_gamma_unit(double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(engine_));
  }
  // Gamma(a) = Gamma(a + 1) * U^{1/a}, evaluated in log space.
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  const double g = gamma(engine_);
  return std::log(g) + std::log(uniform()) / shape;
}

double sample_gig(double a, double b, double c, RngHandle& rng) {
  if (!(a > 0.0) || !(b >= 0.0) || !std::isfinite(c) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("sample_gig: requires a > 0 and b >= 0");
  }
  if (b < kGigGammaLimit) {
    if (!(c > 0.0)) throw ParameterError("sample_gig: b == 0 requires c > 0");
    return sample_gamma(c, a / 2.0, rng);
  }
  const double lambda = std::abs(c);
  const double alpha = std::sqrt(b / a);
  const double omega = std::sqrt(a * b);

  double x;
  if (lambda > 2.0 || omega > 3.0) {
    x = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    x = gig_rou_noshift(lambda, omega, rng);
  } else {
    x = gig_three_piece(lambda, omega, rng);
  }
  // GIG(-lambda) is the reciprocal of GIG(lambda) in standardized form.
  return c < 0.0 ? alpha / x : alpha * x;
}

double sample_gamma(double shape, double rate, RngHandle& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw ParameterError("sample_gamma: shape and rate must be positive");
  return std::exp(rng.log_gamma_unit(shape)) / rate;
}

double sample_inverse_gamma(double shape, double rate, RngHandle& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ParameterError("sample_inverse_gamma: shape and rate must be positive");
  }
  const double log_x = std::log(rate) - rng.log_gamma_unit(shape);
  constexpr double kLogMax = 709.782712893384;  // log(DBL_MAX)
  if (log_x >= kLogMax) return std::numeric_limits<double>::max();
  return std::max(std::exp(log_x), std::numeric_limits<double>::min());
}

double sample_laplace_unit(RngHandle& rng) {
  const double e = -std::log(rng.uniform());
  return rng.uniform() < 0.5 ? -e : e;
}

double sample_exponential(double rate, RngHandle& rng) {
  if (!(rate > 0.0)) throw ParameterError("sample_exponential: rate must be positive");
  return -std::log(rng.uniform()) / rate;
}

int sample_bernoulli_logit(double log_odds, RngHandle& rng) {
  double prob;
  if (log_odds >= 0.0) {
    prob = 1.0 / (1.0 + std::exp(-log_odds));
  } else {
    const double e = std::exp(log_odds);
    prob = e / (1.0 + e);
  }
  return rng.uniform() < prob ? 1 : 0;
}

Vector sample_mvn(const Vector& mean, const Matrix& covariance, RngHandle& rng) {
  const Eigen::Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw ParameterError("sample_mvn: covariance shape does not match mean");
  }
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();

  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() == Eigen::Success) return mean + llt.matrixL() * z;

  // Semi-definite covariance: fall back to the symmetric square root.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("sample_mvn: eigendecomposition failed");
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw NumericalError("sample_mvn: covariance is not positive semi-definite");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + eig.eigenvectors() * root.asDiagonal() * z;
}

Matrix sample_wishart(const Matrix& scale, double dof, RngHandle& rng) {
  const Eigen::Index d = scale.rows();
  if (scale.cols() != d) throw ParameterError("sample_wishart: scale must be square");
  if (!(dof > static_cast<double>(d) - 1.0)) throw ParameterError("sample_wishart: dof must exceed dim - 1");
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_wishart: scale is not SPD");

  Matrix bartlett = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // chi-square with dof - i degrees = 2 * Gamma((dof - i) / 2)
    bartlett(i, i) = std::sqrt(2.0 * sample_gamma((dof - static_cast<double>(i)) / 2.0, 1.0, rng));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Matrix la = llt.matrixL() * bartlett;
  return la * la.transpose();
}

Matrix sample_inverse_wishart(const Matrix& scale, double dof, RngHandle& rng) {
  const Eigen::Index d = scale.rows();
  if (scale.cols() != d) throw ParameterError("sample_inverse_wishart: scale must be square");
  if (!(dof > static_cast<double>(d) - 1.0)) {
    throw ParameterError("sample_inverse_wishart: dof must exceed dim - 1");
  }
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_inverse_wishart: scale is not SPD");
  const Matrix inv_scale = llt.solve(Matrix::Identity(d, d));
  const Matrix w = sample_wishart(0.5 * (inv_scale + inv_scale.transpose()), dof, rng);
  Eigen::LLT<Matrix> wllt(w);
  if (wllt.info() != Eigen::Success) throw NumericalError("sample_inverse_wishart: Wishart draw is singular");
  Matrix out = wllt.solve(Matrix::Identity(d, d));
  return 0.5 * (out + out.transpose());
}

double log_density_inverse_gamma(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double log_density_gamma(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_density_laplace_unit(double x) { return -std::log(2.0) - std::abs(x); }

double log_density_normal(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_kernel_gig(double z, double a, double b, double c) {
  if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
  return (c - 1.0) * std::log(z) - 0.5 * (a * z + b / z);
}

}  // namespace adass
