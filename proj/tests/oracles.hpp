#pragma once

// Independent numerical references for the samplers: densities are written
// out from the model directly and integrated by quadrature.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double integrate(F f, double lo, double hi) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-13, &err);
}

/// Kolmogorov-Smirnov distance between `draws` and the law with
/// unnormalized log density `logf` supported on (lo, hi).
template <class LogF>
double ks_distance(std::vector<double> draws, LogF logf, double lo, double hi) {
  std::sort(draws.begin(), draws.end());
  double shift = -kInf;
  for (std::size_t i = 0; i < draws.size(); i += 97) shift = std::max(shift, logf(draws[i]));
  auto f = [&](double x) {
    if (x <= lo || x >= hi) return 0.0;
    return std::exp(logf(x) - shift);
  };
  const double total = integrate(f, lo, hi);
  const double n = static_cast<double>(draws.size());
  double cdf = integrate(f, lo, draws.front());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (i > 0 && draws[i] > draws[i - 1])
      cdf += boost::math::quadrature::gauss<double, 15>::integrate(f, draws[i - 1], draws[i]);
    const double F = cdf / total;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

/// Mean and variance of the normalized law with log density `logf`.
template <class LogF>
std::pair<double, double> moments(LogF logf, double lo, double hi, double shift) {
  auto f0 = [&](double x) { return std::exp(logf(x) - shift); };
  const double z = integrate(f0, lo, hi);
  const double m = integrate([&](double x) { return x * f0(x); }, lo, hi) / z;
  const double v = integrate([&](double x) { return (x - m) * (x - m) * f0(x); }, lo, hi) / z;
  return {m, v};
}

/// log of  int N(r; z b, psi I) N(b; 0, tau) db / N(r; 0, psi I), the
/// marginal-likelihood ratio of a single loading against the spike.
template <class Vec>
double log_slab_spike_ratio(const Vec& r, const Vec& z, double psi, double tau) {
  auto g = [&](double b) {
    const double quad = ((r - z * b).squaredNorm() - r.squaredNorm()) / (2.0 * psi);
    return std::exp(-quad - b * b / (2.0 * tau)) / std::sqrt(2.0 * M_PI * tau);
  };
  // Center the quadrature on the integrand peak so the infinite-range map
  // sees the mass near zero.
  const double peak = z.dot(r) / psi / (z.squaredNorm() / psi + 1.0 / tau);
  return std::log(integrate([&](double t) { return g(peak + t); }, -kInf, kInf));
}

/// log C(n, k).
inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace oracle
