#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "adass/rng.hpp"

namespace adass {

enum class NoiseMode { homogeneous, heterogeneous };

/// Inverse-Wishart prior IW(scale, dof) on the latent factor covariance.
struct InverseWishartPrior {
  Matrix scale;
  double dof = 0.0;
};

/// Hyperparameters of the adaptive spike-and-slab model.
struct ModelConfig {
  int p = 0;
  int n = 0;
  /// Column budget; 0 selects ceil(sqrt(n)) (clamped to p - 1) in resolved().
  int q = 0;
  /// Exponent of the (p v n)^{-A omega xi} coupling.
  double A = 0.1;
  /// IG(a1, a2) prior on the homogeneous noise variance.
  double a1 = 0.01;
  double a2 = 0.01;
  NoiseMode noise_mode = NoiseMode::homogeneous;
  /// Optional per-variable IG parameters for heterogeneous noise; when empty
  /// every variable uses (a1, a2).
  Vector a1_per_variable;
  Vector a2_per_variable;
  /// Empty = independent standard-normal factors.
  std::optional<InverseWishartPrior> factor_cov;

  /// log(max(p, n)).
  double log_pn() const;
  /// Copy with q filled in and clamped; flags clamping through `clamped`.
  ModelConfig resolved(bool* clamped = nullptr) const;
  /// Throws ParameterError on any violated invariant. Requires q resolved.
  void validate() const;

  double noise_shape(int j) const;
  double noise_rate(int j) const;
};

/// ceil(sqrt(n)).
int default_q(int n);

/// Unnormalized log Q_A(omega, xi) = -log C(p, omega) - log C(q, xi)
///   - A omega xi log(p v n).
double log_Q(int omega, int xi, const ModelConfig& cfg);

/// log Q_A(s + 1, k) - log Q_A(s, k) with s = |S \ {j}|, k = |K|.
double log_prior_ratio_row(int s_minus, int k_active, const ModelConfig& cfg);

/// log Q_A(s, k + 1) - log Q_A(s, k) with k = |K \ {k}|, s = |S|.
double log_prior_ratio_col(int k_minus, int s_active, const ModelConfig& cfg);

/// Dirac-spike / Laplace(1)-slab log prior of B given the indicators; -inf
/// when a spiked entry is nonzero.
double log_prior_loading(const Matrix& B, const std::vector<std::uint8_t>& u,
                         const std::vector<std::uint8_t>& v);

}  // namespace adass
