#pragma once

#include <cstdint>
#include <vector>

#include "adass/prior.hpp"
#include "adass/rng.hpp"

namespace adass {

/// Full parameter state of one chain.
///
/// Invariants: B(j, k) == 0 whenever u[j] * v[k] == 0; at least one u and one
/// v are set; tau and psi strictly positive; sigma_z SPD (identity unless the
/// factor covariance has an inverse-Wishart prior).
struct FactorState {
  Matrix B;                       // p x q loadings
  std::vector<std::uint8_t> u;    // row indicators (length p)
  std::vector<std::uint8_t> v;    // column indicators (length q)
  Matrix tau;                     // p x q slab scales
  Matrix Z;                       // n x q latent factors
  Vector psi;                     // length 1 (homogeneous) or p
  Matrix sigma_z;                 // q x q

  int support_size() const;   // |S| = number of u_j == 1
  int active_columns() const; // |K| = number of v_k == 1
  /// Factor dimensionality: number of nonzero columns of B.
  int xi() const;
  /// Number of nonzero rows of B.
  int nonzero_rows() const;
  double noise(int j) const { return psi.size() == 1 ? psi(0) : psi(j); }
  /// B B^T + diag(noise).
  Matrix covariance() const;
  /// True when the spike, non-emptiness and positivity invariants hold.
  bool consistent() const;
};

struct ChainSettings {
  int n_iter = 3000;
  int burn_in = 500;
  int thin = 5;
  bool snapshot_loadings = false;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;

  void validate() const;
  int retained() const { return (n_iter - burn_in) / thin; }
};

/// Post-burn-in, thinned record of a chain.
struct ChainTrace {
  std::vector<int> iteration;
  std::vector<int> xi;
  std::vector<int> support_size;
  std::vector<double> psi;   // psi, or mean of the psi_j in heterogeneous mode
  Matrix sigma_mean;         // running mean of B B^T + diag(psi)
  Vector psi_mean;           // posterior mean of psi (length 1 or p)
  std::vector<Matrix> loadings;  // optional B snapshots

  std::size_t retained() const { return xi.size(); }
};

/// One Gibbs kernel over a fixed data matrix. Owns the chain state plus the
/// residual matrix Y - Z B^T, which every update keeps in sync.
class GibbsSampler {
 public:
  /// `data` is n x p and must outlive the sampler.
  GibbsSampler(const Matrix& data, ModelConfig cfg, FactorState state);

  /// Initial state: all indicators on, loadings from the rank-q truncated
  /// eigendecomposition of the sample covariance, tau = 1, Z drawn from its
  /// conditional.
  static FactorState initial_state(const Matrix& data, const ModelConfig& cfg, RngHandle& rng);

  const FactorState& state() const { return state_; }
  const ModelConfig& config() const { return cfg_; }
  const Matrix& residual() const { return residual_; }
  /// Replace the state (e.g. a frozen state in tests); rebuilds caches.
  void set_state(FactorState state);

  void update_beta(RngHandle& rng);
  void update_tau(RngHandle& rng);
  void update_u(RngHandle& rng);
  void update_v(RngHandle& rng);
  void update_Z(RngHandle& rng);
  void update_psi(RngHandle& rng);
  /// Requires an inverse-Wishart factor covariance; StateError otherwise.
  void update_sigma_z(RngHandle& rng);

  /// beta, tau, u, v, Z, psi [, sigma_z].
  void sweep(RngHandle& rng);

  /// log rho_j^row for row j at the current state (j's own indicator ignored).
  double log_rho_row(int j) const;
  /// log rho_k^col for column k at the current state.
  double log_rho_col(int k) const;

 private:
  void check_state() const;
  void refresh_caches();
  void recompute_residual();
  void update_beta_row(int j, RngHandle& rng);

  const Matrix& data_;
  ModelConfig cfg_;
  FactorState state_;
  Matrix residual_;    // n x p, Y - Z B^T
  Vector z_sq_norm_;   // squared norms of the Z columns
};

/// Run a chain from the default initial state.
ChainTrace run_chain(const Matrix& data, const ModelConfig& cfg, const ChainSettings& settings);

}  // namespace adass
