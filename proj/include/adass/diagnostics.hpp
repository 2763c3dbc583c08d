#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adass/sampler.hpp"

namespace adass {

struct PosteriorSummary {
  int xi_mode = 0;
  std::map<int, int> xi_histogram;
  std::map<int, int> support_histogram;
  Matrix sigma_mean;
  Vector psi_mean;
};

/// Mode of the retained xi (smallest value on ties), histograms, and the
/// finalized posterior means carried by the trace.
PosteriorSummary summarize(const ChainTrace& trace);

/// Smallest most-frequent value; throws on an empty series.
int mode_smallest(const std::vector<int>& values);

/// Sample autocorrelation (divisor n) at lags 0..max_lag. Throws
/// NumericalError for a constant series, where it is undefined.
Vector acf(const std::vector<double>& series, int max_lag);
/// Partial autocorrelation at lags 0..max_lag (lag 0 fixed at 1) by the
/// Durbin-Levinson recursion.
Vector pacf(const std::vector<double>& series, int max_lag);

/// Operator 2-norm of a symmetric matrix.
double spectral_norm_symmetric(const Matrix& m);
/// ||sigma_hat - sigma_star||_2 / ||sigma_star||_2.
double scaled_spectral_loss(const Matrix& sigma_hat, const Matrix& sigma_star);

struct AlignmentResult {
  std::vector<Matrix> aligned;
  Matrix consensus;
  std::vector<int> active_slots;  // columns that took part in matching
  int rounds = 0;
  bool converged = false;
};

/// Resolve column label switching and sign flips across loading snapshots.
/// Each snapshot is matched to a reference by the signed column permutation
/// minimizing Frobenius distance (Hungarian method on min(|b-p|^2, |b+p|^2)),
/// first against a pivot snapshot, then against the running consensus until
/// no permutation changes (at most 20 rounds). Only columns nonzero in at
/// least 10% of snapshots are permuted.
AlignmentResult align_loadings(const std::vector<Matrix>& snapshots, std::uint64_t seed = 1);

enum class EstimateClass { True, Over, Under };
EstimateClass classify_estimate(int r_hat, int r_true);
std::string class_name(EstimateClass c);

/// Pretty JSON summary (histograms, mode, psi mean); Sigma is not embedded.
std::string summary_json(const PosteriorSummary& summary);

}  // namespace adass
