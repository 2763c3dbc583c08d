#pragma once

#include <string>
#include <vector>

#include "adass/rng.hpp"

namespace adass {

enum class RankMethod { ET, ER, GR, ACT, DT };

std::string method_name(RankMethod m);
/// Case-insensitive; throws ParameterError on unknown names.
RankMethod parse_rank_method(const std::string& name);

/// Output of one factor-dimensionality estimator plus the quantities it was
/// computed from, for audit.
struct RankEstimate {
  RankMethod method = RankMethod::ER;
  int r_hat = 0;
  int r_max = 0;
  Vector eigenvalues_used;
  /// Per-index criterion: ratios (ER), growth ratios (GR), lambda-dagger
  /// (ACT), the threshold (ET, DT). NaN marks an excluded index.
  Vector criterion;
  std::vector<std::string> notes;
};

inline constexpr int kDefaultRMax = 10;

/// 2^{2/3} (2^{2/3} - 1), the ET mixing weight.
double et_weight();
/// 1 + sqrt(p / (n - 1)).
double act_threshold(int p, int n);
/// 2 + 6 sqrt(log p / n), the DT diagonal screening level.
double dt_diagonal_threshold(int p, int n);
/// 2 (1 + sqrt(|J|/n) + sqrt((2 (1 + |J|) log(e p) + 6 log n) / n))^2.
double dt_eigen_threshold(int j_size, int n, int p);

/// S = Y^T Y / n; with `center` the column means are removed first.
Matrix sample_covariance(const Matrix& Y, bool center = false);
Matrix sample_correlation(const Matrix& Y, bool center = false);
/// Eigenvalues in descending order (tridiagonal QR on the symmetric input).
Vector descending_eigenvalues(const Matrix& S);

RankEstimate estimate_et_spectrum(const Vector& lambda, int r_max, double w = et_weight());
RankEstimate estimate_er_spectrum(const Vector& lambda, int r_max);
RankEstimate estimate_gr_spectrum(const Vector& lambda, int r_max);
/// `lambda` are correlation-matrix eigenvalues; n is the sample size.
RankEstimate estimate_act_spectrum(const Vector& lambda, int n, int r_max);

RankEstimate estimate_et(const Matrix& S, int r_max = kDefaultRMax, double w = et_weight());
RankEstimate estimate_er(const Matrix& S, int r_max = kDefaultRMax);
RankEstimate estimate_gr(const Matrix& S, int r_max = kDefaultRMax);
RankEstimate estimate_act(const Matrix& R, int n, int r_max = kDefaultRMax);
/// Randomized: perturbs Y with fresh N(0, I) noise drawn from `rng`.
RankEstimate estimate_dt(const Matrix& Y, int r_max, RngHandle& rng);

}  // namespace adass
