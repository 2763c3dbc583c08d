#include "adass/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "adass/errors.hpp"

namespace adass {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_r_max(int r_max, Eigen::Index needed, Eigen::Index p, const char* who) {
  if (r_max < 1) throw ParameterError(std::string(who) + ": r_max must be positive");
  if (needed > p) {
    throw ParameterError(std::string(who) + ": r_max too large for p = " + std::to_string(p));
  }
}

// Eigenvalues at or below this level are treated as exact zeros.
double zero_floor(const Vector& lambda) {
  return std::max(lambda.cwiseAbs().maxCoeff(), 1.0) * 1e-12 * static_cast<double>(lambda.size());
}

}  // namespace

std::string method_name(RankMethod m) {
  switch (m) {
    case RankMethod::ET: return "ET";
    case RankMethod::ER: return "ER";
    case RankMethod::GR: return "GR";
    case RankMethod::ACT: return "ACT";
    case RankMethod::DT: return "DT";
  }
  return "?";
}

RankMethod parse_rank_method(const std::string& name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (RankMethod m : {RankMethod::ET, RankMethod::ER, RankMethod::GR, RankMethod::ACT, RankMethod::DT}) {
    if (method_name(m) == up) return m;
  }
  throw ParameterError("unknown estimator '" + name + "'");
}

double et_weight() {
  const double c = std::cbrt(4.0);  // 2^{2/3}
  return c * (c - 1.0);
}

double act_threshold(int p, int n) { return 1.0 + std::sqrt(static_cast<double>(p) / (n - 1.0)); }

double dt_diagonal_threshold(int p, int n) {
  return 2.0 + 6.0 * std::sqrt(std::log(static_cast<double>(p)) / n);
}

double dt_eigen_threshold(int j_size, int n, int p) {
  const double nn = n;
  const double tail = std::sqrt((2.0 * (1.0 + j_size) * (1.0 + std::log(static_cast<double>(p))) + 6.0 * std::log(nn)) / nn);
  const double base = 1.0 + std::sqrt(j_size / nn) + tail;
  return 2.0 * base * base;
}

Matrix sample_covariance(const Matrix& Y, bool center) {
  if (Y.rows() < 1) throw InputError("sample_covariance: no observations");
  Matrix centered = Y;
  if (center) centered.rowwise() -= Y.colwise().mean();
  Matrix S = Matrix::Zero(Y.cols(), Y.cols());
  S.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(Y.rows()));
  return S.selfadjointView<Eigen::Lower>();
}

Matrix sample_correlation(const Matrix& Y, bool center) {
  Matrix S = sample_covariance(Y, center);
  const Vector d = S.diagonal();
  if ((d.array() <= 0.0).any()) throw NumericalError("sample_correlation: a variable has zero variance");
  const Vector inv_sd = d.cwiseSqrt().cwiseInverse();
  Matrix R = inv_sd.asDiagonal() * S * inv_sd.asDiagonal();
  R.diagonal().setOnes();
  return R;
}

Vector descending_eigenvalues(const Matrix& S) {
  if (S.rows() != S.cols()) throw ParameterError("descending_eigenvalues: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return eig.eigenvalues().reverse();
}

RankEstimate estimate_et_spectrum(const Vector& lambda, int r_max, double w) {
  check_r_max(r_max, 2 * static_cast<Eigen::Index>(r_max) + 1, lambda.size(), "estimate_et");
  RankEstimate est;
  est.method = RankMethod::ET;
  est.r_max = r_max;
  est.eigenvalues_used = lambda;
  const double threshold = w * lambda(r_max) + (1.0 - w) * lambda(2 * r_max);
  est.criterion = Vector::Constant(1, threshold);
  int count = 0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (lambda(j) > threshold) ++count;
  }
  if (count > r_max) {
    est.notes.push_back(std::to_string(count) + " eigenvalues exceed the threshold; capped at r_max");
    count = r_max;
  }
  est.r_hat = count;
  return est;
}

RankEstimate estimate_er_spectrum(const Vector& lambda, int r_max) {
  check_r_max(r_max, static_cast<Eigen::Index>(r_max) + 1, lambda.size(), "estimate_er");
  RankEstimate est;
  est.method = RankMethod::ER;
  est.r_max = r_max;
  est.eigenvalues_used = lambda;
  est.criterion = Vector::Constant(r_max, kNaN);
  const double floor = zero_floor(lambda);
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= r_max; ++j) {
    if (lambda(j) <= floor) {
      est.notes.push_back("index " + std::to_string(j) + " excluded: lambda_" + std::to_string(j + 1) + " is zero");
      continue;
    }
    const double ratio = lambda(j - 1) / lambda(j);
    est.criterion(j - 1) = ratio;
    if (ratio > best) {
      best = ratio;
      est.r_hat = j;
    }
  }
  if (est.r_hat == 0) throw NumericalError("estimate_er: no admissible index");
  return est;
}

RankEstimate estimate_gr_spectrum(const Vector& lambda, int r_max) {
  const Eigen::Index p = lambda.size();
  check_r_max(r_max, static_cast<Eigen::Index>(r_max) + 1, p, "estimate_gr");
  RankEstimate est;
  est.method = RankMethod::GR;
  est.r_max = r_max;
  est.eigenvalues_used = lambda;
  est.criterion = Vector::Constant(r_max, kNaN);

  const double floor = zero_floor(lambda);
  // L(j) = L_j = sum_{t > j} lambda_t, eigenvalues below the floor dropped.
  Vector L = Vector::Zero(p + 1);
  for (Eigen::Index j = p - 1; j >= 0; --j) L(j) = L(j + 1) + (lambda(j) > floor ? lambda(j) : 0.0);

  double best = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= r_max; ++j) {
    if (!(L(j + 1) > 0.0) || !(L(j) > L(j + 1))) {
      est.notes.push_back("index " + std::to_string(j) + " excluded: vanishing tail sum");
      continue;
    }
    const double crit = std::log(L(j - 1) / L(j)) / std::log(L(j) / L(j + 1));
    est.criterion(j - 1) = crit;
    if (crit > best) {
      best = crit;
      est.r_hat = j;
    }
  }
  if (est.r_hat == 0) throw NumericalError("estimate_gr: no admissible index");
  return est;
}

RankEstimate estimate_act_spectrum(const Vector& lambda, int n, int r_max) {
  const Eigen::Index p = lambda.size();
  check_r_max(r_max, static_cast<Eigen::Index>(r_max) + 1, p, "estimate_act");
  if (n < 2) throw ParameterError("estimate_act: n must be at least 2");
  RankEstimate est;
  est.method = RankMethod::ACT;
  est.r_max = r_max;
  est.eigenvalues_used = lambda;
  est.criterion = Vector::Constant(r_max, kNaN);

  const double threshold = act_threshold(static_cast<int>(p), n);
  for (int j = 1; j <= r_max; ++j) {
    const double lj = lambda(j - 1);
    const double w = static_cast<double>(p - j) / (n - 1.0);
    double inner = 0.0;
    bool tie = false;
    for (Eigen::Index t = j; t < p; ++t) {
      const double gap = lambda(t) - lj;
      if (gap == 0.0) {
        tie = true;
        break;
      }
      inner += 1.0 / gap;
    }
    if (tie) {
      est.notes.push_back("index " + std::to_string(j) + " excluded: repeated eigenvalue");
      continue;
    }
    inner += 4.0 / (lambda(j) - lj);
    const double dagger = 1.0 / ((1.0 - w) / lj - w / static_cast<double>(p - j) * inner);
    est.criterion(j - 1) = dagger;
    if (dagger > threshold) est.r_hat = j;
  }
  return est;
}

RankEstimate estimate_et(const Matrix& S, int r_max, double w) {
  return estimate_et_spectrum(descending_eigenvalues(S), r_max, w);
}

RankEstimate estimate_er(const Matrix& S, int r_max) { return estimate_er_spectrum(descending_eigenvalues(S), r_max); }

RankEstimate estimate_gr(const Matrix& S, int r_max) { return estimate_gr_spectrum(descending_eigenvalues(S), r_max); }

RankEstimate estimate_act(const Matrix& R, int n, int r_max) {
  return estimate_act_spectrum(descending_eigenvalues(R), n, r_max);
}

RankEstimate estimate_dt(const Matrix& Y, int r_max, RngHandle& rng) {
  const auto n = Y.rows();
  const auto p = Y.cols();
  if (r_max < 1) throw ParameterError("estimate_dt: r_max must be positive");
  if (n < 2 || p < 2) throw InputError("estimate_dt: data too small");

  Matrix perturbed = Y;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) perturbed(i, j) += rng.normal();
  }
  const Vector diag = perturbed.colwise().squaredNorm().transpose() / static_cast<double>(n);
  const double screen = dt_diagonal_threshold(static_cast<int>(p), static_cast<int>(n));
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (diag(j) >= screen) kept.push_back(j);
  }

  RankEstimate est;
  est.method = RankMethod::DT;
  est.r_max = r_max;
  const int j_size = static_cast<int>(kept.size());
  const double threshold = dt_eigen_threshold(j_size, static_cast<int>(n), static_cast<int>(p));
  est.criterion = Vector::Constant(1, threshold);
  if (kept.empty()) {
    est.notes.push_back("no variable passed diagonal screening");
    return est;
  }
  Matrix sub(n, j_size);
  for (int c = 0; c < j_size; ++c) sub.col(c) = perturbed.col(kept[c]);
  est.eigenvalues_used = descending_eigenvalues(sample_covariance(sub));
  const int top = std::min(r_max, j_size);
  for (int j = 1; j <= top; ++j) {
    if (est.eigenvalues_used(j - 1) > threshold) est.r_hat = j;
  }
  return est;
}

}  // namespace adass
