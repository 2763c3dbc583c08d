#include "adass/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "adass/assignment.hpp"
#include "adass/errors.hpp"

namespace adass {

int mode_smallest(const std::vector<int>& values) {
  if (values.empty()) throw InputError("mode of an empty series");
  std::map<int, int> counts;
  for (int v : values) ++counts[v];
  int best = counts.begin()->first;
  int best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

PosteriorSummary summarize(const ChainTrace& trace) {
  PosteriorSummary out;
  out.xi_mode = mode_smallest(trace.xi);
  for (int x : trace.xi) ++out.xi_histogram[x];
  for (int s : trace.support_size) ++out.support_histogram[s];
  out.sigma_mean = trace.sigma_mean;
  out.psi_mean = trace.psi_mean;
  return out;
}

Vector acf(const std::vector<double>& series, int max_lag) {
  const auto n = static_cast<int>(series.size());
  if (n < 2) throw InputError("acf: need at least two observations");
  if (max_lag < 0 || max_lag >= n) throw ParameterError("acf: max_lag must be in [0, n-1]");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  if (!(c0 > 0.0)) throw NumericalError("acf: series has zero variance; autocorrelation undefined");

  Vector out(max_lag + 1);
  out(0) = 1.0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (int t = 0; t + lag < n; ++t) c += (series[t] - mean) * (series[t + lag] - mean);
    out(lag) = c / c0;
  }
  return out;
}

Vector pacf(const std::vector<double>& series, int max_lag) {
  const Vector rho = acf(series, max_lag);
  Vector out = Vector::Zero(max_lag + 1);
  out(0) = 1.0;
  if (max_lag == 0) return out;
  Vector phi = Vector::Zero(max_lag + 1);
  Vector prev = Vector::Zero(max_lag + 1);
  phi(1) = rho(1);
  out(1) = rho(1);
  for (int k = 2; k <= max_lag; ++k) {
    prev = phi;
    double num = rho(k);
    double den = 1.0;
    for (int j = 1; j < k; ++j) {
      num -= prev(j) * rho(k - j);
      den -= prev(j) * rho(j);
    }
    phi(k) = num / den;
    for (int j = 1; j < k; ++j) phi(j) = prev(j) - phi(k) * prev(k - j);
    out(k) = phi(k);
  }
  return out;
}

double spectral_norm_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("spectral_norm_symmetric: matrix must be square");
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("spectral norm: eigendecomposition failed");
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double scaled_spectral_loss(const Matrix& sigma_hat, const Matrix& sigma_star) {
  if (sigma_hat.rows() != sigma_star.rows() || sigma_hat.cols() != sigma_star.cols()) {
    throw InputError("scaled_spectral_loss: shape mismatch");
  }
  const double scale = spectral_norm_symmetric(sigma_star);
  if (!(scale > 0.0)) throw NumericalError("scaled_spectral_loss: reference matrix is zero");
  return spectral_norm_symmetric(sigma_hat - sigma_star) / scale;
}

namespace {

struct SignedPermutation {
  std::vector<int> source;   // source[l] = snapshot column placed into slot l
  std::vector<int> sign;
  bool operator==(const SignedPermutation&) const = default;
};

SignedPermutation match_to(const Matrix& snap, const Matrix& ref, const std::vector<int>& slots) {
  const int m = static_cast<int>(slots.size());
  Matrix cost(m, m);
  Matrix flip(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const auto col = snap.col(slots[a]);
      const auto target = ref.col(slots[b]);
      const double same = (col - target).squaredNorm();
      const double opposite = (col + target).squaredNorm();
      cost(a, b) = std::min(same, opposite);
      flip(a, b) = opposite < same ? 1.0 : 0.0;
    }
  }
  const std::vector<int> assign = solve_assignment(cost);
  SignedPermutation perm;
  perm.source.assign(m, 0);
  perm.sign.assign(m, 1);
  for (int a = 0; a < m; ++a) {
    perm.source[assign[a]] = slots[a];
    perm.sign[assign[a]] = flip(a, assign[a]) > 0.0 ? -1 : 1;
  }
  return perm;
}

Matrix apply(const Matrix& snap, const SignedPermutation& perm, const std::vector<int>& slots) {
  Matrix out = snap;
  for (std::size_t l = 0; l < slots.size(); ++l) out.col(slots[l]) = perm.sign[l] * snap.col(perm.source[l]);
  return out;
}

}  // namespace

AlignmentResult align_loadings(const std::vector<Matrix>& snapshots, std::uint64_t seed) {
  AlignmentResult result;
  if (snapshots.empty()) throw InputError("align_loadings: no snapshots");
  const auto p = snapshots.front().rows();
  const auto q = snapshots.front().cols();
  for (const Matrix& s : snapshots) {
    if (s.rows() != p || s.cols() != q) throw InputError("align_loadings: snapshots differ in shape");
  }
  const std::size_t count = snapshots.size();
  result.aligned = snapshots;

  std::vector<int> active(static_cast<std::size_t>(q), 0);
  for (const Matrix& s : snapshots) {
    for (Eigen::Index k = 0; k < q; ++k) {
      if ((s.col(k).array() != 0.0).any()) ++active[k];
    }
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    if (10 * active[k] >= static_cast<int>(count)) result.active_slots.push_back(static_cast<int>(k));
  }

  auto mean_of = [&](const std::vector<Matrix>& ms) {
    Matrix acc = Matrix::Zero(p, q);
    for (const Matrix& m : ms) acc += m;
    return Matrix(acc / static_cast<double>(ms.size()));
  };

  if (count == 1 || result.active_slots.size() < 2) {
    result.consensus = mean_of(result.aligned);
    result.converged = true;
    return result;
  }

  // Pivot: the subsample member closest in total Frobenius distance to the rest.
  RngHandle rng(seed, 0);
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t sub = std::min<std::size_t>(count, 50);
  for (std::size_t i = 0; i < sub; ++i) {
    const std::size_t pick = i + std::min(static_cast<std::size_t>(rng.uniform() * (count - i)), count - i - 1);
    std::swap(order[i], order[pick]);
  }
  std::size_t pivot = order[0];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sub; ++a) {
    double total = 0.0;
    for (std::size_t b = 0; b < sub; ++b) total += (snapshots[order[a]] - snapshots[order[b]]).norm();
    if (total < best) {
      best = total;
      pivot = order[a];
    }
  }

  Matrix reference = snapshots[pivot];
  std::vector<SignedPermutation> current(count);
  constexpr int kMaxRounds = 20;
  for (int round = 1; round <= kMaxRounds; ++round) {
    bool changed = false;
    for (std::size_t t = 0; t < count; ++t) {
      SignedPermutation perm = match_to(snapshots[t], reference, result.active_slots);
      if (round == 1 || !(perm == current[t])) changed = true;
      current[t] = std::move(perm);
      result.aligned[t] = apply(snapshots[t], current[t], result.active_slots);
    }
    reference = mean_of(result.aligned);
    result.rounds = round;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  result.consensus = reference;
  return result;
}

EstimateClass classify_estimate(int r_hat, int r_true) {
  if (r_hat == r_true) return EstimateClass::True;
  return r_hat > r_true ? EstimateClass::Over : EstimateClass::Under;
}

std::string class_name(EstimateClass c) {
  switch (c) {
    case EstimateClass::True: return "True";
    case EstimateClass::Over: return "Over";
    case EstimateClass::Under: return "Under";
  }
  return "?";
}

std::string summary_json(const PosteriorSummary& summary) {
  nlohmann::ordered_json j;
  j["xi_mode"] = summary.xi_mode;
  nlohmann::ordered_json xi = nlohmann::ordered_json::object();
  for (const auto& [k, c] : summary.xi_histogram) xi[std::to_string(k)] = c;
  j["xi_histogram"] = xi;
  nlohmann::ordered_json supp = nlohmann::ordered_json::object();
  for (const auto& [k, c] : summary.support_histogram) supp[std::to_string(k)] = c;
  j["support_histogram"] = supp;
  std::vector<double> psi(summary.psi_mean.data(), summary.psi_mean.data() + summary.psi_mean.size());
  if (psi.size() == 1) {
    j["psi_mean"] = psi.front();
  } else {
    j["psi_mean"] = psi;
  }
  j["p"] = summary.sigma_mean.rows();
  return j.dump(1);
}

}  // namespace adass
