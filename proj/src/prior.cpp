#include "adass/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adass/errors.hpp"

namespace adass {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double ModelConfig::log_pn() const { return std::log(static_cast<double>(std::max(p, n))); }

int default_q(int n) {
  if (n < 1) throw ParameterError("default_q: n must be positive");
  int q = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  // Guard against sqrt rounding for perfect squares.
  while (static_cast<long long>(q - 1) * (q - 1) >= n) --q;
  while (static_cast<long long>(q) * q < n) ++q;
  return q;
}

ModelConfig ModelConfig::resolved(bool* clamped) const {
  ModelConfig out = *this;
  if (clamped) *clamped = false;
  if (out.q == 0) {
    out.q = default_q(n);
    if (out.q > p - 1) {
      out.q = std::max(1, p - 1);
      if (clamped) *clamped = true;
    }
  }
  return out;
}

void ModelConfig::validate() const {
  if (p < 2) throw ParameterError("ModelConfig: p must be at least 2");
  if (n < 2) throw ParameterError("ModelConfig: n must be at least 2");
  if (q < 1 || q > p - 1) {
    throw ParameterError("ModelConfig: q must satisfy 1 <= q <= p - 1 (got " + std::to_string(q) + ")");
  }
  if (!(A > 0.0)) throw ParameterError("ModelConfig: A must be positive");
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw ParameterError("ModelConfig: IG hyperparameters must be positive");
  if (a1_per_variable.size() != 0 || a2_per_variable.size() != 0) {
    if (a1_per_variable.size() != p || a2_per_variable.size() != p) {
      throw ParameterError("ModelConfig: per-variable IG hyperparameters must have length p");
    }
    if (!(a1_per_variable.array() > 0.0).all() || !(a2_per_variable.array() > 0.0).all()) {
      throw ParameterError("ModelConfig: per-variable IG hyperparameters must be positive");
    }
  }
  if (factor_cov) {
    if (factor_cov->scale.rows() != q || factor_cov->scale.cols() != q) {
      throw ParameterError("ModelConfig: inverse-Wishart scale must be q x q");
    }
    Eigen::LLT<Matrix> llt(factor_cov->scale);
    if (llt.info() != Eigen::Success) throw ParameterError("ModelConfig: inverse-Wishart scale must be SPD");
    if (!(factor_cov->dof > q - 1.0)) throw ParameterError("ModelConfig: inverse-Wishart dof must exceed q - 1");
  }
}

double ModelConfig::noise_shape(int j) const {
  return a1_per_variable.size() == p ? a1_per_variable(j) : a1;
}

double ModelConfig::noise_rate(int j) const {
  return a2_per_variable.size() == p ? a2_per_variable(j) : a2;
}

double log_Q(int omega, int xi, const ModelConfig& cfg) {
  if (omega < 1 || omega > cfg.p) throw ParameterError("log_Q: omega out of [1, p]");
  if (xi < 1 || xi > cfg.q) throw ParameterError("log_Q: xi out of [1, q]");
  return -log_binomial(cfg.p, omega) - log_binomial(cfg.q, xi) -
         cfg.A * static_cast<double>(omega) * static_cast<double>(xi) * cfg.log_pn();
}

double log_prior_ratio_row(int s_minus, int k_active, const ModelConfig& cfg) {
  if (s_minus < 0 || s_minus > cfg.p - 1) throw ParameterError("log_prior_ratio_row: s_minus out of [0, p-1]");
  if (k_active < 1 || k_active > cfg.q) throw ParameterError("log_prior_ratio_row: k_active out of [1, q]");
  // C(p, s) / C(p, s + 1) = (s + 1) / (p - s)
  return -cfg.A * k_active * cfg.log_pn() + std::log(s_minus + 1.0) - std::log(static_cast<double>(cfg.p - s_minus));
}

double log_prior_ratio_col(int k_minus, int s_active, const ModelConfig& cfg) {
  if (k_minus < 0 || k_minus > cfg.q - 1) throw ParameterError("log_prior_ratio_col: k_minus out of [0, q-1]");
  if (s_active < 1 || s_active > cfg.p) throw ParameterError("log_prior_ratio_col: s_active out of [1, p]");
  return -cfg.A * s_active * cfg.log_pn() + std::log(k_minus + 1.0) - std::log(static_cast<double>(cfg.q - k_minus));
}

double log_prior_loading(const Matrix& B, const std::vector<std::uint8_t>& u,
                         const std::vector<std::uint8_t>& v) {
  if (static_cast<Eigen::Index>(u.size()) != B.rows() || static_cast<Eigen::Index>(v.size()) != B.cols()) {
    throw ParameterError("log_prior_loading: indicator lengths do not match B");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
      const bool slab = u[j] && v[k];
      if (!slab) {
        if (B(j, k) != 0.0) return -std::numeric_limits<double>::infinity();
        continue;
      }
      total += -std::log(2.0) - std::abs(B(j, k));
    }
  }
  return total;
}

}  // namespace adass
