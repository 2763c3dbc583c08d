#include "adass/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adass/errors.hpp"

namespace adass {

int FactorState::support_size() const {
  return static_cast<int>(std::count(u.begin(), u.end(), std::uint8_t{1}));
}

int FactorState::active_columns() const {
  return static_cast<int>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

int FactorState::xi() const {
  int count = 0;
  for (Eigen::Index k = 0; k < B.cols(); ++k) {
    if ((B.col(k).array() != 0.0).any()) ++count;
  }
  return count;
}

int FactorState::nonzero_rows() const {
  int count = 0;
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    if ((B.row(j).array() != 0.0).any()) ++count;
  }
  return count;
}

Matrix FactorState::covariance() const {
  Matrix sigma = B * B.transpose();
  for (Eigen::Index j = 0; j < sigma.rows(); ++j) sigma(j, j) += noise(static_cast<int>(j));
  return sigma;
}

bool FactorState::consistent() const {
  const auto p = B.rows();
  const auto q = B.cols();
  if (static_cast<Eigen::Index>(u.size()) != p || static_cast<Eigen::Index>(v.size()) != q) return false;
  if (tau.rows() != p || tau.cols() != q || Z.cols() != q) return false;
  if (support_size() < 1 || active_columns() < 1) return false;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k < q; ++k) {
      if (!(u[j] && v[k]) && B(j, k) != 0.0) return false;
    }
  }
  if (!(tau.array() > 0.0).all() || !(psi.array() > 0.0).all()) return false;
  if (psi.size() != 1 && psi.size() != p) return false;
  if (sigma_z.rows() != q || sigma_z.cols() != q) return false;
  return true;
}

void ChainSettings::validate() const {
  if (n_iter < 1) throw ParameterError("ChainSettings: n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter) throw ParameterError("ChainSettings: require 0 <= burn_in < n_iter");
  if (thin < 1) throw ParameterError("ChainSettings: thin must be at least 1");
}

GibbsSampler::GibbsSampler(const Matrix& data, ModelConfig cfg, FactorState state)
    : data_(data), cfg_(std::move(cfg)), state_(std::move(state)) {
  check_state();
  refresh_caches();
}

void GibbsSampler::set_state(FactorState state) {
  state_ = std::move(state);
  check_state();
  refresh_caches();
}

void GibbsSampler::check_state() const {
  if (data_.rows() != state_.Z.rows() || data_.cols() != state_.B.rows()) {
    throw InputError("GibbsSampler: data is " + std::to_string(data_.rows()) + "x" +
                     std::to_string(data_.cols()) + " but state expects " +
                     std::to_string(state_.Z.rows()) + "x" + std::to_string(state_.B.rows()));
  }
  if (state_.B.cols() != cfg_.q) throw InputError("GibbsSampler: state has wrong number of columns");
  const bool hetero = cfg_.noise_mode == NoiseMode::heterogeneous;
  if (state_.psi.size() != (hetero ? state_.B.rows() : 1)) {
    throw InputError("GibbsSampler: psi length does not match the noise mode");
  }
  if (!state_.consistent()) throw StateError("GibbsSampler: state violates the model invariants");
}

void GibbsSampler::refresh_caches() {
  z_sq_norm_ = state_.Z.colwise().squaredNorm().transpose();
  recompute_residual();
}

void GibbsSampler::recompute_residual() {
  residual_ = data_;
  residual_.noalias() -= state_.Z * state_.B.transpose();
}

void GibbsSampler::update_beta_row(int j, RngHandle& rng) {
  auto& B = state_.B;
  const double inv_psi = 1.0 / state_.noise(j);
  auto rj = residual_.col(j);
  for (int k = 0; k < cfg_.q; ++k) {
    if (!state_.v[k]) continue;
    const auto zk = state_.Z.col(k);
    const double old = B(j, k);
    // Z_k^T (Y_j - sum_{h != k} Z_h beta_jh)
    const double partial = zk.dot(rj) + z_sq_norm_(k) * old;
    const double tau_hat = 1.0 / (inv_psi * z_sq_norm_(k) + 1.0 / state_.tau(j, k));
    if (!(tau_hat > 0.0)) throw NumericalError("update_beta: nonpositive conditional variance");
    const double beta_hat = tau_hat * inv_psi * partial;
    const double draw = beta_hat + std::sqrt(tau_hat) * rng.normal();
    B(j, k) = draw;
    rj.noalias() -= (draw - old) * zk;
  }
}

void GibbsSampler::update_beta(RngHandle& rng) {
  for (int j = 0; j < static_cast<int>(state_.u.size()); ++j) {
    if (state_.u[j]) update_beta_row(j, rng);
  }
}

void GibbsSampler::update_tau(RngHandle& rng) {
  for (Eigen::Index k = 0; k < state_.tau.cols(); ++k) {
    for (Eigen::Index j = 0; j < state_.tau.rows(); ++j) {
      const double beta = state_.B(j, k);
      state_.tau(j, k) = state_.u[j] ? sample_gig(1.0, beta * beta, 0.5, rng) : sample_exponential(0.5, rng);
    }
  }
}

double GibbsSampler::log_rho_row(int j) const {
  const int s_minus = state_.support_size() - state_.u[j];
  if (s_minus == 0) return std::numeric_limits<double>::infinity();
  const double inv_psi = 1.0 / state_.noise(j);
  double log_rho = log_prior_ratio_row(s_minus, state_.active_columns(), cfg_);
  for (int k = 0; k < cfg_.q; ++k) {
    if (!state_.v[k]) continue;
    // Row j integrated out: the data column enters unadjusted.
    const double tau = state_.tau(j, k);
    const double tau_hat = 1.0 / (inv_psi * z_sq_norm_(k) + 1.0 / tau);
    const double beta_hat = tau_hat * inv_psi * state_.Z.col(k).dot(data_.col(j));
    log_rho += 0.5 * (std::log(tau_hat) - std::log(tau) + beta_hat * beta_hat / tau_hat);
  }
  return log_rho;
}

void GibbsSampler::update_u(RngHandle& rng) {
  // Z^T Y for the whole sweep; Z is fixed during the indicator updates.
  const Matrix zty = state_.Z.transpose() * data_;
  const int k_active = state_.active_columns();
  int support = state_.support_size();

  for (int j = 0; j < static_cast<int>(state_.u.size()); ++j) {
    const int old = state_.u[j];
    const int s_minus = support - old;
    int now = 1;
    if (s_minus > 0) {
      const double inv_psi = 1.0 / state_.noise(j);
      double log_rho = log_prior_ratio_row(s_minus, k_active, cfg_);
      for (int k = 0; k < cfg_.q; ++k) {
        if (!state_.v[k]) continue;
        const double tau = state_.tau(j, k);
        const double tau_hat = 1.0 / (inv_psi * z_sq_norm_(k) + 1.0 / tau);
        const double beta_hat = tau_hat * inv_psi * zty(k, j);
        log_rho += 0.5 * (std::log(tau_hat) - std::log(tau) + beta_hat * beta_hat / tau_hat);
      }
      now = sample_bernoulli_logit(log_rho, rng);
    }
    state_.u[j] = static_cast<std::uint8_t>(now);
    support += now - old;
    if (now == 0) {
      if (old == 1) {
        state_.B.row(j).setZero();
        residual_.col(j) = data_.col(j);
      }
    } else {
      update_beta_row(j, rng);
    }
  }
}

double GibbsSampler::log_rho_col(int k) const {
  const int k_minus = state_.active_columns() - state_.v[k];
  if (k_minus == 0) return std::numeric_limits<double>::infinity();
  const auto zk = state_.Z.col(k);
  double log_rho = log_prior_ratio_col(k_minus, state_.support_size(), cfg_);
  for (Eigen::Index j = 0; j < state_.B.rows(); ++j) {
    if (!state_.u[j]) continue;
    const double inv_psi = 1.0 / state_.noise(static_cast<int>(j));
    const double tau = state_.tau(j, k);
    const double partial = zk.dot(residual_.col(j)) + z_sq_norm_(k) * state_.B(j, k);
    const double tau_hat = 1.0 / (inv_psi * z_sq_norm_(k) + 1.0 / tau);
    const double beta_hat = tau_hat * inv_psi * partial;
    log_rho += 0.5 * (std::log(tau_hat) - std::log(tau) + beta_hat * beta_hat / tau_hat);
  }
  return log_rho;
}

void GibbsSampler::update_v(RngHandle& rng) {
  const auto p = state_.B.rows();
  const int s_active = state_.support_size();
  int k_active = state_.active_columns();
  Vector beta_hat(p), tau_hat(p);

  for (int k = 0; k < cfg_.q; ++k) {
    const int old = state_.v[k];
    const int k_minus = k_active - old;
    const auto zk = state_.Z.col(k);

    // Conditional moments of column k with the other columns held fixed.
    const Vector partial = residual_.transpose() * zk + z_sq_norm_(k) * state_.B.col(k);
    double log_rho = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!state_.u[j]) continue;
      const double inv_psi = 1.0 / state_.noise(static_cast<int>(j));
      const double tau = state_.tau(j, k);
      tau_hat(j) = 1.0 / (inv_psi * z_sq_norm_(k) + 1.0 / tau);
      beta_hat(j) = tau_hat(j) * inv_psi * partial(j);
      log_rho += 0.5 * (std::log(tau_hat(j)) - std::log(tau) + beta_hat(j) * beta_hat(j) / tau_hat(j));
    }
    int now = 1;
    if (k_minus > 0) {
      log_rho += log_prior_ratio_col(k_minus, s_active, cfg_);
      now = sample_bernoulli_logit(log_rho, rng);
    }
    state_.v[k] = static_cast<std::uint8_t>(now);
    k_active += now - old;

    Vector delta = -state_.B.col(k);
    if (now == 0) {
      state_.B.col(k).setZero();
    } else {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!state_.u[j]) continue;
        state_.B(j, k) = beta_hat(j) + std::sqrt(tau_hat(j)) * rng.normal();
      }
      delta += state_.B.col(k);
    }
    residual_.noalias() -= zk * delta.transpose();
  }
}

void GibbsSampler::update_Z(RngHandle& rng) {
  const auto n = data_.rows();
  const auto p = state_.B.rows();
  const int q = cfg_.q;

  Matrix scaled_b = state_.B;  // Psi^{-1} B
  for (Eigen::Index j = 0; j < p; ++j) scaled_b.row(j) /= state_.noise(static_cast<int>(j));

  Matrix precision(q, q);
  if (cfg_.factor_cov) {
    Eigen::LLT<Matrix> sz(state_.sigma_z);
    if (sz.info() != Eigen::Success) throw NumericalError("update_Z: factor covariance is not SPD");
    precision = sz.solve(Matrix::Identity(q, q));
  } else {
    precision.setIdentity();
  }
  precision.noalias() += state_.B.transpose() * scaled_b;

  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("update_Z: Cholesky of the posterior precision failed");

  // Rows of Z: mean P^{-1} B^T Psi^{-1} Y_i, covariance P^{-1}.
  Matrix mean_t = (data_ * scaled_b).transpose();  // q x n
  llt.solveInPlace(mean_t);
  Matrix noise(q, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < q; ++k) noise(k, i) = rng.normal();
  }
  llt.matrixU().solveInPlace(noise);  // L^{-T} eps
  state_.Z = (mean_t + noise).transpose();
  refresh_caches();
}

void GibbsSampler::update_psi(RngHandle& rng) {
  const double n = static_cast<double>(data_.rows());
  if (cfg_.noise_mode == NoiseMode::homogeneous) {
    const double p = static_cast<double>(data_.cols());
    const double shape = cfg_.a1 + n * p / 2.0;
    const double rate = cfg_.a2 + 0.5 * residual_.squaredNorm();
    state_.psi(0) = sample_inverse_gamma(shape, rate, rng);
    return;
  }
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    const int jj = static_cast<int>(j);
    const double shape = cfg_.noise_shape(jj) + n / 2.0;
    const double rate = cfg_.noise_rate(jj) + 0.5 * residual_.col(j).squaredNorm();
    state_.psi(j) = sample_inverse_gamma(shape, rate, rng);
  }
}

void GibbsSampler::update_sigma_z(RngHandle& rng) {
  if (!cfg_.factor_cov) throw StateError("update_sigma_z: model has no inverse-Wishart factor covariance");
  Matrix scale = cfg_.factor_cov->scale;
  scale.noalias() += state_.Z.transpose() * state_.Z;
  state_.sigma_z = sample_inverse_wishart(scale, cfg_.factor_cov->dof + static_cast<double>(data_.rows()), rng);
}

void GibbsSampler::sweep(RngHandle& rng) {
  update_beta(rng);
  update_tau(rng);
  update_u(rng);
  update_v(rng);
  update_Z(rng);
  update_psi(rng);
  if (cfg_.factor_cov) update_sigma_z(rng);
}

FactorState GibbsSampler::initial_state(const Matrix& data, const ModelConfig& cfg, RngHandle& rng) {
  const auto n = data.rows();
  const auto p = data.cols();
  const int q = cfg.q;

  // Leading eigenpairs of S = Y^T Y / n, through the smaller Gram matrix.
  Vector eigenvalues;
  Matrix eigenvectors;  // p x q
  double trace = data.squaredNorm() / static_cast<double>(n);
  if (n < p) {
    const Matrix gram = data * data.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("initial_state: eigendecomposition failed");
    eigenvalues = eig.eigenvalues().reverse();
    const Matrix w = eig.eigenvectors().rowwise().reverse();
    eigenvectors = Matrix::Zero(p, q);
    for (int k = 0; k < q && k < n; ++k) {
      if (eigenvalues(k) <= 0.0) continue;
      eigenvectors.col(k) = data.transpose() * w.col(k) / std::sqrt(static_cast<double>(n) * eigenvalues(k));
    }
  } else {
    const Matrix cov = data.transpose() * data / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("initial_state: eigendecomposition failed");
    eigenvalues = eig.eigenvalues().reverse();
    eigenvectors = eig.eigenvectors().rowwise().reverse().leftCols(q);
  }
  double top = 0.0;
  for (int k = 0; k < q && k < eigenvalues.size(); ++k) top += std::max(eigenvalues(k), 0.0);
  const double psi0 = std::max((trace - top) / static_cast<double>(p - q), 1e-4);

  FactorState state;
  state.B = Matrix::Zero(p, q);
  for (int k = 0; k < q && k < eigenvalues.size(); ++k) {
    state.B.col(k) = eigenvectors.col(k) * std::sqrt(std::max(eigenvalues(k) - psi0, 0.0));
  }
  state.u.assign(static_cast<std::size_t>(p), 1);
  state.v.assign(static_cast<std::size_t>(q), 1);
  state.tau = Matrix::Ones(p, q);
  state.Z = Matrix::Zero(n, q);
  state.psi = cfg.noise_mode == NoiseMode::heterogeneous ? Vector::Constant(p, psi0) : Vector::Constant(1, psi0);
  state.sigma_z = Matrix::Identity(q, q);

  GibbsSampler sampler(data, cfg, std::move(state));
  sampler.update_Z(rng);
  return sampler.state();
}

ChainTrace run_chain(const Matrix& data, const ModelConfig& cfg_in, const ChainSettings& settings) {
  settings.validate();
  if (data.rows() < 2) throw InputError("run_chain: need at least 2 observations");
  if (data.cols() < 2) throw InputError("run_chain: need at least 2 variables");
  ModelConfig cfg = cfg_in;
  if (cfg.n == 0) cfg.n = static_cast<int>(data.rows());
  if (cfg.p == 0) cfg.p = static_cast<int>(data.cols());
  if (cfg.n != data.rows() || cfg.p != data.cols()) throw InputError("run_chain: config dimensions do not match data");
  cfg = cfg.resolved();
  cfg.validate();

  RngHandle rng(settings.seed, settings.stream_id);
  GibbsSampler sampler(data, cfg, GibbsSampler::initial_state(data, cfg, rng));

  const auto p = data.cols();
  ChainTrace trace;
  const int keep = settings.retained();
  trace.iteration.reserve(keep);
  trace.xi.reserve(keep);
  trace.support_size.reserve(keep);
  trace.psi.reserve(keep);
  Matrix low_rank_sum = Matrix::Zero(p, p);
  Vector psi_sum = Vector::Zero(sampler.state().psi.size());

  for (int it = 1; it <= settings.n_iter; ++it) {
    sampler.sweep(rng);
    if (it <= settings.burn_in || (it - settings.burn_in) % settings.thin != 0) continue;
    const FactorState& s = sampler.state();
    trace.iteration.push_back(it);
    trace.xi.push_back(s.xi());
    trace.support_size.push_back(s.nonzero_rows());
    trace.psi.push_back(s.psi.mean());
    psi_sum += s.psi;

    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < s.B.cols(); ++k) {
      if ((s.B.col(k).array() != 0.0).any()) live.push_back(k);
    }
    if (!live.empty()) {
      Matrix active(p, static_cast<Eigen::Index>(live.size()));
      for (std::size_t c = 0; c < live.size(); ++c) active.col(static_cast<Eigen::Index>(c)) = s.B.col(live[c]);
      low_rank_sum.selfadjointView<Eigen::Lower>().rankUpdate(active);
    }
    if (settings.snapshot_loadings) trace.loadings.push_back(s.B);
  }

  const double count = static_cast<double>(trace.retained());
  trace.psi_mean = psi_sum / count;
  trace.sigma_mean = low_rank_sum.selfadjointView<Eigen::Lower>();
  trace.sigma_mean /= count;
  for (Eigen::Index j = 0; j < p; ++j) {
    trace.sigma_mean(j, j) += trace.psi_mean.size() == 1 ? trace.psi_mean(0) : trace.psi_mean(j);
  }
  return trace;
}

}  // namespace adass
