#include <doctest.h>

#include <cmath>

#include "adass/errors.hpp"
#include "adass/sampler.hpp"
#include "adass/synth.hpp"

using namespace adass;

namespace {

Dataset small_data(int n = 60, int p = 30, int s = 8, int r = 2, std::uint64_t seed = 5) {
  RngHandle rng(seed);
  return sample_data(gen_signed_two(p, s, r, rng), n, rng);
}

ModelConfig cfg_for(const Matrix& Y) {
  ModelConfig c;
  c.n = static_cast<int>(Y.rows());
  c.p = static_cast<int>(Y.cols());
  return c.resolved();
}

}  // namespace

TEST_CASE("chain settings: retained count and validation") {
  ChainSettings s;
  CHECK(s.retained() == 500);
  s.burn_in = s.n_iter;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = ChainSettings{};
  s.thin = 0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

TEST_CASE("run_chain keeps every thinned post-burn-in sweep") {
  const Dataset d = small_data();
  ChainSettings s;
  s.n_iter = 300;
  s.burn_in = 100;
  s.thin = 4;
  const ChainTrace t = run_chain(d.Y, ModelConfig{}, s);
  REQUIRE(t.retained() == 50);
  CHECK(t.iteration.front() == 104);
  CHECK(t.iteration.back() == 300);
  CHECK(t.support_size.size() == 50);
  CHECK(t.psi.size() == 50);
  CHECK(t.sigma_mean.rows() == 30);
  CHECK(t.loadings.empty());
}

TEST_CASE("state invariants hold after every sweep and the residual stays in sync") {
  const Dataset d = small_data();
  const ModelConfig c = cfg_for(d.Y);
  RngHandle rng(3);
  GibbsSampler g(d.Y, c, GibbsSampler::initial_state(d.Y, c, rng));
  for (int it = 0; it < 50; ++it) {
    g.sweep(rng);
    const FactorState& s = g.state();
    REQUIRE(s.consistent());
    REQUIRE(s.xi() <= c.q);
    const Matrix r = d.Y - s.Z * s.B.transpose();
    REQUIRE((r - g.residual()).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.covariance());
    REQUIRE(eig.eigenvalues().minCoeff() >= s.psi(0) * (1 - 1e-9));
  }
}

TEST_CASE("tau for an inactive row is Exp(1/2)") {
  const Dataset d = small_data();
  const ModelConfig c = cfg_for(d.Y);
  RngHandle rng(4);
  FactorState st = GibbsSampler::initial_state(d.Y, c, rng);
  st.u[0] = 0;
  st.B.row(0).setZero();
  GibbsSampler g(d.Y, c, st);
  const int n = 100000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    g.update_tau(rng);
    sum += g.state().tau(0, 0);
  }
  CHECK(std::abs(sum / n - 2.0) < 3 * 2.0 / std::sqrt(double(n)));
}

TEST_CASE("Z conditional with B = 0 is the N(0, I) prior") {
  Matrix Y = Matrix::Ones(4, 3);
  ModelConfig c;
  c.n = 4;
  c.p = 3;
  c.q = 2;
  FactorState st;
  st.B = Matrix::Zero(3, 2);
  st.u = {1, 1, 1};
  st.v = {1, 1};
  st.tau = Matrix::Ones(3, 2);
  st.Z = Matrix::Zero(4, 2);
  st.psi = Vector::Ones(1);
  st.sigma_z = Matrix::Identity(2, 2);
  GibbsSampler g(Y, c, st);
  RngHandle rng(8);
  const int n = 50000;
  double s = 0, ss = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    g.update_Z(rng);
    const double a = g.state().Z(1, 0), b = g.state().Z(1, 1);
    s += a;
    ss += a * a;
    cross += a * b;
  }
  CHECK(std::abs(s / n) < 3 / std::sqrt(double(n)));
  CHECK(std::abs(ss / n - 1) < 3 * std::sqrt(2.0 / n));
  CHECK(std::abs(cross / n) < 3 / std::sqrt(double(n)));
}

TEST_CASE("heterogeneous noise and inverse-Wishart factor covariance run") {
  const Dataset d = small_data(50, 20, 6, 2, 9);
  ModelConfig c = cfg_for(d.Y);
  c.noise_mode = NoiseMode::heterogeneous;
  c.factor_cov = InverseWishartPrior{Matrix::Identity(c.q, c.q), c.q + 2.0};
  ChainSettings s;
  s.n_iter = 200;
  s.burn_in = 50;
  s.thin = 5;
  const ChainTrace t = run_chain(d.Y, c, s);
  CHECK(t.psi_mean.size() == 20);
  CHECK((t.psi_mean.array() > 0).all());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(t.sigma_mean);
  CHECK(eig.eigenvalues().minCoeff() > 0);
}

TEST_CASE("update_sigma_z without an inverse-Wishart prior is a state error") {
  const Dataset d = small_data();
  const ModelConfig c = cfg_for(d.Y);
  RngHandle rng(1);
  GibbsSampler g(d.Y, c, GibbsSampler::initial_state(d.Y, c, rng));
  CHECK_THROWS_AS(g.update_sigma_z(rng), StateError);
}

TEST_CASE("forced indicators: the last active row or column has infinite odds") {
  const Dataset d = small_data();
  const ModelConfig c = cfg_for(d.Y);
  RngHandle rng(2);
  FactorState st = GibbsSampler::initial_state(d.Y, c, rng);
  std::fill(st.u.begin(), st.u.end(), 0);
  st.u[3] = 1;
  std::fill(st.v.begin(), st.v.end(), 0);
  st.v[0] = 1;
  for (Eigen::Index j = 0; j < st.B.rows(); ++j)
    for (Eigen::Index k = 0; k < st.B.cols(); ++k)
      if (!(st.u[j] && st.v[k])) st.B(j, k) = 0;
  GibbsSampler g(d.Y, c, st);
  CHECK(std::isinf(g.log_rho_row(3)));
  CHECK(std::isinf(g.log_rho_col(0)));
  CHECK(std::isfinite(g.log_rho_row(4)));
  g.update_u(rng);
  g.update_v(rng);
  CHECK(g.state().support_size() >= 1);
  CHECK(g.state().active_columns() >= 1);
}

TEST_CASE("a column budget below r caps xi") {
  const Dataset d = small_data(60, 30, 10, 4, 12);
  ModelConfig c;
  c.q = 2;
  ChainSettings s;
  s.n_iter = 200;
  s.burn_in = 50;
  s.thin = 5;
  const ChainTrace t = run_chain(d.Y, c, s);
  for (int x : t.xi) CHECK(x <= 2);
}

TEST_CASE("inconsistent states are rejected") {
  const Dataset d = small_data();
  const ModelConfig c = cfg_for(d.Y);
  RngHandle rng(1);
  FactorState st = GibbsSampler::initial_state(d.Y, c, rng);
  st.u[0] = 0;  // row 0 still carries loadings
  CHECK_THROWS_AS(GibbsSampler(d.Y, c, st), StateError);
  Matrix wrong = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(GibbsSampler(wrong, c, GibbsSampler::initial_state(d.Y, c, rng)), InputError);
}

TEST_CASE("same settings reproduce the trace") {
  const Dataset d = small_data();
  ChainSettings s;
  s.n_iter = 100;
  s.burn_in = 20;
  s.thin = 2;
  const ChainTrace a = run_chain(d.Y, ModelConfig{}, s);
  const ChainTrace b = run_chain(d.Y, ModelConfig{}, s);
  CHECK(a.xi == b.xi);
  CHECK(a.psi == b.psi);
  CHECK(a.sigma_mean == b.sigma_mean);
}
