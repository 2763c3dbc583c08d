#include <doctest.h>

#include <cmath>
#include <limits>

#include "adass/errors.hpp"
#include "adass/prior.hpp"
#include "oracles.hpp"

using namespace adass;

namespace {

ModelConfig small_cfg() {
  ModelConfig c;
  c.p = 8;
  c.n = 5;
  c.q = 4;
  return c;
}

}  // namespace

TEST_CASE("log_Q matches the binomial form on every (omega, xi)") {
  const ModelConfig c = small_cfg();
  for (int w = 1; w <= c.p; ++w)
    for (int x = 1; x <= c.q; ++x) {
      const double ref = -oracle::log_choose(8, w) - oracle::log_choose(4, x) - 0.1 * w * x * std::log(8.0);
      CHECK(log_Q(w, x, c) == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("row and column prior ratios are differences of log_Q") {
  const ModelConfig c = small_cfg();
  for (int s = 1; s < c.p; ++s)
    for (int k = 1; k <= c.q; ++k)
      CHECK(log_prior_ratio_row(s, k, c) == doctest::Approx(log_Q(s + 1, k, c) - log_Q(s, k, c)).epsilon(1e-12));
  for (int k = 1; k < c.q; ++k)
    for (int s = 1; s <= c.p; ++s)
      CHECK(log_prior_ratio_col(k, s, c) == doctest::Approx(log_Q(s, k + 1, c) - log_Q(s, k, c)).epsilon(1e-12));
}

TEST_CASE("worked values at p=10, q=5, n=10") {
  ModelConfig c;
  c.p = 10;
  c.n = 10;
  c.q = 5;
  CHECK(std::abs(log_Q(1, 1, c) - (-std::log(10.0) - std::log(5.0) - 0.1 * std::log(10.0))) < 1e-12);
  CHECK(std::abs(log_Q(1, 1, c) + 4.142282) < 1e-6);
  CHECK(log_Q(10, 5, c) == doctest::Approx(-0.1 * 50 * std::log(10.0)).epsilon(1e-14));
  CHECK(std::abs(log_prior_ratio_row(0, 1, c) + 2.532844) < 1e-6);
  CHECK(std::abs(log_prior_ratio_col(0, 2, c) - (std::log(0.2) - 0.2 * std::log(10.0))) < 1e-12);
  CHECK(std::abs(log_prior_ratio_col(0, 2, c) + 2.069957) < 5e-6);
  CHECK(std::isfinite(log_prior_ratio_row(9, 5, c)));
  CHECK_THROWS_AS(log_Q(0, 1, c), ParameterError);
  CHECK_THROWS_AS(log_Q(1, 6, c), ParameterError);
}

TEST_CASE("no overflow at p = n = 1e6") {
  ModelConfig c;
  c.p = 1000000;
  c.n = 1000000;
  c.q = 1000;
  CHECK(std::isfinite(log_Q(500000, 500, c)));
  CHECK(std::isfinite(log_prior_ratio_row(499999, 500, c)));
}

TEST_CASE("larger A penalizes joint size more") {
  ModelConfig lo = small_cfg(), hi = small_cfg();
  hi.A = 1.0;
  CHECK(log_Q(3, 2, hi) < log_Q(3, 2, lo));
}

TEST_CASE("default q and clamping") {
  CHECK(default_q(100) == 10);
  CHECK(default_q(101) == 11);
  CHECK(default_q(1) == 1);
  ModelConfig c;
  c.p = 5;
  c.n = 100;
  bool clamped = false;
  CHECK(c.resolved(&clamped).q == 4);
  CHECK(clamped);
  c.p = 200;
  CHECK(c.resolved(&clamped).q == 10);
  CHECK_FALSE(clamped);
}

TEST_CASE("validation rejects bad hyperparameters") {
  ModelConfig c = small_cfg();
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.q = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.q = c.p;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.A = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.a1 = -1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.noise_mode = NoiseMode::heterogeneous;
  bad.a1_per_variable = Vector::Ones(3);
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.factor_cov = InverseWishartPrior{Matrix::Identity(4, 4), 2.0};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad.factor_cov->dof = 5.0;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("per-variable noise hyperparameters") {
  ModelConfig c = small_cfg();
  c.noise_mode = NoiseMode::heterogeneous;
  CHECK(c.noise_shape(3) == c.a1);
  c.a1_per_variable = Vector::LinSpaced(8, 1.0, 8.0);
  c.a2_per_variable = Vector::Constant(8, 0.5);
  CHECK(c.noise_shape(3) == 4.0);
  CHECK(c.noise_rate(3) == 0.5);
}

TEST_CASE("loading prior: spike violations and the Laplace slab") {
  Matrix B = Matrix::Zero(3, 2);
  B(0, 0) = 1.5;
  B(2, 0) = -0.5;
  std::vector<std::uint8_t> u{1, 0, 1}, v{1, 0};
  // Slab entries (0,0) and (2,0).
  const double ref = 2 * std::log(0.5) - 1.5 - 0.5;
  CHECK(log_prior_loading(B, u, v) == doctest::Approx(ref));
  B(1, 1) = 0.1;
  CHECK(log_prior_loading(B, u, v) == -std::numeric_limits<double>::infinity());
}
