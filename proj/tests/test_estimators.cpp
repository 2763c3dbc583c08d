#include <doctest.h>

#include <cmath>

#include "adass/errors.hpp"
#include "adass/estimators.hpp"
#include "adass/synth.hpp"

using namespace adass;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Matrix spiked_data(std::uint64_t seed) {
  RngHandle rng(seed);
  return sample_data(gen_uniform_band(60, 20, 3, rng), 200, rng).Y;
}

}  // namespace

TEST_CASE("ET weight and threshold examples") {
  CHECK(et_weight() == doctest::Approx(0.932441).epsilon(1e-6));
  Vector lam = Vector::Ones(8);
  lam(0) = 10;
  const auto e = estimate_et_spectrum(lam, 3);
  CHECK(e.r_hat == 1);
  CHECK(e.criterion(0) == doctest::Approx(1.0));
  CHECK(estimate_et_spectrum(Vector::Constant(8, 2.0), 3).r_hat == 0);
  CHECK_THROWS_AS(estimate_et_spectrum(Vector::Ones(6), 3), ParameterError);
}

TEST_CASE("ER ratios and tie-break") {
  const auto e = estimate_er_spectrum(vec({10, 2, 1, 0.9}), 3);
  CHECK(e.r_hat == 1);
  CHECK(e.criterion(2) == doctest::Approx(1 / 0.9));
  CHECK(estimate_er_spectrum(Vector::Constant(5, 7.0), 3).r_hat == 1);
  CHECK(estimate_er_spectrum(vec({1000, 1, 1, 1, 1}), 3).r_hat == 1);
}

TEST_CASE("ER skips zero eigenvalues") {
  const auto e = estimate_er_spectrum(vec({5, 4, 1, 0, 0}), 4);
  CHECK(e.r_hat == 2);
  CHECK(std::isnan(e.criterion(2)));
  CHECK_FALSE(e.notes.empty());
}

TEST_CASE("GR example and geometric spectrum") {
  const auto e = estimate_gr_spectrum(vec({8, 4, 1, 0.5, 0.25}), 3);
  CHECK(e.r_hat == 2);
  CHECK(e.criterion(1) == doctest::Approx(std::log(5.75 / 1.75) / std::log(1.75 / 0.75)));
  Vector geo(60);
  for (int j = 0; j < 60; ++j) geo(j) = std::ldexp(1.0, -j);
  const auto g = estimate_gr_spectrum(geo, 5);
  CHECK(g.r_hat == 1);
  // Equal up to the truncation of the finite geometric tail.
  CHECK(g.criterion.maxCoeff() - g.criterion.minCoeff() < 1e-6);
  CHECK_THROWS_AS(estimate_gr_spectrum(vec({1, 0, 0, 0}), 2), NumericalError);
}

TEST_CASE("ACT example, null spectrum and ties") {
  const auto e = estimate_act_spectrum(vec({2.5, 0.7, 0.5, 0.3}), 101, 3);
  CHECK(e.criterion(0) == doctest::Approx(2.351154).epsilon(1e-6));
  CHECK(e.r_hat >= 1);
  CHECK(act_threshold(1000, 100) == doctest::Approx(4.178209).epsilon(1e-6));
  CHECK(estimate_act_spectrum(vec({1.02, 1.01, 1.0, 0.99, 0.98}), 1000, 3).r_hat == 0);
  const auto tie = estimate_act_spectrum(vec({3, 1, 1, 0.5}), 50, 2);
  CHECK(std::isnan(tie.criterion(1)));
}

TEST_CASE("DT thresholds, null data and a strong spike") {
  CHECK(dt_diagonal_threshold(1000, 100) == doctest::Approx(2 + 6 * std::sqrt(std::log(1000.0) / 100)));
  CHECK(dt_eigen_threshold(10, 100, 1000) == doctest::Approx(14.9724).epsilon(1e-5));
  RngHandle rng(1);
  CHECK(estimate_dt(Matrix::Zero(2000, 20), 10, rng).r_hat == 0);

  RngHandle g(2);
  Matrix Y(200, 30);
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const double z = g.normal();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) Y(i, j) = g.normal() + (j < 5 ? 4.4 * z : 0.0);
  }
  RngHandle a(3), b(3);
  const auto e = estimate_dt(Y, 10, a);
  CHECK(e.r_hat >= 1);
  CHECK(estimate_dt(Y, 10, b).r_hat == e.r_hat);
}

TEST_CASE("sample covariance and correlation") {
  Matrix Y(1, 3);
  Y << 1, 2, 3;
  const Matrix S = sample_covariance(Y);
  CHECK(descending_eigenvalues(S)(1) == doctest::Approx(0.0).epsilon(1e-12));
  const Matrix R = sample_correlation(spiked_data(1));
  for (Eigen::Index j = 0; j < R.rows(); ++j) CHECK(R(j, j) == 1.0);
  Matrix C = spiked_data(2);
  const Matrix Sc = sample_covariance(C, true);
  C.rowwise() -= C.colwise().mean();
  CHECK((Sc - C.transpose() * C / C.rows()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("row order and scale leave the estimates unchanged") {
  const Matrix Y = spiked_data(4);
  Matrix rev = Y.colwise().reverse();
  const Matrix S = sample_covariance(Y);
  const Matrix Sr = sample_covariance(rev);
  CHECK(estimate_et(S, 5).r_hat == estimate_et(Sr, 5).r_hat);
  CHECK(estimate_er(S, 5).r_hat == estimate_er(Sr, 5).r_hat);
  CHECK(estimate_gr(S, 5).r_hat == estimate_gr(Sr, 5).r_hat);
  CHECK(estimate_er(S, 5).r_hat == estimate_er(sample_covariance(Matrix(3.7 * Y)), 5).r_hat);
  CHECK(estimate_gr(S, 5).r_hat == estimate_gr(sample_covariance(Matrix(0.2 * Y)), 5).r_hat);
  CHECK(estimate_act(sample_correlation(Y), 200, 5).r_hat == estimate_act(sample_correlation(rev), 200, 5).r_hat);
}

TEST_CASE("method names parse case-insensitively") {
  CHECK(parse_rank_method("gR") == RankMethod::GR);
  CHECK(method_name(RankMethod::ACT) == "ACT");
  CHECK_THROWS_AS(parse_rank_method("xx"), ParameterError);
}
