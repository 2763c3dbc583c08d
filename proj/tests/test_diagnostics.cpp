#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adass/assignment.hpp"
#include "adass/diagnostics.hpp"
#include "adass/errors.hpp"

using namespace adass;

TEST_CASE("mode uses the smallest value on ties") {
  CHECK(mode_smallest(std::vector<int>(500, 3)) == 3);
  std::vector<int> bi(250, 3);
  bi.insert(bi.end(), 250, 2);
  CHECK(mode_smallest(bi) == 2);
  CHECK_THROWS(mode_smallest({}));
}

TEST_CASE("summary histograms sum to the retained count") {
  ChainTrace t;
  t.xi = {2, 3, 3, 4};
  t.support_size = {10, 10, 11, 12};
  t.iteration = {1, 2, 3, 4};
  t.psi = {1, 1, 1, 1};
  t.sigma_mean = Matrix::Identity(3, 3);
  t.psi_mean = Vector::Ones(1);
  const auto s = summarize(t);
  CHECK(s.xi_mode == 3);
  int total = 0;
  for (const auto& [k, c] : s.xi_histogram) total += c;
  CHECK(total == 4);
  CHECK(s.support_histogram.at(10) == 2);
  CHECK(summary_json(s).find("\"xi_mode\": 3") != std::string::npos);
}

TEST_CASE("ACF and PACF of an AR(1) series") {
  RngHandle rng(1);
  const double phi = 0.6;
  std::vector<double> x(200000);
  double prev = 0;
  for (auto& v : x) {
    prev = phi * prev + rng.normal();
    v = prev;
  }
  const Vector r = acf(x, 5);
  const Vector pr = pacf(x, 5);
  CHECK(r(0) == 1.0);
  CHECK(pr(0) == 1.0);
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(r(k) - std::pow(phi, k)) < 0.01);
  CHECK(std::abs(pr(1) - phi) < 0.01);
  for (int k = 2; k <= 5; ++k) CHECK(std::abs(pr(k)) < 0.01);
}

TEST_CASE("ACF of a constant series is undefined") {
  CHECK_THROWS_AS(acf(std::vector<double>(10, 3.0), 3), NumericalError);
  CHECK_THROWS_AS(acf({1.0, 2.0, 3.0}, 3), ParameterError);
}

TEST_CASE("spectral norm and scaled loss") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(spectral_norm_symmetric(m) == doctest::Approx(3.0));
  m << -5, 0, 0, 1;
  CHECK(spectral_norm_symmetric(m) == doctest::Approx(5.0));
  const Matrix I = Matrix::Identity(3, 3);
  CHECK(scaled_spectral_loss(I, I) == 0.0);
  CHECK(scaled_spectral_loss(2 * I, I) == doctest::Approx(1.0));
}

TEST_CASE("assignment matches brute force") {
  RngHandle rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix c(5, 5);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) c(i, j) = rng.uniform();
    const auto col = solve_assignment(c);
    double got = 0;
    for (int i = 0; i < 5; ++i) got += c(i, col[i]);
    std::vector<int> perm{0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      double s = 0;
      for (int i = 0; i < 5; ++i) s += c(i, perm[i]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("alignment undoes column permutations and sign flips") {
  RngHandle rng(4);
  Matrix base = Matrix::Zero(12, 4);
  for (int k = 0; k < 3; ++k) base.block(4 * k, k, 4, 1).setConstant(1.0 + k);
  std::vector<Matrix> snaps;
  for (int s = 0; s < 60; ++s) {
    std::vector<int> perm{0, 1, 2, 3};
    for (int i = 3; i > 0; --i) std::swap(perm[i], perm[static_cast<int>(rng.uniform() * (i + 1))]);
    Matrix m(12, 4);
    for (int k = 0; k < 4; ++k) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      m.col(perm[k]) = sign * base.col(k);
      for (Eigen::Index j = 0; j < 12; ++j)
        if (base(j, k) != 0) m(j, perm[k]) += 0.05 * rng.normal();
    }
    snaps.push_back(m);
  }
  const auto res = align_loadings(snaps, 1);
  CHECK(res.converged);
  // The zero column wanders over every slot, so all four slots take part.
  CHECK(res.active_slots.size() == 4);
  for (int k = 0; k < 3; ++k) {
    double best = 1e300;
    for (Eigen::Index c = 0; c < 4; ++c)
      best = std::min({best, (res.consensus.col(c) - base.col(k)).cwiseAbs().maxCoeff(),
                       (res.consensus.col(c) + base.col(k)).cwiseAbs().maxCoeff()});
    CHECK(best < 0.05);
  }
  int empty = 0;
  for (Eigen::Index c = 0; c < 4; ++c) empty += res.consensus.col(c).cwiseAbs().maxCoeff() < 0.05;
  CHECK(empty == 1);
  // Every aligned snapshot sits close to the consensus.
  for (const auto& a : res.aligned) CHECK((a - res.consensus).cwiseAbs().maxCoeff() < 0.3);
}

TEST_CASE("classification") {
  CHECK(classify_estimate(3, 3) == EstimateClass::True);
  CHECK(classify_estimate(4, 3) == EstimateClass::Over);
  CHECK(class_name(classify_estimate(1, 3)) == "Under");
}
