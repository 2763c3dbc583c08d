#include "adass/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "adass/csv.hpp"
#include "adass/errors.hpp"

namespace adass {

namespace {

void check_dims(int p, int s, int r) {
  if (p < 2) throw ParameterError("synthetic design: p must be at least 2");
  if (s < 1 || s > p) throw ParameterError("synthetic design: need 1 <= s <= p");
  if (r < 1 || r > s) throw ParameterError("synthetic design: need 1 <= r <= s");
}

SyntheticTruth finish(Matrix B, double psi, std::vector<int> support, Design design) {
  SyntheticTruth t;
  t.r = static_cast<int>(B.cols());
  t.s = static_cast<int>(support.size());
  t.Sigma_star = B * B.transpose();
  t.Sigma_star.diagonal().array() += psi;
  t.B_star = std::move(B);
  t.psi_star = psi;
  t.support = std::move(support);
  t.design = design;
  return t;
}

}  // namespace

std::string design_name(Design d) {
  switch (d) {
    case Design::signed_two: return "signed_two";
    case Design::uniform_band: return "uniform_band";
    case Design::diagonal_pattern: return "diagonal_pattern";
  }
  return "?";
}

Design parse_design(const std::string& name) {
  for (Design d : {Design::signed_two, Design::uniform_band, Design::diagonal_pattern}) {
    if (design_name(d) == name) return d;
  }
  throw ParameterError("unknown design '" + name + "'");
}

std::vector<int> choose_rows(int p, int count, RngHandle& rng) {
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    const int span = p - i;
    const int pick = i + std::min(static_cast<int>(rng.uniform() * span), span - 1);
    std::swap(idx[i], idx[pick]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SyntheticTruth gen_signed_two(int p, int s, int r, RngHandle& rng) {
  check_dims(p, s, r);
  std::vector<int> support = choose_rows(p, s, rng);
  Matrix B = Matrix::Zero(p, r);
  for (int j : support) {
    for (int k = 0; k < r; ++k) B(j, k) = rng.uniform() < 0.5 ? -2.0 : 2.0;
  }
  return finish(std::move(B), 2.0, std::move(support), Design::signed_two);
}

SyntheticTruth gen_uniform_band(int p, int s, int r, RngHandle& rng) {
  check_dims(p, s, r);
  std::vector<int> support = choose_rows(p, s, rng);
  const double lo = 3.0 / std::sqrt(static_cast<double>(s));
  const double hi = 4.0 / std::sqrt(static_cast<double>(s));
  Matrix B = Matrix::Zero(p, r);
  for (int j : support) {
    for (int k = 0; k < r; ++k) {
      const double magnitude = lo + (hi - lo) * rng.uniform();
      B(j, k) = rng.uniform() < 0.5 ? -magnitude : magnitude;
    }
  }
  return finish(std::move(B), 1.0, std::move(support), Design::uniform_band);
}

SyntheticTruth gen_diagonal_pattern() {
  constexpr int p = 50, r = 5, block = 5;
  Matrix B = Matrix::Zero(p, r);
  std::vector<int> support;
  for (int k = 0; k < r; ++k) {
    for (int j = block * k; j < block * (k + 1); ++j) {
      B(j, k) = 1.0;
      support.push_back(j);
    }
  }
  return finish(std::move(B), 1.0, std::move(support), Design::diagonal_pattern);
}

SyntheticTruth generate_truth(Design design, int p, int s, int r, RngHandle& rng) {
  switch (design) {
    case Design::signed_two: return gen_signed_two(p, s, r, rng);
    case Design::uniform_band: return gen_uniform_band(p, s, r, rng);
    case Design::diagonal_pattern: return gen_diagonal_pattern();
  }
  throw ParameterError("unknown design");
}

Dataset sample_data(const SyntheticTruth& truth, int n, RngHandle& rng) {
  if (n < 1) throw ParameterError("sample_data: n must be positive");
  const auto p = truth.B_star.rows();
  const auto r = truth.B_star.cols();
  Matrix factors(n, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < r; ++k) factors(i, k) = rng.normal();
  }
  const double noise_sd = std::sqrt(truth.psi_star);
  Dataset out;
  out.Y = factors * truth.B_star.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out.Y(i, j) += noise_sd * rng.normal();
  }
  out.source = "synthetic:" + design_name(truth.design);
  out.seed = rng.seed();
  out.stream_id = rng.stream_id();
  out.truth = truth;
  return out;
}

void write_dataset(const Dataset& data, const std::string& csv_path, const std::string& json_path) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < data.Y.cols(); ++j) header.push_back("y" + std::to_string(j + 1));
  write_matrix_csv(csv_path, data.Y, header);
  if (!data.truth || json_path.empty()) return;

  const SyntheticTruth& t = *data.truth;
  nlohmann::ordered_json j;
  j["source"] = data.source;
  j["seed"] = data.seed;
  j["stream_id"] = data.stream_id;
  j["n"] = data.Y.rows();
  j["p"] = data.Y.cols();
  j["design"] = design_name(t.design);
  j["r"] = t.r;
  j["s"] = t.s;
  j["psi_star"] = t.psi_star;
  j["support"] = t.support;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < t.B_star.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(t.B_star.cols()));
    for (Eigen::Index c = 0; c < t.B_star.cols(); ++c) row[c] = t.B_star(r, c);
    rows.push_back(std::move(row));
  }
  j["B_star"] = rows;
  std::ofstream out(json_path);
  if (!out) throw InputError("cannot write '" + json_path + "'");
  out << j.dump(1) << '\n';
}

SyntheticTruth read_truth_json(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw InputError("cannot open '" + json_path + "'");
  nlohmann::json j;
  try {
    in >> j;
    const auto rows = j.at("B_star").get<std::vector<std::vector<double>>>();
    const int r = j.at("r").get<int>();
    Matrix B(static_cast<Eigen::Index>(rows.size()), r);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != r) throw InputError("'" + json_path + "': ragged B_star");
      for (int k = 0; k < r; ++k) B(static_cast<Eigen::Index>(i), k) = rows[i][k];
    }
    return finish(std::move(B), j.at("psi_star").get<double>(), j.at("support").get<std::vector<int>>(),
                  parse_design(j.at("design").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + json_path + "': " + e.what());
  }
}

}  // namespace adass
