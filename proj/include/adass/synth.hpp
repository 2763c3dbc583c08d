#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adass/rng.hpp"

namespace adass {

enum class Design { signed_two, uniform_band, diagonal_pattern };

std::string design_name(Design d);
Design parse_design(const std::string& name);

/// Ground truth of a simulated factor model.
struct SyntheticTruth {
  Matrix B_star;          // p x r
  double psi_star = 1.0;
  Matrix Sigma_star;      // B* B*^T + psi* I
  std::vector<int> support;  // sorted nonzero row indices (0-based)
  int r = 0;
  int s = 0;
  Design design = Design::signed_two;
};

/// Observation matrix plus provenance.
struct Dataset {
  Matrix Y;  // n x p
  std::string source;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::optional<SyntheticTruth> truth;
};

/// s random rows with entries uniform on {-2, 2}; psi* = 2.
SyntheticTruth gen_signed_two(int p, int s, int r, RngHandle& rng);
/// s random rows with entries uniform on [-4/sqrt(s), -3/sqrt(s)] U [3/sqrt(s), 4/sqrt(s)]; psi* = 1.
SyntheticTruth gen_uniform_band(int p, int s, int r, RngHandle& rng);
/// p = 50, r = 5: beta_jk = 1 iff 5k <= j < 5(k + 1) (0-based); psi* = 1.
SyntheticTruth gen_diagonal_pattern();

SyntheticTruth generate_truth(Design design, int p, int s, int r, RngHandle& rng);

/// n iid N(0, Sigma*) rows generated as B* z + sqrt(psi*) e.
Dataset sample_data(const SyntheticTruth& truth, int n, RngHandle& rng);

/// First `count` entries of a partial Fisher-Yates shuffle of 0..p-1, sorted.
std::vector<int> choose_rows(int p, int count, RngHandle& rng);

/// Data as CSV and truth as a JSON sidecar (skipped when the dataset has none).
void write_dataset(const Dataset& data, const std::string& csv_path, const std::string& json_path);
SyntheticTruth read_truth_json(const std::string& json_path);

}  // namespace adass
