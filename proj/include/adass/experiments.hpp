#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adass/estimators.hpp"
#include "adass/sampler.hpp"
#include "adass/synth.hpp"

namespace adass {

enum class Method { AdaSS, ET, ER, GR, ACT, DT };

std::string method_label(Method m);
Method parse_method(const std::string& name);

/// A simulation grid: every (n, s, r) cell is replicated `replications` times.
struct ExperimentGrid {
  Design design = Design::uniform_band;
  std::vector<int> n_values{100};
  int p = 200;
  std::vector<int> s_values{10, 30, 50};
  std::vector<int> r_values{1, 3, 5};
  int replications = 20;
  std::vector<Method> methods{Method::AdaSS, Method::ET, Method::ER, Method::GR, Method::ACT, Method::DT};
  ChainSettings chain;
  /// A, a1, a2, q (0 = ceil(sqrt(n))) are taken from here; p and n per cell.
  ModelConfig model;
  int r_max = kDefaultRMax;
  std::uint64_t base_seed = 20240101;
  int threads = 1;

  void validate() const;
};

/// Seeds of one replication. The data, chain and DT streams are disjoint and
/// depend only on (base seed, cell index, replication).
struct ReplicationSeeds {
  std::uint64_t seed = 0;
  std::uint64_t data_stream = 0;
  std::uint64_t chain_stream = 0;
  std::uint64_t dt_stream = 0;
};
ReplicationSeeds replication_seeds(std::uint64_t base_seed, int cell, int replication);

struct RankRow {
  int n = 0, s = 0, r = 0;
  Method method = Method::AdaSS;
  double pct_true = 0, pct_over = 0, pct_under = 0, ave = 0;
  int replications = 0;
  int cell = 0;
  std::uint64_t base_seed = 0;
  std::vector<int> estimates;  // per replication
};

struct CovRow {
  int n = 0, s = 0, r = 0;
  /// se_* are across-replication standard deviations, as in the loss tables.
  double mean_loss = 0, se_loss = 0;
  double mean_sample_loss = 0, se_sample_loss = 0;
  /// Fraction of replications where the posterior mean beats S.
  double frac_better = 0;
  int replications = 0;
  int cell = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> losses;
  std::vector<double> sample_losses;
};

std::vector<RankRow> run_rank_study(const ExperimentGrid& grid);
std::vector<CovRow> run_cov_study(const ExperimentGrid& grid);

struct SensitivityTrace {
  int q = 0;
  std::vector<int> iteration;
  std::vector<int> xi;
  int xi_mode = 0;
};

/// One chain per q on a single simulated dataset (same data for every q).
std::vector<SensitivityTrace> run_sensitivity_q(const std::vector<int>& q_values, const ExperimentGrid& cell);

/// Run fn(0..count-1) on up to `threads` workers pulling indices from a
/// shared counter. Results must be written to per-index slots.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

void write_rank_csv(const std::string& path, const std::vector<RankRow>& rows);
void write_cov_csv(const std::string& path, const std::vector<CovRow>& rows);
std::string format_rank_table(const std::vector<RankRow>& rows);
std::string format_cov_table(const std::vector<CovRow>& rows);

/// Parse a flat key=value grid description (see README).
ExperimentGrid parse_grid_file(const std::string& path);

}  // namespace adass
