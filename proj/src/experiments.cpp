#include "adass/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "adass/csv.hpp"
#include "adass/diagnostics.hpp"
#include "adass/errors.hpp"

namespace adass {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InputError("grid key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InputError("grid key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) out.push_back(to_int(key, item));
  if (out.empty()) throw InputError("grid key '" + key + "': empty list");
  return out;
}

struct Cell {
  int n, s, r;
};

std::vector<Cell> cells_of(const ExperimentGrid& g) {
  std::vector<Cell> cells;
  for (int n : g.n_values)
    for (int s : g.s_values)
      for (int r : g.r_values) cells.push_back({n, s, r});
  return cells;
}

ModelConfig cell_model(ModelConfig cfg, const Matrix& Y) {
  cfg.n = static_cast<int>(Y.rows());
  cfg.p = static_cast<int>(Y.cols());
  return cfg.resolved();
}

Dataset cell_data(const ExperimentGrid& g, const Cell& c, const ReplicationSeeds& rs) {
  RngHandle rng(rs.seed, rs.data_stream);
  SyntheticTruth truth = generate_truth(g.design, g.p, c.s, c.r, rng);
  return sample_data(truth, c.n, rng);
}

ChainSettings rep_chain(const ExperimentGrid& g, const ReplicationSeeds& rs) {
  ChainSettings cs = g.chain;
  cs.seed = rs.seed;
  cs.stream_id = rs.chain_stream;
  cs.snapshot_loadings = false;
  return cs;
}

int estimate_once(Method m, const Dataset& d, const ExperimentGrid& g, const ReplicationSeeds& rs) {
  const int n = static_cast<int>(d.Y.rows());
  switch (m) {
    case Method::AdaSS: {
      ChainTrace trace = run_chain(d.Y, cell_model(g.model, d.Y), rep_chain(g, rs));
      return mode_smallest(trace.xi);
    }
    case Method::ET: return estimate_et(sample_covariance(d.Y), g.r_max).r_hat;
    case Method::ER: return estimate_er(sample_covariance(d.Y), g.r_max).r_hat;
    case Method::GR: return estimate_gr(sample_covariance(d.Y), g.r_max).r_hat;
    case Method::ACT: return estimate_act(sample_correlation(d.Y), n, g.r_max).r_hat;
    case Method::DT: {
      RngHandle rng(rs.seed, rs.dt_stream);
      return estimate_dt(d.Y, g.r_max, rng).r_hat;
    }
  }
  throw ParameterError("unknown method");
}

std::string fmt(double x, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << x;
  return os.str();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw InputError("write failed: '" + path + "'");
}

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << "  ";
      os << std::setw(static_cast<int>(width[i])) << r[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::string method_label(Method m) {
  switch (m) {
    case Method::AdaSS: return "AdaSS";
    case Method::ET: return "ET";
    case Method::ER: return "ER";
    case Method::GR: return "GR";
    case Method::ACT: return "ACT";
    case Method::DT: return "DT";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string l = lower(trim(name));
  if (l == "adass") return Method::AdaSS;
  if (l == "et") return Method::ET;
  if (l == "er") return Method::ER;
  if (l == "gr") return Method::GR;
  if (l == "act") return Method::ACT;
  if (l == "dt") return Method::DT;
  throw ParameterError("unknown method '" + name + "'");
}

void ExperimentGrid::validate() const {
  if (replications < 1) throw ParameterError("replications must be >= 1");
  if (p < 2) throw ParameterError("p must be >= 2");
  if (n_values.empty() || s_values.empty() || r_values.empty())
    throw ParameterError("grid lists must be non-empty");
  if (methods.empty()) throw ParameterError("at least one method is required");
  for (int n : n_values)
    if (n < 2) throw ParameterError("n must be >= 2");
  if (design != Design::diagonal_pattern) {
    for (int s : s_values)
      for (int r : r_values)
        if (r < 1 || r > s || s > p)
          throw ParameterError("cell (s=" + std::to_string(s) + ", r=" + std::to_string(r) +
                               ") violates 1 <= r <= s <= p");
  }
  if (r_max < 1) throw ParameterError("r_max must be >= 1");
  chain.validate();
}

ReplicationSeeds replication_seeds(std::uint64_t base_seed, int cell, int replication) {
  ReplicationSeeds rs;
  rs.seed = base_seed;
  rs.data_stream = (static_cast<std::uint64_t>(cell) << 20) | static_cast<std::uint64_t>(replication);
  rs.chain_stream = rs.data_stream | (std::uint64_t{1} << 40);
  rs.dt_stream = rs.data_stream | (std::uint64_t{2} << 40);
  return rs;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<RankRow> run_rank_study(const ExperimentGrid& grid) {
  grid.validate();
  const auto cells = cells_of(grid);
  const std::size_t reps = static_cast<std::size_t>(grid.replications);
  const std::size_t n_methods = grid.methods.size();
  // estimates[(cell * reps + rep) * n_methods + method]
  std::vector<int> estimates(cells.size() * reps * n_methods, 0);

  parallel_for(cells.size() * reps, grid.threads, [&](std::size_t job) {
    const int c = static_cast<int>(job / reps);
    const int rep = static_cast<int>(job % reps);
    const auto rs = replication_seeds(grid.base_seed, c, rep);
    const Dataset d = cell_data(grid, cells[c], rs);
    for (std::size_t m = 0; m < n_methods; ++m)
      estimates[job * n_methods + m] = estimate_once(grid.methods[m], d, grid, rs);
  });

  std::vector<RankRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      RankRow row;
      row.n = cells[c].n;
      row.s = cells[c].s;
      row.r = grid.design == Design::diagonal_pattern ? 5 : cells[c].r;
      row.method = grid.methods[m];
      row.replications = grid.replications;
      row.cell = static_cast<int>(c);
      row.base_seed = grid.base_seed;
      int t = 0, o = 0, u = 0;
      double sum = 0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        int e = estimates[(c * reps + rep) * n_methods + m];
        row.estimates.push_back(e);
        sum += e;
        switch (classify_estimate(e, row.r)) {
          case EstimateClass::True: ++t; break;
          case EstimateClass::Over: ++o; break;
          case EstimateClass::Under: ++u; break;
        }
      }
      const double k = static_cast<double>(reps);
      row.pct_true = 100.0 * t / k;
      row.pct_over = 100.0 * o / k;
      row.pct_under = 100.0 * u / k;
      row.ave = sum / k;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<CovRow> run_cov_study(const ExperimentGrid& grid) {
  grid.validate();
  const auto cells = cells_of(grid);
  const std::size_t reps = static_cast<std::size_t>(grid.replications);
  std::vector<double> loss(cells.size() * reps), sample_loss(cells.size() * reps);

  parallel_for(cells.size() * reps, grid.threads, [&](std::size_t job) {
    const int c = static_cast<int>(job / reps);
    const int rep = static_cast<int>(job % reps);
    const auto rs = replication_seeds(grid.base_seed, c, rep);
    const Dataset d = cell_data(grid, cells[c], rs);
    const Matrix& truth = d.truth->Sigma_star;
    ChainTrace trace = run_chain(d.Y, cell_model(grid.model, d.Y), rep_chain(grid, rs));
    loss[job] = scaled_spectral_loss(trace.sigma_mean, truth);
    sample_loss[job] = scaled_spectral_loss(sample_covariance(d.Y), truth);
  });

  auto mean_se = [](const std::vector<double>& x) {
    const double k = static_cast<double>(x.size());
    double m = 0;
    for (double v : x) m += v;
    m /= k;
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    double se = x.size() > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
    return std::pair<double, double>{m, se};
  };

  std::vector<CovRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CovRow row;
    row.n = cells[c].n;
    row.s = cells[c].s;
    row.r = cells[c].r;
    row.replications = grid.replications;
    row.cell = static_cast<int>(c);
    row.base_seed = grid.base_seed;
    int better = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      row.losses.push_back(loss[c * reps + rep]);
      row.sample_losses.push_back(sample_loss[c * reps + rep]);
      if (row.losses.back() < row.sample_losses.back()) ++better;
    }
    std::tie(row.mean_loss, row.se_loss) = mean_se(row.losses);
    std::tie(row.mean_sample_loss, row.se_sample_loss) = mean_se(row.sample_losses);
    row.frac_better = static_cast<double>(better) / static_cast<double>(reps);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SensitivityTrace> run_sensitivity_q(const std::vector<int>& q_values, const ExperimentGrid& cell) {
  cell.validate();
  if (q_values.empty()) throw ParameterError("q_values must be non-empty");
  const Cell c{cell.n_values.front(), cell.s_values.front(), cell.r_values.front()};
  const auto rs = replication_seeds(cell.base_seed, 0, 0);
  const Dataset d = cell_data(cell, c, rs);

  std::vector<SensitivityTrace> out(q_values.size());
  parallel_for(q_values.size(), cell.threads, [&](std::size_t i) {
    ModelConfig cfg = cell.model;
    cfg.q = q_values[i];
    if (cfg.q < 1) throw ParameterError("q must be >= 1");
    cfg = cell_model(cfg, d.Y);
    ChainSettings cs = rep_chain(cell, rs);
    ChainTrace trace = run_chain(d.Y, cfg, cs);
    out[i].q = cfg.q;
    out[i].iteration = trace.iteration;
    out[i].xi = trace.xi;
    out[i].xi_mode = mode_smallest(trace.xi);
  });
  return out;
}

void write_rank_csv(const std::string& path, const std::vector<RankRow>& rows) {
  std::ostringstream os;
  os << "n,s,r,method,pct_true,pct_over,pct_under,ave,replications,base_seed,cell\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.s << ',' << r.r << ',' << method_label(r.method) << ',' << format_double(r.pct_true)
       << ',' << format_double(r.pct_over) << ',' << format_double(r.pct_under) << ',' << format_double(r.ave)
       << ',' << r.replications << ',' << r.base_seed << ',' << r.cell << '\n';
  write_text(path, os.str());
}

void write_cov_csv(const std::string& path, const std::vector<CovRow>& rows) {
  std::ostringstream os;
  os << "n,s,r,mean_loss,se_loss,mean_sample_loss,se_sample_loss,frac_better,replications,base_seed,cell\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.s << ',' << r.r << ',' << format_double(r.mean_loss) << ',' << format_double(r.se_loss)
       << ',' << format_double(r.mean_sample_loss) << ',' << format_double(r.se_sample_loss) << ','
       << format_double(r.frac_better) << ',' << r.replications << ',' << r.base_seed << ',' << r.cell << '\n';
  write_text(path, os.str());
}

std::string format_rank_table(const std::vector<RankRow>& rows) {
  std::vector<std::vector<std::string>> t{{"n", "s", "r", "method", "True", "Over", "Under", "Ave"}};
  for (const auto& r : rows)
    t.push_back({std::to_string(r.n), std::to_string(r.s), std::to_string(r.r), method_label(r.method),
                 fmt(r.pct_true, 0), fmt(r.pct_over, 0), fmt(r.pct_under, 0), fmt(r.ave, 2)});
  return aligned(t);
}

std::string format_cov_table(const std::vector<CovRow>& rows) {
  std::vector<std::vector<std::string>> t{{"n", "s", "r", "AdaSS", "(se)", "Sample", "(se)"}};
  for (const auto& r : rows)
    t.push_back({std::to_string(r.n), std::to_string(r.s), std::to_string(r.r), fmt(r.mean_loss, 3),
                 "(" + fmt(r.se_loss, 3) + ")", fmt(r.mean_sample_loss, 3), "(" + fmt(r.se_sample_loss, 3) + ")"});
  return aligned(t);
}

ExperimentGrid parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file '" + path + "'");
  ExperimentGrid g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "design") g.design = parse_design(val);
    else if (key == "n") g.n_values = to_ints(key, val);
    else if (key == "p") g.p = to_int(key, val);
    else if (key == "s") g.s_values = to_ints(key, val);
    else if (key == "r") g.r_values = to_ints(key, val);
    else if (key == "replications") g.replications = to_int(key, val);
    else if (key == "methods") {
      g.methods.clear();
      for (const auto& m : split(val, ',')) g.methods.push_back(parse_method(m));
    } else if (key == "n_iter") g.chain.n_iter = to_int(key, val);
    else if (key == "burn_in") g.chain.burn_in = to_int(key, val);
    else if (key == "thin") g.chain.thin = to_int(key, val);
    else if (key == "a") g.model.A = to_double(key, val);
    else if (key == "a1") g.model.a1 = to_double(key, val);
    else if (key == "a2") g.model.a2 = to_double(key, val);
    else if (key == "q") g.model.q = to_int(key, val);
    else if (key == "r_max") g.r_max = to_int(key, val);
    else if (key == "seed") g.base_seed = static_cast<std::uint64_t>(std::stoull(val));
    else if (key == "threads") g.threads = to_int(key, val);
    else throw InputError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  g.validate();
  return g;
}

}  // namespace adass
