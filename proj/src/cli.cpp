#include "adass/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "adass/csv.hpp"
#include "adass/diagnostics.hpp"
#include "adass/errors.hpp"
#include "adass/estimators.hpp"
#include "adass/experiments.hpp"
#include "adass/sampler.hpp"
#include "adass/synth.hpp"
#include "adass/trace_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace adass {

namespace {

struct Global {
  bool strict = false;
  int threads = 1;
  std::string config;
};

class Clock {
 public:
  explicit Clock(bool strict) : strict_(strict), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (strict_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool strict_;
  std::chrono::steady_clock::time_point start_;
};

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << body;
  if (!out) throw InputError("write failed: '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_manifest(const fs::path& path, const json& manifest) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, manifest.dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move manifest into place at '" + path.string() + "': " + ec.message());
}

json base_manifest(const std::string& command, const std::vector<std::string>& args, const Global& g) {
  json m;
  m["command"] = command;
  m["argv"] = args;
  m["version"] = kVersion;
  m["strict"] = g.strict;
  m["threads"] = g.strict ? 1 : g.threads;
  return m;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto strip = [](std::string s) {
      auto f = s.find_first_not_of(" \t\r");
      if (f == std::string::npos) return std::string{};
      return s.substr(f, s.find_last_not_of(" \t\r") - f + 1);
    };
    std::string key = strip(line.substr(0, eq));
    for (auto& c : key)
      if (c == '_') c = '-';
    out[key] = strip(line.substr(eq + 1));
  }
  return out;
}

// Config values fill options not given on the command line. Returns the
// applied entries as explicit flags so manifests replay without the file.
std::vector<std::string> apply_config(CLI::App* sub, const std::string& path) {
  std::vector<std::string> applied;
  for (const auto& [key, value] : read_config(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw InputError(path + ": unknown key '" + key + "' for '" + sub->get_name() + "'");
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") {
        opt->add_result("true");
        applied.push_back("--" + key);
      } else if (!(value == "false" || value == "0")) {
        throw InputError(path + ": flag '" + key + "' expects true/false");
      } else {
        continue;
      }
    } else {
      opt->add_result(value);
      applied.push_back("--" + key + "=" + value);
    }
    opt->run_callback();
  }
  return applied;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Matrix load_data(const std::string& path, bool center) {
  if (!fs::exists(path)) throw InputError("data file not found: '" + path + "'");
  Matrix Y = read_matrix_csv(path).values;
  if (Y.rows() < 2) throw InputError(path + ": need at least 2 observations, got " + std::to_string(Y.rows()));
  if (Y.cols() < 2) throw InputError(path + ": need at least 2 variables, got " + std::to_string(Y.cols()));
  if (center) center_columns(Y);
  return Y;
}

json config_json(const ModelConfig& c) {
  json j;
  j["p"] = c.p;
  j["n"] = c.n;
  j["q"] = c.q;
  j["A"] = c.A;
  j["a1"] = c.a1;
  j["a2"] = c.a2;
  j["noise_mode"] = c.noise_mode == NoiseMode::homogeneous ? "homogeneous" : "heterogeneous";
  if (c.factor_cov) {
    j["factor_cov"] = "inverse_wishart";
    j["iw_dof"] = c.factor_cov->dof;
  } else {
    j["factor_cov"] = "identity";
  }
  return j;
}

// ---- fit ----

struct FitArgs {
  std::string data;
  std::string out = "adass_out";
  int q = 0;
  double A = 0.1, a1 = 0.01, a2 = 0.01;
  std::string noise = "homogeneous";
  double iw_dof = 0.0;
  bool center = false;
  bool snapshots = false;
  ChainSettings chain;
};

void add_fit(CLI::App* sub, FitArgs& a) {
  sub->add_option("data", a.data, "n x p CSV, rows are observations")->required();
  sub->add_option("--out", a.out, "Output directory");
  sub->add_option("--q", a.q, "Column budget (default ceil(sqrt(n)))");
  sub->add_option("--A", a.A, "Coupling exponent");
  sub->add_option("--a1", a.a1, "IG shape of the noise prior");
  sub->add_option("--a2", a.a2, "IG rate of the noise prior");
  sub->add_option("--noise", a.noise, "homogeneous | heterogeneous");
  sub->add_option("--iw-dof", a.iw_dof, "Inverse-Wishart(I, dof) prior on the factor covariance (0 = identity)");
  sub->add_flag("--center", a.center, "Remove column means before fitting");
  sub->add_flag("--snapshots", a.snapshots, "Store every retained loading matrix");
  sub->add_option("--n-iter", a.chain.n_iter, "Total sweeps");
  sub->add_option("--burn-in", a.chain.burn_in, "Discarded sweeps");
  sub->add_option("--thin", a.chain.thin, "Thinning interval");
  sub->add_option("--seed", a.chain.seed, "RNG seed");
  sub->add_option("--stream", a.chain.stream_id, "RNG stream id");
}

int cmd_fit(const FitArgs& a, CLI::App* sub, const Global& g, const std::vector<std::string>& args) {
  Clock clock(g.strict);
  if (sub->get_option("--q")->count() > 0 && a.q < 1) throw ParameterError("--q must be >= 1");
  Matrix Y = load_data(a.data, a.center);

  ModelConfig cfg;
  cfg.n = static_cast<int>(Y.rows());
  cfg.p = static_cast<int>(Y.cols());
  cfg.q = a.q;
  cfg.A = a.A;
  cfg.a1 = a.a1;
  cfg.a2 = a.a2;
  if (a.noise == "homogeneous") {
    cfg.noise_mode = NoiseMode::homogeneous;
  } else if (a.noise == "heterogeneous") {
    cfg.noise_mode = NoiseMode::heterogeneous;
  } else {
    throw ParameterError("--noise must be homogeneous or heterogeneous");
  }
  bool clamped = false;
  cfg = cfg.resolved(&clamped);
  if (a.iw_dof > 0.0) cfg.factor_cov = InverseWishartPrior{Matrix::Identity(cfg.q, cfg.q), a.iw_dof};
  cfg.validate();
  ChainSettings cs = a.chain;
  cs.snapshot_loadings = a.snapshots;
  cs.validate();

  ChainTrace trace = run_chain(Y, cfg, cs);
  PosteriorSummary summary = summarize(trace);

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::vector<std::string> outputs;
  write_trace_csv((dir / "trace.csv").string(), trace);
  outputs.push_back((dir / "trace.csv").string());
  write_sftr((dir / "sigma_mean.sftr").string(), {trace.sigma_mean});
  outputs.push_back((dir / "sigma_mean.sftr").string());
  write_matrix_csv((dir / "psi_mean.csv").string(), trace.psi_mean, {"psi"});
  outputs.push_back((dir / "psi_mean.csv").string());
  if (a.snapshots) {
    write_sftr((dir / "loadings.sftr").string(), trace.loadings);
    outputs.push_back((dir / "loadings.sftr").string());
  }
  write_file(dir / "summary.json", summary_json(summary) + "\n");
  outputs.push_back((dir / "summary.json").string());

  json m = base_manifest("fit", args, g);
  m["seed"] = cs.seed;
  m["stream_id"] = cs.stream_id;
  m["config"] = config_json(cfg);
  m["q_clamped"] = clamped;
  m["chain"] = {{"n_iter", cs.n_iter}, {"burn_in", cs.burn_in}, {"thin", cs.thin}, {"snapshots", cs.snapshot_loadings}};
  m["centered"] = a.center;
  m["inputs"] = {a.data};
  m["outputs"] = outputs;
  m["wall_clock_ms"] = clock.ms();
  write_manifest(dir / "manifest.json", m);

  std::cout << "retained " << trace.retained() << " samples; xi mode " << summary.xi_mode << "; output in "
            << dir.string() << "\n";
  return 0;
}

// ---- estimate ----

struct EstimateArgs {
  std::string data;
  std::string methods = "et,er,gr,act,dt";
  int r_max = kDefaultRMax;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  bool center = false;
  std::string out;
};

void add_estimate(CLI::App* sub, EstimateArgs& a) {
  sub->add_option("data", a.data, "n x p CSV, rows are observations")->required();
  sub->add_option("--methods", a.methods, "Comma list of et,er,gr,act,dt");
  sub->add_option("--r-max", a.r_max, "Largest dimension considered");
  sub->add_option("--seed", a.seed, "Seed for DT");
  sub->add_option("--stream", a.stream, "Stream id for DT");
  sub->add_flag("--center", a.center, "Remove column means first");
  sub->add_option("--out", a.out, "CSV output file (default stdout)");
}

int cmd_estimate(const EstimateArgs& a, const Global& g, const std::vector<std::string>& args) {
  Clock total(g.strict);
  if (a.r_max < 1) throw ParameterError("--r-max must be >= 1");
  std::vector<RankMethod> methods;
  for (const auto& m : split_list(a.methods)) methods.push_back(parse_rank_method(m));
  if (methods.empty()) throw ParameterError("--methods is empty");
  Matrix Y = load_data(a.data, a.center);
  const int n = static_cast<int>(Y.rows());

  std::ostringstream os;
  os << "method,r_hat,r_max,runtime_ms\n";
  for (RankMethod m : methods) {
    Clock clock(g.strict);
    RankEstimate e;
    switch (m) {
      case RankMethod::ET: e = estimate_et(sample_covariance(Y), a.r_max); break;
      case RankMethod::ER: e = estimate_er(sample_covariance(Y), a.r_max); break;
      case RankMethod::GR: e = estimate_gr(sample_covariance(Y), a.r_max); break;
      case RankMethod::ACT: e = estimate_act(sample_correlation(Y), n, a.r_max); break;
      case RankMethod::DT: {
        RngHandle rng(a.seed, a.stream);
        e = estimate_dt(Y, a.r_max, rng);
        break;
      }
    }
    os << method_name(m) << ',' << e.r_hat << ',' << e.r_max << ',' << format_double(clock.ms()) << '\n';
    for (const auto& note : e.notes) std::cerr << method_name(m) << ": " << note << '\n';
  }

  if (a.out.empty()) {
    std::cout << os.str();
    return 0;
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_file(out, os.str());
  json m = base_manifest("estimate", args, g);
  m["seed"] = a.seed;
  m["stream_id"] = a.stream;
  m["r_max"] = a.r_max;
  m["centered"] = a.center;
  m["inputs"] = {a.data};
  m["outputs"] = {a.out};
  m["wall_clock_ms"] = total.ms();
  fs::path mpath = out;
  mpath += ".manifest.json";
  write_manifest(mpath, m);
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string design = "signed_two";
  int n = 100, p = 1000, s = 10, r = 3;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::string out = "sim";
};

void add_simulate(CLI::App* sub, SimulateArgs& a) {
  sub->add_option("--design", a.design, "signed_two | uniform_band | diagonal_pattern");
  sub->add_option("--n", a.n, "Observations");
  sub->add_option("--p", a.p, "Variables (diagonal_pattern fixes p = 50)");
  sub->add_option("--s", a.s, "Nonzero rows");
  sub->add_option("--r", a.r, "Factors");
  sub->add_option("--seed", a.seed, "RNG seed");
  sub->add_option("--stream", a.stream, "RNG stream id");
  sub->add_option("--out", a.out, "Output prefix; writes PREFIX.csv and PREFIX.json");
}

int cmd_simulate(const SimulateArgs& a, const Global& g, const std::vector<std::string>& args) {
  Clock clock(g.strict);
  if (a.n < 1) throw ParameterError("--n must be >= 1");
  Design d = parse_design(a.design);
  RngHandle rng(a.seed, a.stream);
  SyntheticTruth truth = generate_truth(d, a.p, a.s, a.r, rng);
  Dataset data = sample_data(truth, a.n, rng);
  data.source = "simulate:" + design_name(d);
  data.seed = a.seed;
  data.stream_id = a.stream;

  const std::string csv = a.out + ".csv";
  const std::string js = a.out + ".json";
  fs::path parent = fs::path(csv).parent_path();
  if (!parent.empty()) ensure_dir(parent);
  write_dataset(data, csv, js);

  json m = base_manifest("simulate", args, g);
  m["seed"] = a.seed;
  m["stream_id"] = a.stream;
  m["design"] = design_name(d);
  m["n"] = a.n;
  m["p"] = truth.B_star.rows();
  m["s"] = truth.s;
  m["r"] = truth.r;
  m["inputs"] = json::array();
  m["outputs"] = {csv, js};
  m["wall_clock_ms"] = clock.ms();
  write_manifest(a.out + ".manifest.json", m);
  std::cout << "wrote " << data.Y.rows() << " x " << data.Y.cols() << " data to " << csv << "\n";
  return 0;
}

// ---- diagnose ----

struct DiagnoseArgs {
  std::string trace;
  std::string series = "xi";
  int max_lag = 40;
  std::string out = "adass_diag";
};

void add_diagnose(CLI::App* sub, DiagnoseArgs& a) {
  sub->add_option("trace", a.trace, "Scalar trace CSV written by fit")->required();
  sub->add_option("--series", a.series, "xi | support_size | psi");
  sub->add_option("--max-lag", a.max_lag, "Largest ACF/PACF lag");
  sub->add_option("--out", a.out, "Output directory");
}

int cmd_diagnose(const DiagnoseArgs& a, const Global& g, const std::vector<std::string>& args) {
  Clock clock(g.strict);
  if (!fs::exists(a.trace)) throw InputError("trace file not found: '" + a.trace + "'");
  if (a.max_lag < 1) throw ParameterError("--max-lag must be >= 1");
  ChainTrace trace = read_trace_csv(a.trace);
  if (trace.retained() < 2) throw InputError(a.trace + ": need at least 2 retained samples");

  std::vector<double> series;
  if (a.series == "xi") {
    series.assign(trace.xi.begin(), trace.xi.end());
  } else if (a.series == "support_size") {
    series.assign(trace.support_size.begin(), trace.support_size.end());
  } else if (a.series == "psi") {
    series = trace.psi;
  } else {
    throw ParameterError("--series must be xi, support_size or psi");
  }

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::vector<std::string> outputs;

  PosteriorSummary summary = summarize(trace);
  double psi_bar = 0.0;
  for (double v : trace.psi) psi_bar += v;
  summary.psi_mean = Vector::Constant(1, psi_bar / static_cast<double>(trace.psi.size()));
  write_file(dir / "summary.json", summary_json(summary) + "\n");
  outputs.push_back((dir / "summary.json").string());

  std::ostringstream tr;
  tr << "iteration,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) tr << trace.iteration[i] << ',' << format_double(series[i]) << '\n';
  write_file(dir / ("trace_" + a.series + ".csv"), tr.str());
  outputs.push_back((dir / ("trace_" + a.series + ".csv")).string());

  json m = base_manifest("diagnose", args, g);
  m["series"] = a.series;
  m["inputs"] = {a.trace};

  const int lag = std::min<int>(a.max_lag, static_cast<int>(series.size()) - 1);
  Vector r;
  Vector pr;
  try {
    r = acf(series, lag);
    pr = pacf(series, lag);
  } catch (const NumericalError&) {
    m["acf_defined"] = false;
    m["outputs"] = outputs;
    m["wall_clock_ms"] = clock.ms();
    write_manifest(dir / "manifest.json", m);
    throw;
  }
  std::ostringstream ao, po;
  ao << "lag,value\n";
  po << "lag,value\n";
  for (int k = 0; k <= lag; ++k) {
    ao << k << ',' << format_double(r(k)) << '\n';
    po << k << ',' << format_double(pr(k)) << '\n';
  }
  write_file(dir / "acf.csv", ao.str());
  write_file(dir / "pacf.csv", po.str());
  outputs.push_back((dir / "acf.csv").string());
  outputs.push_back((dir / "pacf.csv").string());

  m["acf_defined"] = true;
  m["max_lag"] = lag;
  m["outputs"] = outputs;
  m["wall_clock_ms"] = clock.ms();
  write_manifest(dir / "manifest.json", m);
  return 0;
}

// ---- experiment ----

struct ExperimentArgs {
  std::string grid;
  std::string kind = "rank";
  std::string q_values = "10,20,50";
  std::string out = "adass_experiment";
};

void add_experiment(CLI::App* sub, ExperimentArgs& a) {
  sub->add_option("grid", a.grid, "key=value grid file")->required();
  sub->add_option("--kind", a.kind, "rank | cov | sensitivity");
  sub->add_option("--q-values", a.q_values, "Comma list of q for the sensitivity study");
  sub->add_option("--out", a.out, "Output directory");
}

int cmd_experiment(const ExperimentArgs& a, CLI::App* app, const Global& g, const std::vector<std::string>& args) {
  Clock clock(g.strict);
  ExperimentGrid grid = parse_grid_file(a.grid);
  if (g.strict) {
    grid.threads = 1;
  } else if (app->get_option("--threads")->count() > 0) {
    grid.threads = g.threads;
  }
  if (grid.threads < 1) throw ParameterError("--threads must be >= 1");

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::vector<std::string> outputs;
  if (a.kind == "rank") {
    auto rows = run_rank_study(grid);
    write_rank_csv((dir / "rank.csv").string(), rows);
    write_file(dir / "rank.txt", format_rank_table(rows));
    outputs = {(dir / "rank.csv").string(), (dir / "rank.txt").string()};
    std::cout << format_rank_table(rows);
  } else if (a.kind == "cov") {
    auto rows = run_cov_study(grid);
    write_cov_csv((dir / "cov.csv").string(), rows);
    write_file(dir / "cov.txt", format_cov_table(rows));
    outputs = {(dir / "cov.csv").string(), (dir / "cov.txt").string()};
    std::cout << format_cov_table(rows);
  } else if (a.kind == "sensitivity") {
    std::vector<int> qs;
    for (const auto& s : split_list(a.q_values)) {
      try {
        qs.push_back(std::stoi(s));
      } catch (const std::exception&) {
        throw ParameterError("--q-values: '" + s + "' is not an integer");
      }
    }
    auto traces = run_sensitivity_q(qs, grid);
    std::ostringstream os, txt;
    os << "q,iteration,xi\n";
    txt << "q  xi_mode\n";
    for (const auto& t : traces) {
      for (std::size_t i = 0; i < t.xi.size(); ++i) os << t.q << ',' << t.iteration[i] << ',' << t.xi[i] << '\n';
      txt << t.q << "  " << t.xi_mode << '\n';
    }
    write_file(dir / "sensitivity.csv", os.str());
    write_file(dir / "sensitivity.txt", txt.str());
    outputs = {(dir / "sensitivity.csv").string(), (dir / "sensitivity.txt").string()};
    std::cout << txt.str();
  } else {
    throw ParameterError("--kind must be rank, cov or sensitivity");
  }

  json m = base_manifest("experiment", args, g);
  m["seed"] = grid.base_seed;
  m["kind"] = a.kind;
  m["inputs"] = {a.grid};
  m["outputs"] = outputs;
  m["wall_clock_ms"] = clock.ms();
  write_manifest(dir / "manifest.json", m);
  return 0;
}

// ---- align ----

struct AlignArgs {
  std::string input;
  std::uint64_t seed = 1;
  std::string out = "adass_align";
};

void add_align(CLI::App* sub, AlignArgs& a) {
  sub->add_option("snapshots", a.input, "loadings.sftr, or a fit directory containing it")->required();
  sub->add_option("--seed", a.seed, "Seed for the pivot subsample");
  sub->add_option("--out", a.out, "Output directory");
}

int cmd_align(const AlignArgs& a, const Global& g, const std::vector<std::string>& args) {
  Clock clock(g.strict);
  fs::path in(a.input);
  if (fs::is_directory(in)) in /= "loadings.sftr";
  if (!fs::exists(in)) throw InputError("snapshot file not found: '" + in.string() + "'");
  std::vector<Matrix> snaps = read_sftr(in.string());
  if (snaps.empty()) throw InputError(in.string() + ": no snapshots");

  AlignmentResult res = align_loadings(snaps, a.seed);
  Matrix raw = Matrix::Zero(snaps.front().rows(), snaps.front().cols());
  for (const auto& s : snaps) raw += s;
  raw /= static_cast<double>(snaps.size());

  const fs::path dir(a.out);
  ensure_dir(dir);
  write_matrix_csv((dir / "consensus.csv").string(), res.consensus);
  write_matrix_csv((dir / "raw_mean.csv").string(), raw);
  write_sftr((dir / "aligned.sftr").string(), res.aligned);

  json m = base_manifest("align", args, g);
  m["seed"] = a.seed;
  m["rounds"] = res.rounds;
  m["converged"] = res.converged;
  m["active_slots"] = res.active_slots;
  m["inputs"] = {in.string()};
  m["outputs"] = {(dir / "consensus.csv").string(), (dir / "raw_mean.csv").string(), (dir / "aligned.sftr").string()};
  m["wall_clock_ms"] = clock.ms();
  write_manifest(dir / "manifest.json", m);
  std::cout << "aligned " << snaps.size() << " snapshots in " << res.rounds << " rounds\n";
  return 0;
}

// ---- replay ----

std::vector<std::string> replace_out(std::vector<std::string> argv, const std::string& out) {
  bool done = false;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--out" && i + 1 < argv.size()) {
      argv[i + 1] = out;
      done = true;
    } else if (argv[i].rfind("--out=", 0) == 0) {
      argv[i] = "--out=" + out;
      done = true;
    }
  }
  if (!done) {
    argv.push_back("--out");
    argv.push_back(out);
  }
  return argv;
}

int dispatch(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("manifest not found: '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(manifest_path + ": " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw InputError(manifest_path + ": no argv record");
  std::vector<std::string> argv = m["argv"].get<std::vector<std::string>>();
  if (!out.empty()) argv = replace_out(std::move(argv), out);
  return dispatch(std::move(argv));
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Adaptive spike-and-slab sparse factor model"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Global g;
  app.add_flag("--strict", g.strict, "Sequential, deterministic execution; timings reported as 0");
  app.add_option("--threads", g.threads, "Worker threads for experiment grids");
  app.add_option("--config", g.config, "Flat key=value file; explicit flags win");

  FitArgs fit;
  EstimateArgs est;
  SimulateArgs sim;
  DiagnoseArgs diag;
  ExperimentArgs exp;
  AlignArgs al;
  std::string replay_manifest, replay_out;

  auto* s_fit = app.add_subcommand("fit", "Run the Gibbs sampler on a CSV dataset");
  add_fit(s_fit, fit);
  auto* s_est = app.add_subcommand("estimate", "Frequentist factor-dimensionality estimators");
  add_estimate(s_est, est);
  auto* s_sim = app.add_subcommand("simulate", "Generate a synthetic dataset and its truth");
  add_simulate(s_sim, sim);
  auto* s_diag = app.add_subcommand("diagnose", "Trace, ACF and PACF data plus a posterior summary");
  add_diagnose(s_diag, diag);
  auto* s_exp = app.add_subcommand("experiment", "Run a simulation grid");
  add_experiment(s_exp, exp);
  auto* s_al = app.add_subcommand("align", "Resolve label switching in loading snapshots");
  add_align(s_al, al);
  auto* s_rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  s_rep->add_option("manifest", replay_manifest, "manifest.json")->required();
  s_rep->add_option("--out", replay_out, "Redirect outputs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::vector<std::string> effective;
  bool skip = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (skip) {
      skip = false;
      continue;
    }
    if (args[i] == "--config") {
      skip = true;
      continue;
    }
    if (args[i].rfind("--config=", 0) == 0) continue;
    effective.push_back(args[i]);
  }
  if (!g.config.empty()) {
    if (sub == s_rep) throw ParameterError("--config cannot be combined with replay");
    auto applied = apply_config(sub, g.config);
    effective.insert(effective.end(), applied.begin(), applied.end());
  }
  if (g.threads < 1) throw ParameterError("--threads must be >= 1");

  if (sub == s_fit) return cmd_fit(fit, s_fit, g, effective);
  if (sub == s_est) return cmd_estimate(est, g, effective);
  if (sub == s_sim) return cmd_simulate(sim, g, effective);
  if (sub == s_diag) return cmd_diagnose(diag, g, effective);
  if (sub == s_exp) return cmd_experiment(exp, &app, g, effective);
  if (sub == s_al) return cmd_align(al, g, effective);
  return cmd_replay(replay_manifest, replay_out);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return dispatch(std::move(args));
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace adass
