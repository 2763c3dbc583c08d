#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adass/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"adass"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  auto* old_out = std::cout.rdbuf(o.rdbuf());
  auto* old_err = std::cerr.rdbuf(e.rdbuf());
  Run r;
  r.code = adass::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = o.str();
  r.err = e.str();
  return r;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

const std::string kData = std::string(ADASS_DATA_DIR) + "/diagonal_pattern.csv";

struct Scratch {
  fs::path dir = fs::temp_directory_path() / "adass_cli_test";
  Scratch() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("fit on the bundled dataset with defaults keeps 500 samples") {
  Scratch s;
  const Run r = cli({"fit", kData, "--out", s.at("fit")});
  REQUIRE(r.code == 0);
  CHECK(count_lines(s.dir / "fit" / "trace.csv") == 501);
  for (const char* f : {"summary.json", "manifest.json", "sigma_mean.sftr", "psi_mean.csv"})
    CHECK(fs::exists(s.dir / "fit" / f));
  CHECK_FALSE(fs::exists(s.dir / "fit" / "manifest.json.tmp"));
}

TEST_CASE("input errors exit with code 2") {
  Scratch s;
  const Run missing = cli({"fit", s.at("nope.csv"), "--out", s.at("x")});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
  CHECK(cli({"fit", kData, "--q", "0", "--out", s.at("x")}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"estimate", kData, "--methods", "er,zz"}).code == 2);
  std::ofstream(s.at("ragged.csv")) << "1,2\n3\n";
  const Run ragged = cli({"estimate", s.at("ragged.csv")});
  CHECK(ragged.code == 2);
  CHECK(ragged.err.find(":2:") != std::string::npos);
}

TEST_CASE("estimate emits one row per method") {
  const Run r = cli({"estimate", kData, "--methods", "er,gr"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, a, b, extra;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  CHECK(header == "method,r_hat,r_max,runtime_ms");
  CHECK(a.rfind("ER,", 0) == 0);
  CHECK(b.rfind("GR,", 0) == 0);
  CHECK(b.find(",10,") != std::string::npos);
  CHECK_FALSE(std::getline(in, extra));
}

TEST_CASE("diagnose: constant series is a numerical failure") {
  Scratch s;
  std::ofstream(s.at("t.csv")) << "iteration,xi,support_size,psi\n1,3,5,1\n2,3,5,1.1\n3,3,6,0.9\n";
  const Run r = cli({"diagnose", s.at("t.csv"), "--out", s.at("d")});
  CHECK(r.code == 1);
  CHECK(r.err.find("undefined") != std::string::npos);
  CHECK(fs::exists(s.dir / "d" / "summary.json"));
  CHECK(cli({"diagnose", s.at("t.csv"), "--series", "psi", "--out", s.at("d2")}).code == 0);
  CHECK(count_lines(s.dir / "d2" / "acf.csv") == 4);
}

TEST_CASE("config file fills unset flags; explicit flags win") {
  Scratch s;
  std::ofstream(s.at("run.cfg")) << "# short chain\nn_iter=200\nburn_in=100\nthin=10\nseed=3\n";
  REQUIRE(cli({"--config", s.at("run.cfg"), "fit", kData, "--out", s.at("a")}).code == 0);
  CHECK(count_lines(s.dir / "a" / "trace.csv") == 11);
  REQUIRE(cli({"fit", kData, "--config", s.at("run.cfg"), "--thin", "20", "--out", s.at("b")}).code == 0);
  CHECK(count_lines(s.dir / "b" / "trace.csv") == 6);
  std::ofstream(s.at("bad.cfg")) << "no_such_key=1\n";
  CHECK(cli({"fit", kData, "--config", s.at("bad.cfg"), "--out", s.at("c")}).code == 2);
}

TEST_CASE("simulate, align and replay") {
  Scratch s;
  REQUIRE(cli({"simulate", "--strict", "--design", "signed_two", "--n", "30", "--p", "20", "--s", "5", "--r", "2",
               "--out", s.at("sim")})
              .code == 0);
  CHECK(count_lines(s.dir / "sim.csv") == 31);
  REQUIRE(cli({"fit", s.at("sim.csv"), "--strict", "--snapshots", "--n-iter", "120", "--burn-in", "20", "--thin",
               "5", "--out", s.at("fit")})
              .code == 0);
  REQUIRE(cli({"align", s.at("fit"), "--out", s.at("al")}).code == 0);
  CHECK(fs::exists(s.dir / "al" / "consensus.csv"));
  REQUIRE(cli({"replay", s.at("fit/manifest.json"), "--out", s.at("fit2")}).code == 0);
  std::ifstream a(s.dir / "fit" / "trace.csv"), b(s.dir / "fit2" / "trace.csv");
  std::stringstream x, y;
  x << a.rdbuf();
  y << b.rdbuf();
  CHECK(x.str() == y.str());
}
