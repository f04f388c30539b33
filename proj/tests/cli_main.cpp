#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ssip/csv.hpp"
#include "ssip/rng.hpp"
#include "ssip/sim.hpp"

namespace fs = std::filesystem;

namespace {

int run_tool(const std::string& args) {
  const std::string cmd = std::string(SSIP_TOOL_PATH) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_scratch") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
};

void write_gaussian_sim_csv(const std::string& path, std::uint64_t seed) {
  const auto sim = ssip::simulate_gaussian_grid(seed);
  std::ofstream out(path);
  out << "region_id,y,x1,x2\n";
  for (int i = 0; i < 9; ++i) {
    const auto& r = sim.regions[static_cast<std::size_t>(i)];
    for (int k = 0; k < r.m(); ++k) {
      out << i << "," << ssip::format_double(r.y(k)) << "," << ssip::format_double(r.X(k, 1)) << ","
          << ssip::format_double(r.X(k, 2)) << "\n";
    }
  }
}

}  // namespace

TEST_CASE("fit command produces the documented artifacts") {
  TempDir dir("fit");
  write_gaussian_sim_csv((dir.path / "data.csv").string(), 5);
  const std::string out = (dir.path / "out").string();
  const int rc = run_tool("fit --engine gaussian --input " + (dir.path / "data.csv").string() +
                          " --grid 3 3 --iterations 400 --seed 3 --out " + out);
  CHECK(rc == 0);
  CHECK(fs::exists(out + "/summary.csv"));
  CHECK(fs::exists(out + "/inclusion.csv"));
  CHECK(fs::exists(out + "/labels.csv"));
  CHECK(fs::exists(out + "/manifest.json"));

  // 9 regions x 3 covariates plus header and hash line
  const auto summary = ssip::read_csv(out + "/summary.csv");
  CHECK(summary.rows.size() == 27);
  CHECK(summary.column("incl_prob") >= 0);

  // rerun with the same config: byte-identical summaries
  const std::string out2 = (dir.path / "out2").string();
  const int rc2 = run_tool("fit --engine gaussian --input " + (dir.path / "data.csv").string() +
                           " --grid 3 3 --iterations 400 --seed 3 --out " + out2);
  CHECK(rc2 == 0);
  CHECK(slurp(out + "/summary.csv") == slurp(out2 + "/summary.csv"));
  CHECK(slurp(out + "/inclusion.csv") == slurp(out2 + "/inclusion.csv"));
}

TEST_CASE("missing input fails before sampling with a machine-readable record") {
  TempDir dir("missing");
  const int rc = run_tool("fit --engine gaussian --input no_such_file.csv --grid 3 3 --out " +
                          (dir.path / "out").string());
  CHECK(rc != 0);
  const auto err = slurp("cli_stderr.txt");
  CHECK(err.find("\"error\"") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "out" / "summary.csv"));
}

TEST_CASE("invalid run settings are rejected at validation") {
  TempDir dir("badrun");
  write_gaussian_sim_csv((dir.path / "data.csv").string(), 6);
  const int rc = run_tool("fit --engine gaussian --input " + (dir.path / "data.csv").string() +
                          " --grid 3 3 --iterations 100 --burn-in 100 --out " +
                          (dir.path / "out").string());
  CHECK(rc != 0);
  CHECK(slurp("cli_stderr.txt").find("error") != std::string::npos);
}

TEST_CASE("graph-check validates edge lists") {
  TempDir dir("graph");
  {
    std::ofstream edges(dir.path / "edges.txt");
    edges << "# two regions\n0 1\n";
  }
  CHECK(run_tool("graph-check --edges " + (dir.path / "edges.txt").string()) == 0);
  const auto text = slurp("cli_stdout.txt");
  CHECK(text.find("regions: 2") != std::string::npos);
  CHECK(text.find("components: 1") != std::string::npos);

  {
    std::ofstream edges(dir.path / "bad.txt");
    edges << "0 0\n";
  }
  CHECK(run_tool("graph-check --edges " + (dir.path / "bad.txt").string()) != 0);
}

TEST_CASE("crc command: design report, estimates, aggregation") {
  TempDir dir("crc");
  // small synthetic capture file over a 2x2 grid, K = 3
  {
    std::ofstream out(dir.path / "captures.csv");
    out << "region_id,time,pattern\n";
    ssip::Rng rng(9);
    for (int region = 0; region < 4; ++region) {
      for (int k = 0; k < 40; ++k) {
        const int pat = 1 + static_cast<int>(rng.next_u64() % 7);
        out << region << ",2001," << ((pat >> 2) & 1) << ((pat >> 1) & 1) << (pat & 1) << "\n";
      }
    }
  }
  {
    std::ofstream groups(dir.path / "groups.csv");
    groups << "region_id,group\n0,north\n1,north\n2,south\n3,south\n";
  }
  const std::string out = (dir.path / "out").string();
  const int rc = run_tool("crc --input " + (dir.path / "captures.csv").string() +
                          " --grid 2 2 --max-order 2 --iterations 500 --seed 2 --out " + out +
                          " --agg " + (dir.path / "groups.csv").string());
  CHECK(rc == 0);
  const auto text = slurp("cli_stdout.txt");
  CHECK(text.find("design: 7 columns") != std::string::npos);  // 1 + 3 + 3

  const auto unseen = ssip::read_csv(out + "/unseen.csv");
  CHECK(unseen.rows.size() == 4);  // 4 regions x 1 time
  CHECK(unseen.column("flag_sparse") >= 0);

  const auto agg = ssip::read_csv(out + "/aggregated_unseen.csv");
  CHECK(agg.rows.size() == 2);  // 2 groups x 1 time

  const auto design = ssip::read_csv(out + "/design_columns.csv");
  CHECK(design.rows.size() == 7);
}

TEST_CASE("replicate command: validation and report shape") {
  CHECK(run_tool("replicate --study gaussian") != 0);  // no seeds

  TempDir dir("rep");
  const std::string out = (dir.path / "out").string();
  const int rc =
      run_tool("replicate --study gaussian --seeds 1 2 --iterations 250 --out " + out);
  CHECK(rc == 0);
  const auto report = ssip::read_csv(out + "/report.csv");
  CHECK(report.column("mse_ssip") >= 0);
  CHECK(report.column("mse_aic") >= 0);
  CHECK(report.rows.size() == 3);  // 2 seeds + median summary row
  const auto longf = ssip::read_csv(out + "/long.csv");
  CHECK(longf.rows.size() == 6);  // 2 seeds x 3 methods
}

TEST_CASE("config file provides defaults, flags win") {
  TempDir dir("cfg");
  write_gaussian_sim_csv((dir.path / "data.csv").string(), 8);
  {
    std::ofstream cfg(dir.path / "run.ini");
    cfg << "iterations=300\nseed=4\n";
  }
  const std::string out1 = (dir.path / "o1").string();
  const std::string out2 = (dir.path / "o2").string();
  int rc = run_tool("fit --engine gaussian --input " + (dir.path / "data.csv").string() +
                    " --grid 3 3 --config " + (dir.path / "run.ini").string() + " --out " + out1);
  CHECK(rc == 0);
  // same settings spelled out fully
  rc = run_tool("fit --engine gaussian --input " + (dir.path / "data.csv").string() +
                " --grid 3 3 --iterations 300 --seed 4 --out " + out2);
  CHECK(rc == 0);
  CHECK(slurp(out1 + "/summary.csv") == slurp(out2 + "/summary.csv"));
}
