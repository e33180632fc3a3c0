#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "epidiff/io.hpp"
#include "epidiff/model.hpp"
#include "epidiff/solver.hpp"

using namespace epidiff;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "epidiff_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

Trajectory small_run() {
  ModelParams p(10.0, 0.5);
  auto grid = Grid::build(16);
  Field u0 = Field::from_function(grid, [](double x) { return x * (1.0 - x) + 0.1; });
  EvolveConfig cfg;
  cfg.form = OperatorForm::p_form;
  cfg.dt = 1e-2;
  cfg.t_end = 0.05;
  cfg.snapshot_every = 1;
  cfg.config_hash = 5u;
  return evolve(u0, p, cfg);
}

}  // namespace

TEST_CASE("hash matches the reference FNV-1a vectors") {
  CHECK(fnv1a_hash("") == 14695981039346656037ull);
  CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a_hash("cells=200\ndt=0.001\n") == 0x97e84591ebf3a891ull);
}

TEST_CASE("canonical config string is sorted and hash-stable") {
  std::map<std::string, std::string> kv{{"dt", "0.001"}, {"cells", "200"}};
  CHECK(canonical_config_string(kv) == "cells=200\ndt=0.001\n");
  CHECK(fnv1a_hash(canonical_config_string(kv)) == 0x97e84591ebf3a891ull);
}

TEST_CASE("atomic write replaces the target and leaves no temp file") {
  const auto path = (temp_dir() / "atomic.txt").string();
  atomic_write(path, "first");
  atomic_write(path, "second");
  CHECK(slurp(path) == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("density CSV round-trips bit-for-bit and rebuilds the grid") {
  Trajectory traj = small_run();
  const auto path = (temp_dir() / "density.csv").string();
  write_density_csv(path, traj);

  Trajectory back = read_density_csv(path);
  REQUIRE(back.times.size() == traj.times.size());
  REQUIRE(back.grid->n_cells == traj.grid->n_cells);
  CHECK(back.grid->x_lo == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(back.grid->x_hi == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    CHECK(back.times[k] == traj.times[k]);  // %.17g round-trips doubles exactly
    for (int i = 0; i < traj.grid->n_cells; ++i)
      CHECK(back.snapshots[k][i] == traj.snapshots[k][i]);
  }

  // Re-serialization is byte identical: deterministic output.
  const auto path2 = (temp_dir() / "density2.csv").string();
  write_density_csv(path2, traj);
  CHECK(slurp(path) == slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("density CSV reader rejects malformed inputs") {
  const auto path = (temp_dir() / "bad.csv").string();
  spit(path, "wrong,header\n1,2,3\n");
  CHECK_THROWS_AS(read_density_csv(path), std::runtime_error);
  spit(path, "t,x,value\n0,0.1\n");
  CHECK_THROWS_AS(read_density_csv(path), std::runtime_error);
  spit(path, "t,x,value\n");
  CHECK_THROWS_AS(read_density_csv(path), std::runtime_error);
  // Non-uniform x column.
  spit(path,
       "t,x,value\n0,0.1,1\n0,0.2,1\n0,0.25,1\n0,0.5,1\n");
  CHECK_THROWS_AS(read_density_csv(path), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_density_csv((temp_dir() / "missing.csv").string()),
                  std::runtime_error);
}

TEST_CASE("ledger CSV lists every step") {
  Trajectory traj = small_run();
  const auto path = (temp_dir() / "ledger.csv").string();
  write_ledger_csv(path, traj);
  std::istringstream in(slurp(path));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "step,t,mass");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(traj.mass_ledger.size()));
  std::filesystem::remove(path);
}

TEST_CASE("eigenvalue table records the asymptote ratio") {
  const auto path = (temp_dir() / "eigen.csv").string();
  write_eigen_csv(path, {1.0, 4.0}, {2.0, 2.0});
  const std::string text = slurp(path);
  CHECK(text.rfind("k,lambda,asymptote,ratio\n", 0) == 0);
  CHECK(text.find("0,1,2,0.5") != std::string::npos);
  CHECK(text.find("1,4,2,2") != std::string::npos);
  CHECK_THROWS_AS(write_eigen_csv(path, {1.0}, {}), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("config files: comments, blanks, and malformed lines") {
  const auto path = (temp_dir() / "run.cfg").string();
  spit(path,
       "# run configuration\n"
       "cells 200\n"
       "\n"
       "dt 0.001   # implicit step\n"
       "r0 2\n");
  auto kv = read_config_file(path);
  CHECK(kv.size() == 3);
  CHECK(kv.at("cells") == "200");
  CHECK(kv.at("dt") == "0.001");
  CHECK(kv.at("r0") == "2");

  spit(path, "cells\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(read_config_file(path)),
                       doctest::Contains("line 1"), std::runtime_error);
  spit(path, "cells 200 300\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(read_config_file(path)),
                       doctest::Contains("trailing"), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_config_file((temp_dir() / "nope.cfg").string()),
                  std::runtime_error);
}

TEST_CASE("SVG plots are well-formed and handle log scales") {
  const auto path = (temp_dir() / "plot.svg").string();
  SvgSeries a{{0.0, 1.0, 2.0}, {1.0, 0.1, 0.01}, "decay"};
  SvgSeries b{{0.0, 1.0, 2.0}, {0.0, 2.0, 4.0}, "growth"};  // y=0 dropped on log axis
  write_svg_plot(path, "norms", "t", "value", {a, b}, /*log_y=*/true);
  const std::string svg = slurp(path);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
    ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.find("decay") != std::string::npos);
  CHECK(svg.find("growth") != std::string::npos);
  CHECK(svg.find("norms") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("manifest lists artifacts with their true sizes") {
  const auto dir = temp_dir();
  const auto art1 = (dir / "a.csv").string();
  const auto art2 = (dir / "b.svg").string();
  atomic_write(art1, "t,x,value\n0,0.5,1\n");
  atomic_write(art2, "<svg></svg>\n");
  const auto path = (dir / "manifest.json").string();
  write_manifest(path, "evolve", 0xdeadbeefull, {art1, art2});

  nlohmann::json j = nlohmann::json::parse(slurp(path));
  CHECK(j.at("version") == 1);
  CHECK(j.at("subcommand") == "evolve");
  CHECK(j.at("config_hash") == "00000000deadbeef");
  REQUIRE(j.at("files").size() == 2);
  CHECK(j["files"][0]["name"] == "a.csv");
  CHECK(j["files"][0]["size"].get<std::uint64_t>() ==
        std::filesystem::file_size(art1));
  CHECK(j["files"][1]["name"] == "b.svg");
  std::filesystem::remove(art1);
  std::filesystem::remove(art2);
  std::filesystem::remove(path);
}
