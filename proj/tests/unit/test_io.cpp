#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nfpto/io.hpp"

using namespace nfpto;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("format_full round-trips doubles at the shortest precision") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -2.5,
                   0.9999999999999999, 1e17, -1.0, 0.35}) {
    const std::string s = format_full(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_full(0.5) == "0.5");
  CHECK(format_full(0.1) == "0.1");
  CHECK(format_full(-1.0) == "-1");
  CHECK(format_full(250.0) == "250");
}

TEST_CASE("field csv round-trips bitwise") {
  TempFile f("io_field_roundtrip.csv");
  FieldFile field;
  field.nelx = 3;
  field.nely = 2;
  field.values = {0.1, 1.0 / 3.0, 1e-17, 0.9999999999999999, 0.0, 1.0};
  write_field_csv(f.path, field);
  const FieldFile back = read_field_csv(f.path);
  CHECK(back.nelx == 3);
  CHECK(back.nely == 2);
  REQUIRE(back.values.size() == field.values.size());
  for (size_t i = 0; i < field.values.size(); ++i)
    CHECK(back.values[i] == field.values[i]);

  const std::string text = slurp(f.path);
  CHECK(text.rfind("# nelx=3 nely=2\nindex,value\n0,0.1\n", 0) == 0);
}

TEST_CASE("field csv reader diagnoses malformed files with line numbers") {
  TempFile f("io_field_bad.csv");

  CHECK_THROWS_AS(read_field_csv("io_does_not_exist.csv"), ConfigError);

  spit(f.path, "# nelx=2 nely=1\nnot_the_header\n0,0.5\n1,0.5\n");
  CHECK_THROWS_WITH_AS(read_field_csv(f.path), doctest::Contains(":2"),
                       ConfigError);

  spit(f.path, "# nelx=2 nely=1\nindex,value\n0,0.5\n2,0.5\n");
  CHECK_THROWS_WITH_AS(read_field_csv(f.path),
                       doctest::Contains("expected index 1"), ConfigError);

  spit(f.path, "# nelx=2 nely=1\nindex,value\n0,0.5\n");
  CHECK_THROWS_WITH_AS(read_field_csv(f.path), doctest::Contains("2 rows"),
                       ConfigError);

  spit(f.path, "index,value\n0,0.5\n");
  CHECK_THROWS_WITH_AS(read_field_csv(f.path), doctest::Contains("nelx"),
                       ConfigError);

  spit(f.path, "# nelx=2 nely=1\nindex,value\n0,abc\n1,0.5\n");
  CHECK_THROWS_WITH_AS(read_field_csv(f.path), doctest::Contains("number"),
                       ConfigError);

  CHECK_THROWS_AS(write_field_csv("io_missing_dir/x.csv", FieldFile{}),
                  std::runtime_error);
}

TEST_CASE("density_to_file writes design rows top first, dummy rows dropped") {
  CellGrid g;
  g.nelx = 3;
  g.nely = 2;
  g.dummy_bottom = 1;
  DensityField rho;
  rho.rho.resize(g.cell_count());
  rho.log_survival.assign(g.cell_count(), 0.0);
  for (int cx = 0; cx < 3; ++cx)
    for (int cy = 0; cy < 3; ++cy)
      rho.rho[g.cell_index(cx, cy)] = cx + 10.0 * cy;

  const FieldFile f = density_to_file(g, rho);
  CHECK(f.nelx == 3);
  CHECK(f.nely == 2);
  const std::vector<double> expect = {20, 21, 22, 10, 11, 12};
  CHECK(f.values == expect);
}

TEST_CASE("file_to_cells inverts the file order on dummy-free grids") {
  CellGrid g;
  g.nelx = 4;
  g.nely = 3;
  DensityField rho;
  rho.rho.resize(g.cell_count());
  rho.log_survival.assign(g.cell_count(), 0.0);
  for (int cell = 0; cell < g.cell_count(); ++cell)
    rho.rho[cell] = 0.01 * cell;

  const auto cells = file_to_cells(g, density_to_file(g, rho));
  CHECK(cells == rho.rho);

  FieldFile wrong;
  wrong.nelx = 3;
  wrong.nely = 3;
  wrong.values.assign(9, 0.0);
  CHECK_THROWS_AS(file_to_cells(g, wrong), std::invalid_argument);

  CellGrid dummy = g;
  dummy.dummy_top = 1;
  FieldFile sized;
  sized.nelx = 4;
  sized.nely = 3;
  sized.values.assign(12, 0.0);
  CHECK_THROWS_AS(file_to_cells(dummy, sized), std::invalid_argument);
}

TEST_CASE("history csv bytes are exact and deterministic") {
  TempFile f("io_history.csv");
  OptHistory h;
  h.records.push_back({0, 1.5, 0.7, 0.84, 0.0, 0.35});
  h.records.push_back({1, 2.25, 0.5, 0.75, 4.5, 0.15});
  write_history_csv(f.path, h);
  const std::string expect =
      "iter,objective,volume_fraction,grayness,max_design_change,"
      "constraint_violation\n"
      "0,1.5,0.7,0.84,0,0.35\n"
      "1,2.25,0.5,0.75,4.5,0.15\n";
  CHECK(slurp(f.path) == expect);
  write_history_csv(f.path, h);
  CHECK(slurp(f.path) == expect);
}

TEST_CASE("pgm renders void white and solid black") {
  TempFile f("io_render.pgm");
  FieldFile field;
  field.nelx = 2;
  field.nely = 2;
  field.values = {0.0, 1.0, 0.5, 0.25};
  write_pgm(f.path, field);
  CHECK(slurp(f.path) == "P2\n2 2\n255\n255 0\n128 191\n");

  field.values = {-0.5, 1.5, 0.0, 1.0};
  write_pgm(f.path, field);
  CHECK(slurp(f.path) == "P2\n2 2\n255\n255 0\n255 0\n");
}

TEST_CASE("config lines parse values, comments, and whitespace") {
  RunConfig cfg;
  apply_config_line(cfg, "  vf = 0.4  ", "t:1");
  apply_config_line(cfg, "# a comment", "t:2");
  apply_config_line(cfg, "", "t:3");
  apply_config_line(cfg, "max_iters=200", "t:4");
  apply_config_line(cfg, "preset=inverter", "t:5");
  apply_config_line(cfg, "optimizer=pg", "t:6");
  apply_config_line(cfg, "dummy_rows=top", "t:7");
  apply_config_line(cfg, "dummy_rows_in_fe=false", "t:8");
  apply_config_line(cfg, "seed=12345", "t:9");
  CHECK(cfg.preset.vf == 0.4);
  CHECK(cfg.opt.max_iters == 200);
  CHECK(cfg.preset.preset == "inverter");
  CHECK(cfg.opt.algo == OptAlgo::projected_gradient);
  CHECK(cfg.preset.dummy_edges == DummyEdges::top);
  CHECK_FALSE(cfg.preset.dummy_rows_in_fe);
  CHECK(cfg.seed == 12345);
}

TEST_CASE("config errors carry their location and cause") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "unknown_key=3", "file.cfg:7"),
                       doctest::Contains("file.cfg:7"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "unknown_key=3", "file.cfg:7"),
                       doctest::Contains("unknown key 'unknown_key'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "just_some_text", "f:1"),
                       doctest::Contains("key=value"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "nelx=twelve", "f:2"),
                       doctest::Contains("integer"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "vf=much", "f:3"),
                       doctest::Contains("number"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "dummy_rows_in_fe=maybe", "f:4"),
                       doctest::Contains("boolean"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "dummy_rows=left", "f:5"),
                       doctest::Contains("auto|none|bottom|top|both"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "optimizer=newton", "f:6"),
                       doctest::Contains("mma|pg"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_line(cfg, "=3", "f:7"),
                       doctest::Contains("empty key"), ConfigError);
}

TEST_CASE("the resolved echo is a parseable fixed point over all keys") {
  RunConfig cfg;
  cfg.preset.preset = "mbb";
  cfg.preset.nelx = 48;
  cfg.preset.vf = 0.4;
  cfg.opt.max_iters = 321;
  cfg.opt.algo = OptAlgo::projected_gradient;
  cfg.out_dir = "results";
  cfg.seed = 99;

  const std::string echo = cfg.resolved();
  for (const auto& key : RunConfig::known_keys())
    CHECK(echo.find(key + "=") != std::string::npos);

  RunConfig back;
  std::istringstream lines(echo);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line))
    apply_config_line(back, line, "echo:" + std::to_string(++lineno));
  CHECK(back.resolved() == echo);
}

TEST_CASE("config files parse with per-line diagnostics") {
  TempFile f("io_run.cfg");
  spit(f.path,
       "# sample run\n"
       "preset=cantilever\n"
       "nelx=12\n"
       "nely=6\n"
       "\n"
       "vf=0.3\n"
       "out_dir=scratch\n");
  const RunConfig cfg = parse_config_file(f.path);
  CHECK(cfg.preset.preset == "cantilever");
  CHECK(cfg.preset.nelx == 12);
  CHECK(cfg.preset.nely == 6);
  CHECK(cfg.preset.vf == 0.3);
  CHECK(cfg.out_dir == "scratch");

  spit(f.path, "preset=cantilever\nbogus=1\n");
  CHECK_THROWS_WITH_AS(parse_config_file(f.path),
                       doctest::Contains((f.path + ":2").c_str()), ConfigError);
  CHECK_THROWS_AS(parse_config_file("io_no_such.cfg"), ConfigError);
}
