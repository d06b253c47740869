#include "nfpto/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nfpto {

std::string format_full(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
    fail(where, "expected a number, got '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    fail(where, "expected an integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(where, "expected a boolean, got '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_field_csv(const std::string& path, const FieldFile& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# nelx=" << field.nelx << " nely=" << field.nely << "\n";
  out << "index,value\n";
  for (size_t i = 0; i < field.values.size(); ++i)
    out << i << "," << format_full(field.values[i]) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

FieldFile read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  FieldFile f;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  size_t next_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::istringstream meta(t.substr(1));
      std::string tok;
      while (meta >> tok) {
        if (tok.rfind("nelx=", 0) == 0)
          f.nelx = static_cast<int>(parse_int(tok.substr(5), where));
        else if (tok.rfind("nely=", 0) == 0)
          f.nely = static_cast<int>(parse_int(tok.substr(5), where));
      }
      continue;
    }
    if (!header_seen) {
      if (t != "index,value") fail(where, "expected header 'index,value'");
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) fail(where, "expected 'index,value' row");
    const long long idx = parse_int(trim(t.substr(0, comma)), where);
    if (idx != static_cast<long long>(next_index))
      fail(where, "expected index " + std::to_string(next_index) + ", got " +
                      std::to_string(idx));
    f.values.push_back(parse_double(trim(t.substr(comma + 1)), where));
    ++next_index;
  }
  if (f.nelx <= 0 || f.nely <= 0)
    fail(path, "missing or invalid '# nelx=<n> nely=<n>' metadata line");
  if (!header_seen) fail(path, "missing 'index,value' header");
  if (f.values.size() != static_cast<size_t>(f.nelx) * f.nely)
    fail(path, "expected " + std::to_string(f.nelx * f.nely) +
                   " rows, got " + std::to_string(f.values.size()));
  return f;
}

FieldFile density_to_file(const CellGrid& grid, const DensityField& rho) {
  FieldFile f;
  f.nelx = grid.nelx;
  f.nely = grid.nely;
  f.values.resize(static_cast<size_t>(grid.nelx) * grid.nely);
  for (int cx = 0; cx < grid.nelx; ++cx)
    for (int dy = 0; dy < grid.nely; ++dy) {
      const int cell = grid.cell_index(cx, dy + grid.dummy_bottom);
      f.values[static_cast<size_t>(grid.nely - 1 - dy) * grid.nelx + cx] =
          rho.rho[cell];
    }
  return f;
}

std::vector<double> file_to_cells(const CellGrid& grid, const FieldFile& f) {
  if (grid.dummy_bottom != 0 || grid.dummy_top != 0)
    throw std::invalid_argument("file_to_cells: dummy rows unsupported");
  if (f.nelx != grid.nelx || f.nely != grid.nely)
    throw std::invalid_argument("file_to_cells: dimension mismatch");
  std::vector<double> cells(grid.cell_count());
  for (int cx = 0; cx < grid.nelx; ++cx)
    for (int cy = 0; cy < grid.nely; ++cy)
      cells[grid.cell_index(cx, cy)] =
          f.values[static_cast<size_t>(grid.nely - 1 - cy) * grid.nelx + cx];
  return cells;
}

void write_history_csv(const std::string& path, const OptHistory& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,objective,volume_fraction,grayness,max_design_change,"
         "constraint_violation\n";
  for (const auto& r : history.records)
    out << r.iter << "," << format_full(r.objective) << ","
        << format_full(r.volume_fraction) << "," << format_full(r.grayness)
        << "," << format_full(r.max_design_change) << ","
        << format_full(r.constraint_violation) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_pgm(const std::string& path, const FieldFile& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P2\n" << field.nelx << " " << field.nely << "\n255\n";
  for (int r = 0; r < field.nely; ++r) {
    for (int c = 0; c < field.nelx; ++c) {
      const double rho =
          field.values[static_cast<size_t>(r) * field.nelx + c];
      const double clamped = std::min(1.0, std::max(0.0, rho));
      const int pix = static_cast<int>(std::lround((1.0 - clamped) * 255.0));
      out << pix << (c + 1 == field.nelx ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "preset", "nelx", "nely", "ls", "vf", "lambda", "eta", "rho_min", "E",
      "nu", "beta_lb_factor", "force", "ka", "dummy_rows", "dummy_rows_in_fe",
      "dummy_rows_in_volume", "cg_dof_threshold", "cg_tol", "optimizer",
      "max_iters", "move_limit", "design_change_tol", "kkt_tol",
      "history_stride", "initial_rho", "out_dir", "seed", "gradcheck_samples"};
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& where) {
  if (key == "preset") preset.preset = value;
  else if (key == "nelx") preset.nelx = static_cast<int>(parse_int(value, where));
  else if (key == "nely") preset.nely = static_cast<int>(parse_int(value, where));
  else if (key == "ls") preset.ls = static_cast<int>(parse_int(value, where));
  else if (key == "vf") preset.vf = parse_double(value, where);
  else if (key == "lambda") preset.lambda = parse_double(value, where);
  else if (key == "eta") preset.eta = parse_double(value, where);
  else if (key == "rho_min") preset.rho_min = parse_double(value, where);
  else if (key == "E") preset.E = parse_double(value, where);
  else if (key == "nu") preset.nu = parse_double(value, where);
  else if (key == "beta_lb_factor")
    preset.beta_lb_factor = parse_double(value, where);
  else if (key == "force") preset.force = parse_double(value, where);
  else if (key == "ka") preset.ka = parse_double(value, where);
  else if (key == "dummy_rows") {
    if (value == "auto") preset.dummy_edges = DummyEdges::preset_default;
    else if (value == "none") preset.dummy_edges = DummyEdges::none;
    else if (value == "bottom") preset.dummy_edges = DummyEdges::bottom;
    else if (value == "top") preset.dummy_edges = DummyEdges::top;
    else if (value == "both") preset.dummy_edges = DummyEdges::both;
    else fail(where, "dummy_rows must be auto|none|bottom|top|both");
  } else if (key == "dummy_rows_in_fe")
    preset.dummy_rows_in_fe = parse_bool(value, where);
  else if (key == "dummy_rows_in_volume")
    preset.dummy_rows_in_volume = parse_bool(value, where);
  else if (key == "cg_dof_threshold")
    preset.cg_dof_threshold = static_cast<int>(parse_int(value, where));
  else if (key == "cg_tol") preset.cg_tol = parse_double(value, where);
  else if (key == "optimizer") {
    if (value == "mma") opt.algo = OptAlgo::mma;
    else if (value == "pg") opt.algo = OptAlgo::projected_gradient;
    else fail(where, "optimizer must be mma|pg");
  } else if (key == "max_iters")
    opt.max_iters = static_cast<int>(parse_int(value, where));
  else if (key == "move_limit") opt.move_limit = parse_double(value, where);
  else if (key == "design_change_tol")
    opt.design_change_tol = parse_double(value, where);
  else if (key == "kkt_tol") opt.kkt_tol = parse_double(value, where);
  else if (key == "history_stride")
    opt.history_stride = static_cast<int>(parse_int(value, where));
  else if (key == "initial_rho") opt.initial_rho = parse_double(value, where);
  else if (key == "out_dir") out_dir = value;
  else if (key == "seed")
    seed = static_cast<unsigned long long>(parse_int(value, where));
  else if (key == "gradcheck_samples")
    gradcheck_samples = static_cast<int>(parse_int(value, where));
  else
    fail(where, "unknown key '" + key + "'");
}

std::string RunConfig::resolved() const {
  std::ostringstream out;
  out << "preset=" << preset.preset << "\n";
  out << "nelx=" << preset.nelx << "\n";
  out << "nely=" << preset.nely << "\n";
  out << "ls=" << preset.ls << "\n";
  out << "vf=" << format_full(preset.vf) << "\n";
  out << "lambda=" << format_full(preset.lambda) << "\n";
  out << "eta=" << format_full(preset.eta) << "\n";
  out << "rho_min=" << format_full(preset.rho_min) << "\n";
  out << "E=" << format_full(preset.E) << "\n";
  out << "nu=" << format_full(preset.nu) << "\n";
  out << "beta_lb_factor=" << format_full(preset.beta_lb_factor) << "\n";
  out << "force=" << format_full(preset.force) << "\n";
  out << "ka=" << format_full(preset.ka) << "\n";
  const char* edges = "auto";
  switch (preset.dummy_edges) {
    case DummyEdges::preset_default: edges = "auto"; break;
    case DummyEdges::none: edges = "none"; break;
    case DummyEdges::bottom: edges = "bottom"; break;
    case DummyEdges::top: edges = "top"; break;
    case DummyEdges::both: edges = "both"; break;
  }
  out << "dummy_rows=" << edges << "\n";
  out << "dummy_rows_in_fe=" << (preset.dummy_rows_in_fe ? "true" : "false")
      << "\n";
  out << "dummy_rows_in_volume="
      << (preset.dummy_rows_in_volume ? "true" : "false") << "\n";
  out << "cg_dof_threshold=" << preset.cg_dof_threshold << "\n";
  out << "cg_tol=" << format_full(preset.cg_tol) << "\n";
  out << "optimizer=" << (opt.algo == OptAlgo::mma ? "mma" : "pg") << "\n";
  out << "max_iters=" << opt.max_iters << "\n";
  out << "move_limit=" << format_full(opt.move_limit) << "\n";
  out << "design_change_tol=" << format_full(opt.design_change_tol) << "\n";
  out << "kkt_tol=" << format_full(opt.kkt_tol) << "\n";
  out << "history_stride=" << opt.history_stride << "\n";
  out << "initial_rho=" << format_full(opt.initial_rho) << "\n";
  out << "out_dir=" << out_dir << "\n";
  out << "seed=" << seed << "\n";
  out << "gradcheck_samples=" << gradcheck_samples << "\n";
  return out.str();
}

void apply_config_line(RunConfig& cfg, const std::string& line,
                       const std::string& where) {
  const std::string t = trim(line);
  if (t.empty() || t[0] == '#') return;
  const auto eq = t.find('=');
  if (eq == std::string::npos)
    fail(where, "expected key=value, got '" + t + "'");
  const std::string key = trim(t.substr(0, eq));
  const std::string value = trim(t.substr(eq + 1));
  if (key.empty()) fail(where, "empty key");
  cfg.set(key, value, where);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open config file");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    apply_config_line(cfg, line, path + ":" + std::to_string(lineno));
  }
  return cfg;
}

}  // namespace nfpto
