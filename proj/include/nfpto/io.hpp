#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfpto/optimizer.hpp"

namespace nfpto {

// Configuration / file-format problems carry exit-code-2 semantics.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar field over the design domain in file order: row-major, top row
// first, so index = (nely-1-cy)*nelx + cx.
struct FieldFile {
  int nelx = 0;
  int nely = 0;
  std::vector<double> values;
};

// Format: "# nelx=<n> nely=<n>" metadata line, "index,value" header, then one
// row per cell with full-precision values.
void write_field_csv(const std::string& path, const FieldFile& field);
FieldFile read_field_csv(const std::string& path);

// Design-domain densities in file order (dummy rows dropped).
FieldFile density_to_file(const CellGrid& grid, const DensityField& rho);
// File order -> per-cell vector on a dummy-free grid.
std::vector<double> file_to_cells(const CellGrid& grid, const FieldFile& f);

void write_history_csv(const std::string& path, const OptHistory& history);

// ASCII PGM, 0 -> white (void), 1 -> black (solid).
void write_pgm(const std::string& path, const FieldFile& field);

// Flat key=value run configuration; '#' comments; unknown keys are errors.
struct RunConfig {
  PresetConfig preset;
  OptSettings opt;
  std::string out_dir = "out";
  unsigned long long seed = 0;
  int gradcheck_samples = 50;

  static const std::vector<std::string>& known_keys();
  void set(const std::string& key, const std::string& value,
           const std::string& where);  // throws ConfigError
  std::string resolved() const;        // full key=value echo
};

RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& line,
                       const std::string& where);

std::string format_full(double v);  // shortest round-trip decimal

}  // namespace nfpto
