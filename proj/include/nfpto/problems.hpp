#pragma once

#include <string>
#include <vector>

#include "nfpto/fem.hpp"

namespace nfpto {

enum class ObjectiveKind { compliance, mechanism };

struct ObjectiveReport {
  double value = 0.0;
  std::vector<double> grad_beta;      // one entry per design cell
  std::vector<double> u;              // primary displacement field
  std::vector<double> v;              // adjoint field (mechanism only)
  double output_displacement = 0.0;   // output node, global +x (mechanism)
};

// I = lambda/2 u^T K u under K u = F; gradient composed through the density
// map. All grad_beta components are >= 0.
ObjectiveReport compliance_objective(const DensityField& rho,
                                     const FeModel& model,
                                     const SimpParams& simp, double lambda,
                                     const NeighborhoodTopology& topo,
                                     int load_case = 0,
                                     const SolverOptions& opts = {});

// I = -lambda F_d^T u / (u^T (K+K_a) u) with (K+K_a) u = F and the dummy load
// F_d pointing along the desired output deflection. output_displacement is
// reported in the global frame (negative = inversion when F_d points to -x).
ObjectiveReport mechanism_objective(const DensityField& rho,
                                    const FeModel& model,
                                    const SimpParams& simp, double lambda,
                                    const NeighborhoodTopology& topo,
                                    int load_case, int dummy_load_case,
                                    int output_dof,
                                    const SolverOptions& opts = {});

struct VolumeReport {
  double value = 0.0;         // sum rho_i v_i - vf * sum v_i
  double volume_fraction = 0.0;
  double total_volume = 0.0;  // sum v_i over the counted cells
  std::vector<double> grad_beta;
};

// Counted cells: design cells, plus dummy cells when include_dummy is set.
VolumeReport volume_constraint(const DensityField& rho,
                               const NeighborhoodTopology& topo, double vf,
                               bool include_dummy = true);

struct Problem {
  std::string preset;
  CellGrid grid;
  NeighborhoodTopology topo;
  FeModel model;
  ObjectiveKind kind = ObjectiveKind::compliance;
  double lambda = 1e3;
  double vf = 0.35;
  SimpParams simp;
  double beta_lb = -90.0;
  bool dummy_rows_in_volume = true;
  int load_case = 0;
  int dummy_load_case = -1;
  int output_dof = -1;
  SolverOptions solver;

  ObjectiveReport evaluate(const DensityField& rho) const;
};

enum class DummyEdges { preset_default, none, bottom, top, both };

struct PresetConfig {
  std::string preset = "cantilever";  // cantilever | mbb | inverter
  int nelx = 0;                       // 0 = preset default
  int nely = 0;
  int ls = 1;
  double vf = -1.0;                   // < 0 = preset default
  double lambda = -1.0;
  double E = 2e4;
  double nu = 0.3;
  double eta = 3.0;
  double rho_min = 1e-4;
  double beta_lb_factor = 10.0;
  double force = 1.0;
  double ka = 3.5;                    // inverter output spring
  DummyEdges dummy_edges = DummyEdges::preset_default;
  bool dummy_rows_in_fe = true;
  bool dummy_rows_in_volume = true;
  int cg_dof_threshold = 200000;
  double cg_tol = 1e-10;
};

// Throws std::invalid_argument naming the valid presets on an unknown name.
Problem make_problem(const PresetConfig& cfg);

const std::vector<std::string>& preset_names();

}  // namespace nfpto
