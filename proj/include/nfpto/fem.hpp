#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <utility>
#include <vector>

#include "nfpto/density.hpp"
#include "nfpto/grid.hpp"

namespace nfpto {

struct SimpParams {
  double eta = 3.0;        // penalization exponent, >= 1
  double rho_min = 1e-4;   // stiffness floor, in (0, 1)
};

// {rho^eta (1 - rho_min) + rho_min}
double simp_factor(double rho, const SimpParams& simp);

// Bilinear quad, plane strain, 2x2 Gauss, unit square element.
// Node/dof order: (bl, br, tr, tl) x (ux, uy). Requires E > 0, nu < 0.5.
Eigen::Matrix<double, 8, 8> element_stiffness_q4(double E, double nu);

struct PointLoad {
  int dof = 0;
  double value = 0.0;
};

// Q4 mesh over the grid (dummy rows included). Node (ix, iy) with iy = 0 at
// the bottom; node id = ix * (total_rows()+1) + iy; dofs (2n, 2n+1) = (ux, uy).
struct FeModel {
  CellGrid grid;
  double E = 2e4;
  double nu = 0.3;
  Eigen::Matrix<double, 8, 8> K0;
  std::vector<int> fixed_dofs;                 // sorted, unique; u = 0 there
  std::vector<std::vector<PointLoad>> load_cases;
  std::vector<PointLoad> diag_springs;         // external artificial springs
  bool dummy_rows_in_fe = true;                // false: dummy cells at rho_min

  int node_rows() const { return grid.total_rows() + 1; }
  int node_cols() const { return grid.nelx + 1; }
  int node_index(int ix, int iy) const { return ix * node_rows() + iy; }
  int node_count() const { return node_cols() * node_rows(); }
  int dof_count() const { return 2 * node_count(); }

  std::array<int, 8> element_dofs(int cell) const;
  Eigen::VectorXd dense_load(int load_case) const;
};

FeModel make_fe_model(const CellGrid& grid, double E = 2e4, double nu = 0.3);

struct SolverOptions {
  int cg_dof_threshold = 200000;  // direct factorization below, PCG above
  double cg_tol = 1e-10;          // relative residual for the PCG path
};

// Factorized (or PCG-ready) reduced stiffness; solves fill fixed dofs with 0.
class StiffnessSystem {
 public:
  StiffnessSystem(const FeModel& model, const DensityField& rho,
                  const SimpParams& simp, const SolverOptions& opts = {});
  ~StiffnessSystem();
  StiffnessSystem(StiffnessSystem&&) noexcept;
  StiffnessSystem& operator=(StiffnessSystem&&) noexcept;

  // Enforces ||K u - F|| <= 1e-8 ||F|| on free dofs (one refinement retry,
  // then throws with the residual and solver detail).
  Eigen::VectorXd solve(const Eigen::VectorXd& load) const;

  int free_dof_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper: factor once, solve one load case.
std::vector<double> assemble_and_solve(const FeModel& model,
                                       const DensityField& rho,
                                       const SimpParams& simp,
                                       int load_case = 0,
                                       const SolverOptions& opts = {});

// e_i = u_i^T K0 u_i per cell, unscaled by SIMP.
std::vector<double> element_energies(const FeModel& model,
                                     const Eigen::VectorXd& u);

// y = K(rho) x over all dofs (fixed dofs not eliminated); springs included.
Eigen::VectorXd apply_stiffness(const FeModel& model, const DensityField& rho,
                                const SimpParams& simp,
                                const Eigen::VectorXd& x);

}  // namespace nfpto
