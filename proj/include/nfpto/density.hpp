#pragma once

#include <vector>

#include "nfpto/grid.hpp"

namespace nfpto {

// Design variables beta_j = ln(1 - alpha_j) <= 0, one per design cell
// (compact order, see CellGrid::design_index). beta_lb = -factor * d_interior.
struct DesignField {
  std::vector<double> beta;
  double beta_lb = -90.0;

  void validate(const CellGrid& grid) const;  // size, finiteness, bounds
};

double default_beta_lb(const NeighborhoodTopology& topo, double factor = 10.0);

// Densities over every cell (dummy rows included). log_survival keeps the
// pre-exponentiation accumulator s_i = sum_{j in D_i} beta_j A_j / A(Delta_i),
// so 1 - rho_i = exp(s_i) is available without cancellation.
struct DensityField {
  std::vector<double> rho;
  std::vector<double> log_survival;

  double survival(int cell) const;  // 1 - rho, computed from log_survival
};

// rho_i = 1 - exp(s_i) via expm1. Dummy cells contribute no beta but their
// areas stay in A(Delta_i).
DensityField density_from_beta(const DesignField& beta,
                               const NeighborhoodTopology& topo);

// d rho_i / d beta_j for design index j: -(1 - rho_i) A_j / A(Delta_i) when
// cell i lies in N_j, else 0.
double density_jacobian_entry(int cell, int design,
                              const DensityField& rho,
                              const NeighborhoodTopology& topo);

// Chain rule through the density map: g_j = sum_{i in N_j} drho_i *
// drho_i/dbeta_j. drho has one entry per cell (dummy cells included).
std::vector<double> backprop_to_beta(const std::vector<double>& drho,
                                     const DensityField& rho,
                                     const NeighborhoodTopology& topo);

// g = sum 4 rho (1 - rho) / n over design cells only.
double grayness(const DensityField& rho, const NeighborhoodTopology& topo);

struct InversionResult {
  std::vector<double> beta;        // one entry per cell (no dummy rows)
  bool feasible = true;            // beta <= 0 reproduces rho within tolerance
  std::vector<int> positive_cells; // cells demanding beta_j > 0, ascending
  int rank = 0;                    // rank of the membership matrix
  double residual = 0.0;           // max log-survival misfit of returned beta
};

// Inverse of the density map: solve C beta = b with C(i,j) = [j in D_i] and
// b_i = (A(Delta_i)/a) ln(1 - rho_i). Requires a grid without dummy rows,
// uniform areas, and rho_i < 1 - eps (throws otherwise). When C is
// invertible the solve is exact and positive solution entries flag fields no
// nonpositive beta can produce. C loses rank on some grids (at ls = 1, any
// dimension that is 2 mod 3); the solve then becomes a least-squares fit
// constrained to beta <= 0, infeasibility shows up as residual, and
// positive_cells lists cells pressed against the bound.
InversionResult beta_from_density(const std::vector<double>& rho,
                                  const NeighborhoodTopology& topo,
                                  double eps = 1e-12);

}  // namespace nfpto
