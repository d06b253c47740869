#include "nfpto/density.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nfpto {

void DesignField::validate(const CellGrid& grid) const {
  if (static_cast<int>(beta.size()) != grid.design_count())
    throw std::invalid_argument(
        "design field: expected " + std::to_string(grid.design_count()) +
        " entries, got " + std::to_string(beta.size()));
  if (!(beta_lb < 0.0))
    throw std::invalid_argument("design field: beta_lb must be negative");
  for (size_t j = 0; j < beta.size(); ++j) {
    const double b = beta[j];
    if (!std::isfinite(b) || b > 0.0 || b < beta_lb)
      throw std::invalid_argument(
          "design field: beta[" + std::to_string(j) +
          "] outside [beta_lb, 0]: " + std::to_string(b));
  }
}

double default_beta_lb(const NeighborhoodTopology& topo, double factor) {
  return -factor * topo.d_interior;
}

double DensityField::survival(int cell) const {
  return std::exp(log_survival[cell]);
}

DensityField density_from_beta(const DesignField& beta,
                               const NeighborhoodTopology& topo) {
  const CellGrid& grid = topo.grid;
  beta.validate(grid);

  const int n = grid.cell_count();
  DensityField out;
  out.rho.resize(n);
  out.log_survival.resize(n);
  const double a = grid.cell_area;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : topo.members_of(i)) {
      const int dj = grid.design_index(j);
      if (dj >= 0) s += beta.beta[dj] * a;
    }
    s /= topo.delta_area[i];
    out.log_survival[i] = s;
    out.rho[i] = -std::expm1(s);
  }
  return out;
}

double density_jacobian_entry(int cell, int design,
                              const DensityField& rho,
                              const NeighborhoodTopology& topo) {
  const CellGrid& grid = topo.grid;
  if (design < 0 || design >= grid.design_count())
    throw std::invalid_argument("jacobian: design index out of range");
  const int jc = grid.design_cell(design);
  if (!topo.contains(jc, cell)) return 0.0;  // N_j == D_j for square windows
  return -std::exp(rho.log_survival[cell]) * grid.cell_area /
         topo.delta_area[cell];
}

std::vector<double> backprop_to_beta(const std::vector<double>& drho,
                                     const DensityField& rho,
                                     const NeighborhoodTopology& topo) {
  const CellGrid& grid = topo.grid;
  if (static_cast<int>(drho.size()) != grid.cell_count())
    throw std::invalid_argument("backprop: drho must cover every cell");

  std::vector<double> g(grid.design_count());
  const double a = grid.cell_area;
  for (int j = 0; j < grid.design_count(); ++j) {
    const int jc = grid.design_cell(j);
    double acc = 0.0;
    for (int i : topo.members_of(jc))
      acc += drho[i] * (-std::exp(rho.log_survival[i])) / topo.delta_area[i];
    g[j] = acc * a;
  }
  return g;
}

double grayness(const DensityField& rho, const NeighborhoodTopology& topo) {
  const CellGrid& grid = topo.grid;
  double acc = 0.0;
  for (int j = 0; j < grid.design_count(); ++j) {
    const int cell = grid.design_cell(j);
    const double surv = std::exp(rho.log_survival[cell]);
    acc += 4.0 * (-std::expm1(rho.log_survival[cell])) * surv;
  }
  return acc / grid.design_count();
}

namespace {

// min ||A x - y||_2 subject to x >= 0 (Lawson-Hanson active set). Subproblems
// use a rank-revealing solve so dependent columns of A cannot stall the loop;
// the iteration guard bounds pathological cycling and the caller judges the
// result by its residual either way.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(A.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<int> passive;
  std::vector<char> in_passive(n, 0);
  Eigen::VectorXd w = A.transpose() * y;
  const double w_tol = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());

  const auto solve_passive = [&] {
    Eigen::MatrixXd ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
    for (size_t k = 0; k < passive.size(); ++k) ap.col(k) = A.col(passive[k]);
    return ap.completeOrthogonalDecomposition().solve(y).eval();
  };

  for (int guard = 30 * n + 100; guard > 0; --guard) {
    int enter = -1;
    double best = w_tol;
    for (int j = 0; j < n; ++j)
      if (!in_passive[j] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    if (enter < 0) break;
    passive.push_back(enter);
    in_passive[enter] = 1;

    Eigen::VectorXd z = solve_passive();
    while (z.size() > 0 && z.minCoeff() <= 0.0) {
      double alpha = 1.0;
      for (Eigen::Index k = 0; k < z.size(); ++k)
        if (z[k] <= 0.0) {
          const double xj = x[passive[k]];
          alpha = std::min(alpha, xj / (xj - z[k]));
        }
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        const int j = passive[k];
        x[j] += alpha * (z[k] - x[j]);
      }
      const double drop_tol = 1e-14 * std::max(1.0, x.maxCoeff());
      std::vector<int> keep;
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        const int j = passive[k];
        if (z[k] <= 0.0 && x[j] <= drop_tol) {
          x[j] = 0.0;
          in_passive[j] = 0;
        } else {
          keep.push_back(j);
        }
      }
      passive = std::move(keep);
      if (passive.empty()) break;
      z = solve_passive();
    }
    for (size_t k = 0; k < passive.size(); ++k) x[passive[k]] = z[k];
    w.noalias() = A.transpose() * (y - A * x);
  }
  return x;
}

}  // namespace

InversionResult beta_from_density(const std::vector<double>& rho,
                                  const NeighborhoodTopology& topo,
                                  double eps) {
  const CellGrid& grid = topo.grid;
  if (grid.dummy_bottom != 0 || grid.dummy_top != 0)
    throw std::invalid_argument("inverse: grids with dummy rows unsupported");
  const int n = grid.cell_count();
  if (static_cast<int>(rho.size()) != n)
    throw std::invalid_argument("inverse: rho must cover every cell");

  Eigen::VectorXd b(n);
  double s_scale = 1.0;
  for (int i = 0; i < n; ++i) {
    const double r = rho[i];
    if (!(r >= 0.0) || r > 1.0 - eps)
      throw std::domain_error(
          "inverse: rho[" + std::to_string(i) + "] = " + std::to_string(r) +
          " outside [0, 1-" + std::to_string(eps) + "]");
    b[i] = (topo.delta_area[i] / grid.cell_area) * std::log1p(-r);
    s_scale = std::max(s_scale, -std::log1p(-r));
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(topo.members.size());
  for (int i = 0; i < n; ++i)
    for (int j : topo.members_of(i)) trips.emplace_back(i, j, 1.0);
  Eigen::SparseMatrix<double> C(n, n);
  C.setFromTriplets(trips.begin(), trips.end());

  InversionResult out;
  Eigen::VectorXd beta(n);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(C);
  lu.factorize(C);
  if (lu.info() == Eigen::Success) {
    out.rank = n;
    beta = lu.solve(b);
  } else {
    // Truncated square windows lose rank on some grids (at ls = 1, any
    // dimension that is 2 mod 3); fall back to a sign-constrained fit whose
    // misfit separates representable fields from unreachable ones.
    const Eigen::MatrixXd dense(C);
    out.rank = static_cast<int>(
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(dense).rank());
    beta = -nnls(dense, -b);
  }

  const Eigen::VectorXd misfit = C * beta - b;
  for (int i = 0; i < n; ++i)
    out.residual = std::max(out.residual, std::abs(misfit[i]) *
                                              grid.cell_area /
                                              topo.delta_area[i]);

  out.beta.assign(beta.data(), beta.data() + n);
  if (out.rank == n) {
    // Positive means positive beyond solve roundoff; exact zeros (rho = 0
    // cells) would otherwise flip the flag on +-1 ulp wobble.
    const double tol = 1e-12 * std::max(1.0, beta.cwiseAbs().maxCoeff());
    for (int j = 0; j < n; ++j)
      if (beta[j] > tol) out.positive_cells.push_back(j);
  } else {
    // The fit keeps beta <= 0 by construction; report the cells pressed
    // against that bound, where the misfit gradient asks for positive beta.
    const Eigen::VectorXd g = C.transpose() * misfit;
    const double g_tol = 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff());
    for (int j = 0; j < n; ++j)
      if (beta[j] == 0.0 && g[j] < -g_tol) out.positive_cells.push_back(j);
  }
  out.feasible =
      out.positive_cells.empty() && out.residual <= 1e-9 * s_scale;
  return out;
}

}  // namespace nfpto
