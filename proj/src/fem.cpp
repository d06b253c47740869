#include "nfpto/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nfpto {

double simp_factor(double rho, const SimpParams& simp) {
  return std::pow(rho, simp.eta) * (1.0 - simp.rho_min) + simp.rho_min;
}

Eigen::Matrix<double, 8, 8> element_stiffness_q4(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("fem: E must be positive");
  if (!(nu < 0.5) || !(nu > -1.0))
    throw std::invalid_argument("fem: nu must lie in (-1, 0.5)");

  Eigen::Matrix3d D;
  const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  D << c * (1.0 - nu), c * nu, 0.0,
       c * nu, c * (1.0 - nu), 0.0,
       0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0;

  // Unit square, corners (0,0),(1,0),(1,1),(0,1); J = diag(1/2), detJ = 1/4.
  Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
  const double gp = 1.0 / std::sqrt(3.0);
  for (int gx = 0; gx < 2; ++gx) {
    for (int gy = 0; gy < 2; ++gy) {
      const double xi = (gx == 0 ? -gp : gp);
      const double et = (gy == 0 ? -gp : gp);
      const double dNdxi[4] = {-(1 - et) / 4, (1 - et) / 4, (1 + et) / 4,
                               -(1 + et) / 4};
      const double dNdet[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4,
                               (1 - xi) / 4};
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dNdx = 2.0 * dNdxi[a];
        const double dNdy = 2.0 * dNdet[a];
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy;
        B(2, 2 * a + 1) = dNdx;
      }
      K += B.transpose() * D * B * 0.25;
    }
  }
  return K;
}

std::array<int, 8> FeModel::element_dofs(int cell) const {
  const int cx = grid.cell_x(cell);
  const int cy = grid.cell_y(cell);
  const int n1 = node_index(cx, cy);
  const int n2 = node_index(cx + 1, cy);
  const int n3 = node_index(cx + 1, cy + 1);
  const int n4 = node_index(cx, cy + 1);
  return {2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1,
          2 * n3, 2 * n3 + 1, 2 * n4, 2 * n4 + 1};
}

Eigen::VectorXd FeModel::dense_load(int load_case) const {
  if (load_case < 0 || load_case >= static_cast<int>(load_cases.size()))
    throw std::invalid_argument("fem: load case out of range");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dof_count());
  for (const auto& p : load_cases[load_case]) f[p.dof] += p.value;
  return f;
}

FeModel make_fe_model(const CellGrid& grid, double E, double nu) {
  grid.validate();
  FeModel m;
  m.grid = grid;
  m.E = E;
  m.nu = nu;
  m.K0 = element_stiffness_q4(E, nu);
  return m;
}

namespace {

// SIMP scale per cell; dummy cells drop to the floor when excluded from FE.
double cell_scale(const FeModel& model, const DensityField& rho,
                  const SimpParams& simp, int cell) {
  if (!model.dummy_rows_in_fe && !model.grid.is_design_cell(cell))
    return simp.rho_min;
  return simp_factor(rho.rho[cell], simp);
}

void check_inputs(const FeModel& model, const DensityField& rho,
                  const SimpParams& simp) {
  if (static_cast<int>(rho.rho.size()) != model.grid.cell_count())
    throw std::invalid_argument("fem: rho must cover every cell");
  if (!(simp.eta >= 1.0))
    throw std::invalid_argument("fem: eta must be >= 1");
  if (!(simp.rho_min > 0.0 && simp.rho_min < 1.0))
    throw std::invalid_argument("fem: rho_min must lie in (0, 1)");
}

}  // namespace

struct StiffnessSystem::Impl {
  std::vector<int> free_of_dof;  // dof -> free index, -1 when fixed
  int n_free = 0;
  Eigen::SparseMatrix<double> Kff;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper>
      cg;
  bool use_cg = false;
  double cg_tol = 1e-10;

  Eigen::VectorXd solve_reduced(const Eigen::VectorXd& rhs,
                                std::string* detail) const {
    if (use_cg) {
      Eigen::VectorXd x = cg.solve(rhs);
      if (detail)
        *detail = "pcg iterations " + std::to_string(cg.iterations()) +
                  ", estimated error " + std::to_string(cg.error());
      return x;
    }
    if (detail) *detail = "direct ldlt";
    return ldlt.solve(rhs);
  }

  // Residual b - Kff x accumulated in extended precision, so refinement can
  // recover forward accuracy lost to the conditioning of the factorization.
  Eigen::VectorXd residual_ext(const Eigen::VectorXd& rhs,
                               const Eigen::VectorXd& x) const {
    std::vector<long double> r(static_cast<size_t>(rhs.size()));
    for (Eigen::Index i = 0; i < rhs.size(); ++i)
      r[static_cast<size_t>(i)] = static_cast<long double>(rhs[i]);
    for (int j = 0; j < Kff.outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Kff, j); it; ++it)
        r[static_cast<size_t>(it.row())] -=
            static_cast<long double>(it.value()) *
            static_cast<long double>(x[j]);
    Eigen::VectorXd out(rhs.size());
    for (Eigen::Index i = 0; i < rhs.size(); ++i)
      out[i] = static_cast<double>(r[static_cast<size_t>(i)]);
    return out;
  }
};

StiffnessSystem::StiffnessSystem(const FeModel& model, const DensityField& rho,
                                 const SimpParams& simp,
                                 const SolverOptions& opts)
    : impl_(std::make_unique<Impl>()) {
  check_inputs(model, rho, simp);
  if (static_cast<int>(model.fixed_dofs.size()) < 3)
    throw std::invalid_argument(
        "fem: at least 3 constrained dofs are required, got " +
        std::to_string(model.fixed_dofs.size()));

  const int ndof = model.dof_count();
  impl_->free_of_dof.assign(ndof, 0);
  for (int d : model.fixed_dofs) {
    if (d < 0 || d >= ndof)
      throw std::invalid_argument("fem: fixed dof out of range");
    impl_->free_of_dof[d] = -1;
  }
  int nf = 0;
  for (int d = 0; d < ndof; ++d)
    if (impl_->free_of_dof[d] >= 0) impl_->free_of_dof[d] = nf++;
  impl_->n_free = nf;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(model.grid.cell_count()) * 36 +
                model.diag_springs.size());
  for (int cell = 0; cell < model.grid.cell_count(); ++cell) {
    const double s = cell_scale(model, rho, simp, cell);
    const auto dofs = model.element_dofs(cell);
    for (int a = 0; a < 8; ++a) {
      const int fa = impl_->free_of_dof[dofs[a]];
      if (fa < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int fb = impl_->free_of_dof[dofs[b]];
        if (fb >= 0) trips.emplace_back(fa, fb, s * model.K0(a, b));
      }
    }
  }
  for (const auto& sp : model.diag_springs) {
    const int f = impl_->free_of_dof[sp.dof];
    if (f >= 0) trips.emplace_back(f, f, sp.value);
  }
  impl_->Kff.resize(nf, nf);
  impl_->Kff.setFromTriplets(trips.begin(), trips.end());

  impl_->use_cg = ndof > opts.cg_dof_threshold;
  impl_->cg_tol = opts.cg_tol;
  if (impl_->use_cg) {
    impl_->cg.setTolerance(opts.cg_tol);
    impl_->cg.setMaxIterations(10L * nf);
    impl_->cg.compute(impl_->Kff);
    if (impl_->cg.info() != Eigen::Success)
      throw std::runtime_error("fem: pcg setup failed");
  } else {
    impl_->ldlt.compute(impl_->Kff);
    if (impl_->ldlt.info() != Eigen::Success)
      throw std::runtime_error(
          "fem: stiffness factorization failed (matrix not positive "
          "definite; check constraints and densities)");
  }
}

StiffnessSystem::~StiffnessSystem() = default;
StiffnessSystem::StiffnessSystem(StiffnessSystem&&) noexcept = default;
StiffnessSystem& StiffnessSystem::operator=(StiffnessSystem&&) noexcept =
    default;

int StiffnessSystem::free_dof_count() const { return impl_->n_free; }

Eigen::VectorXd StiffnessSystem::solve(const Eigen::VectorXd& load) const {
  const int ndof = static_cast<int>(impl_->free_of_dof.size());
  if (load.size() != ndof)
    throw std::invalid_argument("fem: load vector has wrong length");
  if (!load.allFinite())
    throw std::invalid_argument("fem: load vector has non-finite entries");

  Eigen::VectorXd rhs(impl_->n_free);
  for (int d = 0; d < ndof; ++d)
    if (impl_->free_of_dof[d] >= 0) rhs[impl_->free_of_dof[d]] = load[d];

  std::string detail;
  Eigen::VectorXd x = impl_->solve_reduced(rhs, &detail);

  const double fnorm = rhs.norm();
  const double tol = 1e-8 * (fnorm > 0.0 ? fnorm : 1.0);
  for (int round = 0; round < 3; ++round) {
    const Eigen::VectorXd dx =
        impl_->solve_reduced(impl_->residual_ext(rhs, x), nullptr);
    x += dx;
    if (dx.norm() <= 1e-15 * x.norm()) break;
  }
  const double res = impl_->residual_ext(rhs, x).norm();
  if (res > tol)
    throw std::runtime_error("fem: solve residual " + std::to_string(res) +
                             " exceeds tolerance " + std::to_string(tol) +
                             " (" + detail + ")");

  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  for (int d = 0; d < ndof; ++d)
    if (impl_->free_of_dof[d] >= 0) u[d] = x[impl_->free_of_dof[d]];
  return u;
}

std::vector<double> assemble_and_solve(const FeModel& model,
                                       const DensityField& rho,
                                       const SimpParams& simp, int load_case,
                                       const SolverOptions& opts) {
  StiffnessSystem sys(model, rho, simp, opts);
  Eigen::VectorXd u = sys.solve(model.dense_load(load_case));
  return {u.data(), u.data() + u.size()};
}

std::vector<double> element_energies(const FeModel& model,
                                     const Eigen::VectorXd& u) {
  if (u.size() != model.dof_count())
    throw std::invalid_argument("fem: displacement vector has wrong length");
  std::vector<double> e(model.grid.cell_count());
  Eigen::Matrix<double, 8, 1> ue;
  for (int cell = 0; cell < model.grid.cell_count(); ++cell) {
    const auto dofs = model.element_dofs(cell);
    for (int a = 0; a < 8; ++a) ue[a] = u[dofs[a]];
    e[cell] = ue.dot(model.K0 * ue);
  }
  return e;
}

Eigen::VectorXd apply_stiffness(const FeModel& model, const DensityField& rho,
                                const SimpParams& simp,
                                const Eigen::VectorXd& x) {
  check_inputs(model, rho, simp);
  if (x.size() != model.dof_count())
    throw std::invalid_argument("fem: vector has wrong length");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  Eigen::Matrix<double, 8, 1> xe;
  for (int cell = 0; cell < model.grid.cell_count(); ++cell) {
    const double s = cell_scale(model, rho, simp, cell);
    const auto dofs = model.element_dofs(cell);
    for (int a = 0; a < 8; ++a) xe[a] = x[dofs[a]];
    const Eigen::Matrix<double, 8, 1> ye = s * (model.K0 * xe);
    for (int a = 0; a < 8; ++a) y[dofs[a]] += ye[a];
  }
  for (const auto& sp : model.diag_springs) y[sp.dof] += sp.value * x[sp.dof];
  return y;
}

}  // namespace nfpto
