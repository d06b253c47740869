#include "nfpto/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfpto {

namespace {

// Per-cell d(simp)/d(rho) chain factor eta (1 - rho_min) rho^(eta-1); zero for
// cells whose stiffness does not track rho.
double simp_dfactor(const FeModel& model, const DensityField& rho,
                    const SimpParams& simp, int cell) {
  if (!model.dummy_rows_in_fe && !model.grid.is_design_cell(cell)) return 0.0;
  return simp.eta * (1.0 - simp.rho_min) *
         std::pow(rho.rho[cell], simp.eta - 1.0);
}

double cross_energy(const FeModel& model, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b, int cell) {
  const auto dofs = model.element_dofs(cell);
  Eigen::Matrix<double, 8, 1> ae, be;
  for (int k = 0; k < 8; ++k) {
    ae[k] = a[dofs[k]];
    be[k] = b[dofs[k]];
  }
  return ae.dot(model.K0 * be);
}

}  // namespace

ObjectiveReport compliance_objective(const DensityField& rho,
                                     const FeModel& model,
                                     const SimpParams& simp, double lambda,
                                     const NeighborhoodTopology& topo,
                                     int load_case, const SolverOptions& opts) {
  StiffnessSystem sys(model, rho, simp, opts);
  const Eigen::VectorXd f = model.dense_load(load_case);
  const Eigen::VectorXd u = sys.solve(f);

  ObjectiveReport rep;
  rep.value = 0.5 * lambda * f.dot(u);
  rep.u.assign(u.data(), u.data() + u.size());

  const int n = model.grid.cell_count();
  std::vector<double> didrho(n);
  const double scale = lambda * simp.eta * (1.0 - simp.rho_min) / 2.0;
  for (int cell = 0; cell < n; ++cell) {
    if (!model.dummy_rows_in_fe && !model.grid.is_design_cell(cell)) {
      didrho[cell] = 0.0;
      continue;
    }
    didrho[cell] = -scale * std::pow(rho.rho[cell], simp.eta - 1.0) *
                   cross_energy(model, u, u, cell);
  }
  rep.grad_beta = backprop_to_beta(didrho, rho, topo);
  return rep;
}

ObjectiveReport mechanism_objective(const DensityField& rho,
                                    const FeModel& model,
                                    const SimpParams& simp, double lambda,
                                    const NeighborhoodTopology& topo,
                                    int load_case, int dummy_load_case,
                                    int output_dof,
                                    const SolverOptions& opts) {
  if (output_dof < 0 || output_dof >= model.dof_count())
    throw std::invalid_argument("mechanism: output dof out of range");
  StiffnessSystem sys(model, rho, simp, opts);
  const Eigen::VectorXd f = model.dense_load(load_case);
  const Eigen::VectorXd fd = model.dense_load(dummy_load_case);
  const Eigen::VectorXd u = sys.solve(f);
  const Eigen::VectorXd v = sys.solve(fd);

  const double c = f.dot(u);  // u^T (K + K_a) u through the state equation
  if (!(c > 0.0))
    throw std::runtime_error("mechanism: non-positive strain energy");
  const double nwork = fd.dot(u);

  ObjectiveReport rep;
  rep.value = -lambda * nwork / c;
  rep.u.assign(u.data(), u.data() + u.size());
  rep.v.assign(v.data(), v.data() + v.size());
  rep.output_displacement = u[output_dof];

  const int n = model.grid.cell_count();
  std::vector<double> didrho(n);
  for (int cell = 0; cell < n; ++cell) {
    const double dphi = simp_dfactor(model, rho, simp, cell);
    if (dphi == 0.0) {
      didrho[cell] = 0.0;
      continue;
    }
    const double vku = cross_energy(model, v, u, cell);
    const double uku = cross_energy(model, u, u, cell);
    didrho[cell] = (dphi / c) * (lambda * vku + rep.value * uku);
  }
  rep.grad_beta = backprop_to_beta(didrho, rho, topo);
  return rep;
}

VolumeReport volume_constraint(const DensityField& rho,
                               const NeighborhoodTopology& topo, double vf,
                               bool include_dummy) {
  if (!(vf > 0.0 && vf <= 1.0))
    throw std::invalid_argument("volume: vf must lie in (0, 1]");
  const CellGrid& grid = topo.grid;
  const double v = grid.cell_area;

  VolumeReport rep;
  double material = 0.0;
  std::vector<double> drho(grid.cell_count(), 0.0);
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    if (!include_dummy && !grid.is_design_cell(cell)) continue;
    material += rho.rho[cell] * v;
    rep.total_volume += v;
    drho[cell] = v;
  }
  rep.value = material - vf * rep.total_volume;
  rep.volume_fraction = material / rep.total_volume;
  rep.grad_beta = backprop_to_beta(drho, rho, topo);
  return rep;
}

ObjectiveReport Problem::evaluate(const DensityField& rho) const {
  if (kind == ObjectiveKind::compliance)
    return compliance_objective(rho, model, simp, lambda, topo, load_case,
                                solver);
  return mechanism_objective(rho, model, simp, lambda, topo, load_case,
                             dummy_load_case, output_dof, solver);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"cantilever", "mbb",
                                                 "inverter"};
  return names;
}

namespace {

void fix_node(FeModel& m, int node) {
  m.fixed_dofs.push_back(2 * node);
  m.fixed_dofs.push_back(2 * node + 1);
}

void finish_fixed(FeModel& m) {
  std::sort(m.fixed_dofs.begin(), m.fixed_dofs.end());
  m.fixed_dofs.erase(std::unique(m.fixed_dofs.begin(), m.fixed_dofs.end()),
                     m.fixed_dofs.end());
}

}  // namespace

Problem make_problem(const PresetConfig& cfg) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
    std::string msg = "unknown preset '" + cfg.preset + "'; valid presets:";
    for (const auto& n : names) msg += " " + n;
    throw std::invalid_argument(msg);
  }
  if (cfg.ls < 1) throw std::invalid_argument("preset: ls must be >= 1");
  if (!(cfg.vf < 0.0 || (cfg.vf > 0.0 && cfg.vf <= 1.0)))
    throw std::invalid_argument("preset: vf must lie in (0, 1]");
  if (cfg.ka < 0.0) throw std::invalid_argument("preset: ka must be >= 0");

  Problem p;
  p.preset = cfg.preset;
  p.simp.eta = cfg.eta;
  p.simp.rho_min = cfg.rho_min;
  p.dummy_rows_in_volume = cfg.dummy_rows_in_volume;
  p.solver.cg_dof_threshold = cfg.cg_dof_threshold;
  p.solver.cg_tol = cfg.cg_tol;

  CellGrid grid;
  DummyEdges edges = cfg.dummy_edges;
  if (cfg.preset == "cantilever") {
    grid.nelx = cfg.nelx > 0 ? cfg.nelx : 60;
    grid.nely = cfg.nely > 0 ? cfg.nely : 30;
    p.vf = cfg.vf > 0.0 ? cfg.vf : 0.35;
    p.lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e3;
    p.kind = ObjectiveKind::compliance;
    if (edges == DummyEdges::preset_default) edges = DummyEdges::none;
  } else if (cfg.preset == "mbb") {
    grid.nelx = cfg.nelx > 0 ? cfg.nelx : 60;
    grid.nely = cfg.nely > 0 ? cfg.nely : 20;
    p.vf = cfg.vf > 0.0 ? cfg.vf : 0.35;
    p.lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e3;
    p.kind = ObjectiveKind::compliance;
    if (edges == DummyEdges::preset_default) edges = DummyEdges::bottom;
  } else {  // inverter
    grid.nelx = cfg.nelx > 0 ? cfg.nelx : 60;
    grid.nely = cfg.nely > 0 ? cfg.nely : 30;
    p.vf = cfg.vf > 0.0 ? cfg.vf : 0.22;
    p.lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e5;
    p.kind = ObjectiveKind::mechanism;
    if (edges == DummyEdges::preset_default) edges = DummyEdges::both;
  }
  if (edges == DummyEdges::bottom || edges == DummyEdges::both)
    grid.dummy_bottom = cfg.ls;
  if (edges == DummyEdges::top || edges == DummyEdges::both)
    grid.dummy_top = cfg.ls;

  p.grid = grid;
  p.topo = build_neighborhoods(grid, cfg.ls);
  p.beta_lb = default_beta_lb(p.topo, cfg.beta_lb_factor);
  p.model = make_fe_model(grid, cfg.E, cfg.nu);
  p.model.dummy_rows_in_fe = cfg.dummy_rows_in_fe;
  FeModel& m = p.model;

  if (cfg.preset == "cantilever") {
    for (int iy = 0; iy < m.node_rows(); ++iy) fix_node(m, m.node_index(0, iy));
    m.load_cases.push_back(
        {{2 * m.node_index(grid.nelx, 0) + 1, -cfg.force}});
  } else if (cfg.preset == "mbb") {
    fix_node(m, m.node_index(0, 0));  // pin at the extended bottom-left corner
    for (int iy = 0; iy < m.node_rows(); ++iy)
      m.fixed_dofs.push_back(2 * m.node_index(grid.nelx, iy));  // symmetry
    m.load_cases.push_back(
        {{2 * m.node_index(grid.nelx, m.node_rows() - 1) + 1, -cfg.force}});
  } else {
    const int top = m.node_rows() - 1;
    fix_node(m, m.node_index(0, 0));
    fix_node(m, m.node_index(0, 1));
    fix_node(m, m.node_index(0, top));
    fix_node(m, m.node_index(0, top - 1));
    const int mid = m.node_rows() / 2;
    const int in_dof = 2 * m.node_index(0, mid);
    const int out_dof = 2 * m.node_index(grid.nelx, mid);
    m.load_cases.push_back({{in_dof, cfg.force}});
    m.load_cases.push_back({{out_dof, -1.0}});  // unit pull along desired -x
    m.diag_springs.push_back({out_dof, cfg.ka});
    p.load_case = 0;
    p.dummy_load_case = 1;
    p.output_dof = out_dof;
  }
  finish_fixed(m);
  return p;
}

}  // namespace nfpto
