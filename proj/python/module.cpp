#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nfpto/baselines.hpp"
#include "nfpto/diagnostics.hpp"
#include "nfpto/field_product.hpp"
#include "nfpto/io.hpp"
#include "nfpto/optimizer.hpp"

namespace py = pybind11;
using namespace nfpto;

namespace {

WeightKind weight_kind(const std::string& name) {
  if (name == "linear_decay") return WeightKind::linear_decay;
  if (name == "constant") return WeightKind::constant;
  throw std::invalid_argument("weights must be linear_decay|constant");
}

PresetConfig preset_config(const std::string& preset, int nelx, int nely,
                           int ls, double vf, double lambda,
                           const std::string& dummy_rows) {
  PresetConfig cfg;
  cfg.preset = preset;
  cfg.nelx = nelx;
  cfg.nely = nely;
  cfg.ls = ls;
  cfg.vf = vf;
  cfg.lambda = lambda;
  if (dummy_rows == "auto") cfg.dummy_edges = DummyEdges::preset_default;
  else if (dummy_rows == "none") cfg.dummy_edges = DummyEdges::none;
  else if (dummy_rows == "bottom") cfg.dummy_edges = DummyEdges::bottom;
  else if (dummy_rows == "top") cfg.dummy_edges = DummyEdges::top;
  else if (dummy_rows == "both") cfg.dummy_edges = DummyEdges::both;
  else throw std::invalid_argument("dummy_rows must be auto|none|bottom|top|both");
  return cfg;
}

py::dict history_dict(const OptHistory& h) {
  py::list rows;
  for (const auto& r : h.records) {
    py::dict d;
    d["iter"] = r.iter;
    d["objective"] = r.objective;
    d["volume_fraction"] = r.volume_fraction;
    d["grayness"] = r.grayness;
    d["max_design_change"] = r.max_design_change;
    d["constraint_violation"] = r.constraint_violation;
    rows.append(d);
  }
  py::dict out;
  out["records"] = rows;
  out["termination"] = h.termination;
  out["iterations"] = h.iterations;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "2-D topology optimization with field-product densities";

  m.def("nfp_product_form",
        [](const std::vector<double>& v, const std::vector<double>& a) {
          return nfp_product_form(v, a);
        },
        py::arg("values"), py::arg("areas"));
  m.def("nfp_log_form",
        [](const std::vector<double>& lv, const std::vector<double>& a) {
          return nfp_log_form(lv, a);
        },
        py::arg("log_values"), py::arg("areas"));

  py::class_<CellGrid>(m, "CellGrid")
      .def(py::init([](int nelx, int nely, int dummy_bottom, int dummy_top) {
             CellGrid g;
             g.nelx = nelx;
             g.nely = nely;
             g.dummy_bottom = dummy_bottom;
             g.dummy_top = dummy_top;
             g.validate();
             return g;
           }),
           py::arg("nelx"), py::arg("nely"), py::arg("dummy_bottom") = 0,
           py::arg("dummy_top") = 0)
      .def_readonly("nelx", &CellGrid::nelx)
      .def_readonly("nely", &CellGrid::nely)
      .def("cell_count", &CellGrid::cell_count)
      .def("design_count", &CellGrid::design_count)
      .def("cell_index", &CellGrid::cell_index)
      .def("is_design_cell", &CellGrid::is_design_cell);

  py::class_<NeighborhoodTopology>(m, "NeighborhoodTopology")
      .def_readonly("ls", &NeighborhoodTopology::ls)
      .def_readonly("d_interior", &NeighborhoodTopology::d_interior)
      .def_readonly("delta_area", &NeighborhoodTopology::delta_area)
      .def_readonly("window_covers_domain",
                    &NeighborhoodTopology::window_covers_domain)
      .def("members_of", [](const NeighborhoodTopology& t, int cell) {
        auto s = t.members_of(cell);
        return std::vector<int>(s.begin(), s.end());
      });
  m.def("build_neighborhoods", &build_neighborhoods, py::arg("grid"),
        py::arg("ls"));

  py::class_<DesignField>(m, "DesignField")
      .def(py::init([](std::vector<double> beta, double beta_lb) {
             DesignField f;
             f.beta = std::move(beta);
             f.beta_lb = beta_lb;
             return f;
           }),
           py::arg("beta"), py::arg("beta_lb"))
      .def_readonly("beta", &DesignField::beta)
      .def_readonly("beta_lb", &DesignField::beta_lb);
  m.def("default_beta_lb", &default_beta_lb, py::arg("topo"),
        py::arg("factor") = 10.0);

  py::class_<DensityField>(m, "DensityField")
      .def_readonly("rho", &DensityField::rho)
      .def_readonly("log_survival", &DensityField::log_survival)
      .def("survival", &DensityField::survival);
  m.def("density_from_beta", &density_from_beta, py::arg("beta"),
        py::arg("topo"));
  m.def("density_jacobian_entry", &density_jacobian_entry, py::arg("cell"),
        py::arg("design"), py::arg("rho"), py::arg("topo"));
  m.def("backprop_to_beta", &backprop_to_beta, py::arg("drho"),
        py::arg("rho"), py::arg("topo"));
  m.def("grayness", &grayness, py::arg("rho"), py::arg("topo"));

  py::class_<InversionResult>(m, "InversionResult")
      .def_readonly("beta", &InversionResult::beta)
      .def_readonly("feasible", &InversionResult::feasible)
      .def_readonly("positive_cells", &InversionResult::positive_cells)
      .def_readonly("rank", &InversionResult::rank)
      .def_readonly("residual", &InversionResult::residual);
  m.def("beta_from_density", &beta_from_density, py::arg("rho"),
        py::arg("topo"), py::arg("eps") = 1e-12);

  m.def("simp_factor",
        [](double rho, double eta, double rho_min) {
          return simp_factor(rho, {eta, rho_min});
        },
        py::arg("rho"), py::arg("eta") = 3.0, py::arg("rho_min") = 1e-4);
  m.def("element_stiffness_q4",
        [](double E, double nu) {
          const auto K = element_stiffness_q4(E, nu);
          std::vector<std::vector<double>> out(8, std::vector<double>(8));
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) out[i][j] = K(i, j);
          return out;
        },
        py::arg("E") = 2e4, py::arg("nu") = 0.3);

  py::class_<Problem>(m, "Problem")
      .def_readonly("preset", &Problem::preset)
      .def_readonly("vf", &Problem::vf)
      .def_readonly("lambda_", &Problem::lambda)
      .def_readonly("beta_lb", &Problem::beta_lb)
      .def_property_readonly("grid",
                             [](const Problem& p) { return p.grid; })
      .def_property_readonly("topo",
                             [](const Problem& p) { return p.topo; })
      .def("design_count",
           [](const Problem& p) { return p.grid.design_count(); })
      .def("evaluate", [](const Problem& p, const DensityField& rho) {
        const ObjectiveReport rep = p.evaluate(rho);
        py::dict d;
        d["value"] = rep.value;
        d["grad_beta"] = rep.grad_beta;
        d["output_displacement"] = rep.output_displacement;
        return d;
      });
  m.def("make_problem",
        [](const std::string& preset, int nelx, int nely, int ls, double vf,
           double lambda, const std::string& dummy_rows) {
          return make_problem(
              preset_config(preset, nelx, nely, ls, vf, lambda, dummy_rows));
        },
        py::arg("preset"), py::arg("nelx") = 0, py::arg("nely") = 0,
        py::arg("ls") = 1, py::arg("vf") = -1.0, py::arg("lambda") = -1.0,
        py::arg("dummy_rows") = "auto");

  m.def("volume_fraction",
        [](const Problem& p, const DensityField& rho) {
          return volume_constraint(rho, p.topo, p.vf, p.dummy_rows_in_volume)
              .volume_fraction;
        },
        py::arg("problem"), py::arg("rho"));

  m.def("solve",
        [](const Problem& p, int max_iters, const std::string& algo,
           double move_limit, int history_stride) {
          OptSettings s;
          s.max_iters = max_iters;
          s.move_limit = move_limit;
          s.history_stride = history_stride;
          if (algo == "mma") s.algo = OptAlgo::mma;
          else if (algo == "pg") s.algo = OptAlgo::projected_gradient;
          else throw std::invalid_argument("algo must be mma|pg");
          const OptResult r = solve(p, s);
          py::dict d;
          d["beta"] = r.design.beta;
          d["rho"] = r.rho.rho;
          d["history"] = history_dict(r.history);
          d["objective"] = r.report.value;
          d["output_displacement"] = r.report.output_displacement;
          return d;
        },
        py::arg("problem"), py::arg("max_iters") = 1000,
        py::arg("algo") = "mma", py::arg("move_limit") = 0.05,
        py::arg("history_stride") = 1);

  m.def("gradcheck",
        [](const Problem& p, int samples, std::uint64_t seed) {
          const GradCheckResult r = gradcheck(p, samples, seed);
          py::list rows;
          for (const auto& row : r.rows) {
            py::dict d;
            d["index"] = row.design;
            d["analytic"] = row.analytic;
            d["fd"] = row.fd;
            d["rel_err"] = row.rel_err;
            rows.append(d);
          }
          py::dict out;
          out["rows"] = rows;
          out["max_rel_err"] = r.max_rel_err;
          return out;
        },
        py::arg("problem"), py::arg("samples") = 50, py::arg("seed") = 0);

  m.def("make_weight_stencil",
        [](int ls, const std::string& kind) {
          return make_weight_stencil(ls, weight_kind(kind));
        },
        py::arg("ls"), py::arg("kind") = "linear_decay");
  m.def("direct_density", &direct_density, py::arg("alpha"));
  m.def("filter_density", &filter_density, py::arg("alpha"), py::arg("topo"),
        py::arg("stencil"));
  m.def("projection_density", &projection_density, py::arg("alpha"),
        py::arg("topo"), py::arg("stencil"), py::arg("sharpness"));
  m.def("raw_product_density", &raw_product_density, py::arg("alpha"),
        py::arg("topo"));
}
