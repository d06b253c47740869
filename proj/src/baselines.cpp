#include "nfpto/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfpto {

namespace {

void check_alpha(const std::vector<double>& alpha,
                 const NeighborhoodTopology& topo, bool allow_one) {
  if (static_cast<int>(alpha.size()) != topo.grid.cell_count())
    throw std::invalid_argument("baseline: alpha must cover every cell");
  for (size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    const bool ok = a >= 0.0 && (allow_one ? a <= 1.0 : a < 1.0);
    if (!ok)
      throw std::domain_error("baseline: alpha[" + std::to_string(i) +
                              "] = " + std::to_string(a) + " out of range");
  }
}

double stencil_weight(const std::vector<double>& stencil, int ls, int dx,
                      int dy) {
  return stencil[static_cast<size_t>(dx + ls) * (2 * ls + 1) + (dy + ls)];
}

}  // namespace

std::vector<double> make_weight_stencil(int ls, WeightKind kind) {
  if (ls < 1) throw std::invalid_argument("stencil: ls must be >= 1");
  const int w = 2 * ls + 1;
  std::vector<double> s(static_cast<size_t>(w) * w, 1.0);
  if (kind == WeightKind::linear_decay) {
    for (int dx = -ls; dx <= ls; ++dx)
      for (int dy = -ls; dy <= ls; ++dy)
        s[static_cast<size_t>(dx + ls) * w + (dy + ls)] =
            ls + 1.0 - std::max(std::abs(dx), std::abs(dy));
  }
  return s;
}

std::vector<double> direct_density(const std::vector<double>& alpha) {
  for (size_t i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0))
      throw std::domain_error("baseline: alpha[" + std::to_string(i) +
                              "] out of [0, 1]");
  return alpha;
}

std::vector<double> filter_density(const std::vector<double>& alpha,
                                   const NeighborhoodTopology& topo,
                                   const std::vector<double>& stencil) {
  check_alpha(alpha, topo, true);
  const int w = 2 * topo.ls + 1;
  if (static_cast<int>(stencil.size()) != w * w)
    throw std::invalid_argument("baseline: stencil size mismatch");
  for (double v : stencil)
    if (!(v > 0.0))
      throw std::domain_error("baseline: weights must be positive");

  const CellGrid& g = topo.grid;
  std::vector<double> rho(g.cell_count());
  for (int i = 0; i < g.cell_count(); ++i) {
    const int cx = g.cell_x(i), cy = g.cell_y(i);
    double num = 0.0, den = 0.0;
    for (int j : topo.members_of(i)) {
      const double wj = stencil_weight(stencil, topo.ls, g.cell_x(j) - cx,
                                       g.cell_y(j) - cy) *
                        g.cell_area;
      num += wj * alpha[j];
      den += wj;
    }
    rho[i] = num / den;
  }
  return rho;
}

std::vector<double> projection_density(const std::vector<double>& alpha,
                                       const NeighborhoodTopology& topo,
                                       const std::vector<double>& stencil,
                                       double sharpness) {
  if (!(sharpness > 0.0))
    throw std::invalid_argument("baseline: sharpness must be positive");
  const std::vector<double> mu = filter_density(alpha, topo, stencil);
  std::vector<double> rho(mu.size());
  for (size_t i = 0; i < mu.size(); ++i)
    rho[i] = 1.0 - std::exp(-sharpness * mu[i]) +
             mu[i] * std::exp(-sharpness);
  return rho;
}

std::vector<double> raw_product_density(const std::vector<double>& alpha,
                                        const NeighborhoodTopology& topo) {
  check_alpha(alpha, topo, true);
  std::vector<double> rho(topo.grid.cell_count());
  for (int i = 0; i < topo.grid.cell_count(); ++i) {
    double s = 0.0;
    bool solid = false;
    for (int j : topo.members_of(i)) {
      if (alpha[j] >= 1.0) {
        solid = true;
        break;
      }
      s += std::log1p(-alpha[j]);
    }
    rho[i] = solid ? 1.0 : -std::expm1(s);
  }
  return rho;
}

}  // namespace nfpto
