#pragma once

#include <vector>

#include "nfpto/grid.hpp"

namespace nfpto {

enum class WeightKind { linear_decay, constant };

// Window weights depend only on the (dx, dy) offset on a uniform grid; the
// stencil is a (2ls+1)^2 table indexed (dx+ls)*(2ls+1) + (dy+ls).
// linear_decay: w = ls + 1 - max(|dx|, |dy|) (strictly positive in-window).
std::vector<double> make_weight_stencil(int ls, WeightKind kind);

// Eq.-level baselines; all take a per-cell alpha field in [0, 1] and return a
// per-cell density. They exist for comparison runs, not for the nFP pipeline.

// rho_i = alpha_i.
std::vector<double> direct_density(const std::vector<double>& alpha);

// Weighted window average: rho_i = sum w alpha A / sum w A over N_i.
std::vector<double> filter_density(const std::vector<double>& alpha,
                                   const NeighborhoodTopology& topo,
                                   const std::vector<double>& stencil);

// Smoothed Heaviside of the window average mu_i over D_i:
// rho_i = 1 - exp(-sharpness mu) + mu exp(-sharpness).
std::vector<double> projection_density(const std::vector<double>& alpha,
                                       const NeighborhoodTopology& topo,
                                       const std::vector<double>& stencil,
                                       double sharpness);

// Unnormalized survival product: rho_i = 1 - prod_{j in D_i} (1 - alpha_j),
// accumulated in the log domain; any alpha_j = 1 short-circuits to rho = 1.
std::vector<double> raw_product_density(const std::vector<double>& alpha,
                                        const NeighborhoodTopology& topo);

}  // namespace nfpto
