#include "nfpto/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nfpto {

GradCheckResult gradcheck(const Problem& problem, int n_samples,
                          std::uint64_t seed, double step, double floor) {
  const int n = problem.grid.design_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> beta_dist(-2.0, -0.1);

  DesignField design;
  design.beta_lb = problem.beta_lb;
  design.beta.resize(n);
  for (int j = 0; j < n; ++j) design.beta[j] = beta_dist(rng);

  const ObjectiveReport base =
      problem.evaluate(density_from_beta(design, problem.topo));

  // Sample without replacement; component order is deterministic in the seed.
  std::vector<int> indices(n);
  for (int j = 0; j < n; ++j) indices[j] = j;
  std::shuffle(indices.begin(), indices.end(), rng);
  const int count = std::min(n_samples, n);

  GradCheckResult result;
  for (int k = 0; k < count; ++k) {
    const int j = indices[k];
    const double saved = design.beta[j];

    const auto value_at = [&](double offset) {
      design.beta[j] = saved + offset;
      return problem.evaluate(density_from_beta(design, problem.topo)).value;
    };
    const double f1 = value_at(-2.0 * step);
    const double f2 = value_at(-step);
    const double f3 = value_at(step);
    const double f4 = value_at(2.0 * step);
    design.beta[j] = saved;

    GradCheckRow row;
    row.design = j;
    row.analytic = base.grad_beta[j];
    row.fd = (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * step);
    const double mag = std::max(std::abs(row.analytic), std::abs(row.fd));
    row.rel_err = mag > floor ? std::abs(row.analytic - row.fd) / mag : 0.0;
    result.rows.push_back(row);
    result.max_rel_err = std::max(result.max_rel_err, row.rel_err);
  }
  return result;
}

}  // namespace nfpto
