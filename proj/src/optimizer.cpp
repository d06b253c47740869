#include "nfpto/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfpto {

namespace {

constexpr double kAsyInit = 0.5;
constexpr double kAsyIncr = 1.2;
constexpr double kAsyDecr = 0.7;
constexpr double kAlbefa = 0.1;
constexpr double kRaa0 = 1e-5;
constexpr double kDualMax = 1e30;
// Asymptote distances are kept near the scale on which the density responds:
// one beta unit is one e-fold of survival, so curvature far beyond a few
// units carries no information and only flattens the subproblem into a
// bang-bang step. Distances are clamped in absolute beta units.
constexpr double kAsyInitCap = 2.0;
constexpr double kAsyMin = 1e-3;
constexpr double kAsyMax = 6.0;
// Per-step correction of a constraint violation: at most half of it, and at
// most five points of volume fraction. Correcting a large violation at once
// either flattens an infeasible start into a void design in a single move or
// (when the subproblem cannot reach feasibility) drives the dual to its cap,
// which squeezes every variable to its bound. A bounded cut keeps the dual
// finite and the objective shaping the design while the volume descends.
constexpr double kViolCut = 0.5;
constexpr double kViolMaxStep = 0.02;
// Annealed log-barrier repulsion from the box bounds, applied to the step
// model only (reported objective, KKT check and history use the true
// problem). Committing cells to a bound early locks the topology into
// whatever hinge pattern the first few steps produce; keeping iterates
// interior while the layout forms and releasing them as the weight decays
// reaches the bound-committed designs through far better basins. The
// softening distance caps the repulsion felt by cells already at a bound.
constexpr double kBarrier0 = 0.01;
constexpr double kBarrierDecay = 0.96;
constexpr double kBarrierFloor = 1e-6;
constexpr double kBarrierSoft = 0.05;

double violation_target(double f1) {
  if (f1 <= 0.0) return 0.0;
  return f1 - std::min(kViolCut * f1, kViolMaxStep);
}

void check_finite(const std::vector<double>& g, const char* what) {
  for (double v : g)
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string("optimizer: non-finite ") +
                                  what);
}

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

}  // namespace

void MmaState::reset(int n, double lb) {
  iter = 0;
  x_min = lb;
  x_max = 0.0;
  xold1.assign(n, 0.0);
  xold2.assign(n, 0.0);
  low.assign(n, 0.0);
  upp.assign(n, 0.0);
  dual = 0.0;
}

std::vector<double> mma_step(MmaState& state, const std::vector<double>& x,
                             const std::vector<double>& df0, double f1,
                             const std::vector<double>& df1,
                             const OptSettings& settings) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(df0.size()) != n || static_cast<int>(df1.size()) != n)
    throw std::invalid_argument("optimizer: gradient length mismatch");
  check_finite(df0, "objective gradient");
  check_finite(df1, "constraint gradient");
  if (!std::isfinite(f1))
    throw std::invalid_argument("optimizer: non-finite constraint value");

  const double range = std::max(state.x_max - state.x_min, 1e-12);
  state.iter += 1;

  const double d_init = std::min(kAsyInit * range, kAsyInitCap);
  if (state.iter <= 2) {
    for (int j = 0; j < n; ++j) {
      state.low[j] = x[j] - d_init;
      state.upp[j] = x[j] + d_init;
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double osc = (x[j] - state.xold1[j]) *
                         (state.xold1[j] - state.xold2[j]);
      double fac = 1.0;
      if (osc > 0.0) fac = kAsyIncr;
      else if (osc < 0.0) fac = kAsyDecr;
      double lo = x[j] - fac * (state.xold1[j] - state.low[j]);
      double up = x[j] + fac * (state.upp[j] - state.xold1[j]);
      lo = clamp(lo, x[j] - kAsyMax, x[j] - kAsyMin);
      up = clamp(up, x[j] + kAsyMin, x[j] + kAsyMax);
      state.low[j] = lo;
      state.upp[j] = up;
    }
  }

  const double move = settings.move_limit * range;
  std::vector<double> alfa(n), bup(n), p0(n), q0(n), p1(n), q1(n);
  for (int j = 0; j < n; ++j) {
    alfa[j] = std::max({state.x_min, state.low[j] + kAlbefa * (x[j] - state.low[j]),
                        x[j] - move});
    bup[j] = std::min({state.x_max, state.upp[j] - kAlbefa * (state.upp[j] - x[j]),
                       x[j] + move});
    const double ux = state.upp[j] - x[j];
    const double xl = x[j] - state.low[j];
    const double floor0 = 0.001 * std::abs(df0[j]) + kRaa0 / range;
    const double floor1 = 0.001 * std::abs(df1[j]) + kRaa0 / range;
    p0[j] = ux * ux * (std::max(df0[j], 0.0) + floor0);
    q0[j] = xl * xl * (std::max(-df0[j], 0.0) + floor0);
    p1[j] = ux * ux * (std::max(df1[j], 0.0) + floor1);
    q1[j] = xl * xl * (std::max(-df1[j], 0.0) + floor1);
  }

  double b1 = violation_target(f1) - f1;
  for (int j = 0; j < n; ++j)
    b1 += p1[j] / (state.upp[j] - x[j]) + q1[j] / (x[j] - state.low[j]);

  std::vector<double> xn(n);
  auto primal = [&](double lambda) {
    for (int j = 0; j < n; ++j) {
      const double sp = std::sqrt(p0[j] + lambda * p1[j]);
      const double sq = std::sqrt(q0[j] + lambda * q1[j]);
      xn[j] = clamp((state.low[j] * sp + state.upp[j] * sq) / (sp + sq),
                    alfa[j], bup[j]);
    }
  };
  auto constraint_gap = [&](double lambda) {
    primal(lambda);
    double s = -b1;
    for (int j = 0; j < n; ++j)
      s += p1[j] / (state.upp[j] - xn[j]) + q1[j] / (xn[j] - state.low[j]);
    return s;
  };

  double lambda = 0.0;
  if (constraint_gap(0.0) > 0.0) {
    double hi = 1.0;
    while (hi < kDualMax && constraint_gap(hi) > 0.0) hi *= 2.0;
    if (hi >= kDualMax) {
      lambda = kDualMax;  // constraint unreachable in the box; max squeeze
    } else {
      double lo = hi * 0.5 > 1.0 ? hi * 0.5 : 0.0;
      for (int it = 0; it < 128; ++it) {
        lambda = 0.5 * (lo + hi);
        if (constraint_gap(lambda) > 0.0) lo = lambda;
        else hi = lambda;
      }
      lambda = hi;  // feasible side of the bracket
    }
  }
  primal(lambda);
  state.dual = lambda;
  state.xold2 = state.xold1;
  state.xold1 = x;
  return xn;
}

std::vector<double> pg_step(MmaState& state, const std::vector<double>& x,
                            const std::vector<double>& df0, double f1,
                            const std::vector<double>& df1,
                            const OptSettings& settings) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(df0.size()) != n || static_cast<int>(df1.size()) != n)
    throw std::invalid_argument("optimizer: gradient length mismatch");
  check_finite(df0, "objective gradient");
  check_finite(df1, "constraint gradient");
  if (!std::isfinite(f1))
    throw std::invalid_argument("optimizer: non-finite constraint value");

  const double range = std::max(state.x_max - state.x_min, 1e-12);
  const double move = settings.move_limit * range;
  state.iter += 1;

  std::vector<double> xn(n);
  auto candidate = [&](double lambda) {
    double dmax = 0.0;
    for (int j = 0; j < n; ++j)
      dmax = std::max(dmax, std::abs(df0[j] + lambda * df1[j]));
    const double step = dmax > 0.0 ? move / dmax : 0.0;
    for (int j = 0; j < n; ++j) {
      const double lo = std::max(state.x_min, x[j] - move);
      const double hi = std::min(state.x_max, x[j] + move);
      xn[j] = clamp(x[j] - step * (df0[j] + lambda * df1[j]), lo, hi);
    }
  };
  const double target = violation_target(f1);
  auto linearized = [&](double lambda) {
    candidate(lambda);
    double g = f1 - target;
    for (int j = 0; j < n; ++j) g += df1[j] * (xn[j] - x[j]);
    return g;
  };

  double lambda = 0.0;
  if (linearized(0.0) > 0.0) {
    double hi = 1.0;
    while (hi < kDualMax && linearized(hi) > 0.0) hi *= 2.0;
    if (hi >= kDualMax) {
      lambda = kDualMax;
    } else {
      double lo = hi * 0.5 > 1.0 ? hi * 0.5 : 0.0;
      for (int it = 0; it < 96; ++it) {
        lambda = 0.5 * (lo + hi);
        if (linearized(lambda) > 0.0) lo = lambda;
        else hi = lambda;
      }
      lambda = hi;
    }
  }
  candidate(lambda);
  state.dual = lambda;
  state.xold2 = state.xold1;
  state.xold1 = x;
  return xn;
}

OptResult solve(const Problem& problem, const OptSettings& settings) {
  if (settings.max_iters < 0)
    throw std::invalid_argument("optimizer: max_iters must be >= 0");
  if (!(settings.move_limit > 0.0))
    throw std::invalid_argument("optimizer: move_limit must be positive");
  if (settings.history_stride < 1)
    throw std::invalid_argument("optimizer: history_stride must be >= 1");
  if (!(settings.initial_rho > 0.0 && settings.initial_rho < 1.0))
    throw std::invalid_argument("optimizer: initial_rho must lie in (0, 1)");

  const int n = problem.grid.design_count();
  const double lb = problem.beta_lb;
  const double change_tol = settings.design_change_tol >= 0.0
                                ? settings.design_change_tol
                                : 1e-4 * std::abs(lb);

  DesignField design;
  design.beta_lb = lb;
  design.beta.assign(n, std::max(lb, std::log1p(-settings.initial_rho)));

  DensityField rho = density_from_beta(design, problem.topo);
  ObjectiveReport obj = problem.evaluate(rho);
  VolumeReport vol = volume_constraint(rho, problem.topo, problem.vf,
                                       problem.dummy_rows_in_volume);

  double gmax = 0.0;
  for (double g : obj.grad_beta) gmax = std::max(gmax, std::abs(g));
  const double obj_scale = gmax > 0.0 ? 1.0 / gmax : 1.0;

  OptResult result;
  result.history.termination = "max_iters";
  auto record = [&](int iter, double change) {
    result.history.records.push_back(
        {iter, obj.value, vol.volume_fraction,
         grayness(rho, problem.topo), change,
         std::max(0.0, vol.volume_fraction - problem.vf)});
    if (settings.on_record) settings.on_record(result.history.records.back());
  };
  record(0, 0.0);

  MmaState state;
  state.reset(n, lb);

  std::vector<double> df0(n), df1(n);
  int iter = 0;
  double last_change = 0.0;
  bool last_recorded = true;
  while (iter < settings.max_iters) {
    ++iter;
    for (int j = 0; j < n; ++j) {
      df0[j] = obj_scale * obj.grad_beta[j];
      df1[j] = vol.grad_beta[j] / vol.total_volume;
    }
    const double mu = kBarrier0 * std::pow(kBarrierDecay, iter);
    const bool barrier_on = mu > kBarrierFloor;
    if (barrier_on) {
      for (int j = 0; j < n; ++j) {
        const double to_ub = kBarrierSoft - design.beta[j];
        const double to_lb = kBarrierSoft + design.beta[j] - lb;
        df0[j] += mu * (1.0 / to_ub - 1.0 / to_lb);
      }
    }
    const double f1 = vol.value / vol.total_volume;

    std::vector<double> next =
        settings.algo == OptAlgo::mma
            ? mma_step(state, design.beta, df0, f1, df1, settings)
            : pg_step(state, design.beta, df0, f1, df1, settings);

    last_change = 0.0;
    for (int j = 0; j < n; ++j)
      last_change = std::max(last_change, std::abs(next[j] - design.beta[j]));
    design.beta = std::move(next);

    rho = density_from_beta(design, problem.topo);
    obj = problem.evaluate(rho);
    vol = volume_constraint(rho, problem.topo, problem.vf,
                            problem.dummy_rows_in_volume);

    last_recorded = (iter % settings.history_stride == 0);
    if (last_recorded) record(iter, last_change);

    const double viol = std::max(0.0, vol.value / vol.total_volume);
    double stat = 0.0;
    for (int j = 0; j < n; ++j) {
      const double g = obj_scale * obj.grad_beta[j] +
                       state.dual * vol.grad_beta[j] / vol.total_volume;
      stat = std::max(stat, std::abs(design.beta[j] -
                                     clamp(design.beta[j] - g, lb, 0.0)));
    }
    const double kkt = std::max({stat, viol,
                                 std::abs(state.dual * vol.value /
                                          vol.total_volume)});
    // While the barrier still shapes steps, small changes reflect its
    // equilibrium rather than stationarity of the true problem.
    if (barrier_on) continue;
    if (viol <= 1e-3 && last_change < change_tol) {
      result.history.termination = "design_change";
      break;
    }
    if (viol <= 1e-3 && kkt < settings.kkt_tol) {
      result.history.termination = "kkt";
      break;
    }
  }
  if (!last_recorded) record(iter, last_change);

  result.history.iterations = iter;
  result.design = std::move(design);
  result.rho = std::move(rho);
  result.report = std::move(obj);
  return result;
}

}  // namespace nfpto
