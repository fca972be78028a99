#pragma once

// Deviation-probability estimators for the bounded-drift Gaussian model:
// naive Monte Carlo, exactly-twisted sampling on the oracle grid, and the
// particle conditional estimator, plus the tilted-growth-rate curve, its
// convex dual, and finite-difference slopes.

#include <cstdint>
#include <vector>

#include "keig/backward.hpp"
#include "keig/forward.hpp"
#include "keig/grid_oracle.hpp"

namespace keig {

struct EstimateStats {
  double mean = 0.0;
  double rel_variance = 0.0;  // sample variance / mean^2
  int replications = 0;
  bool rel_var_defined = false;  // false when the mean is exactly 0
};

// Plain Monte Carlo of P_x0( sum_{p=1..m} reward(X_p) > m delta ) under the
// model's mutation chain. L >= 2.
EstimateStats naive_is(const DominatedKernelModel& model, int m, double delta, int L,
                       double x0, std::uint64_t seed);

// Importance sampling from the grid twisted kernel: chains move on the
// oracle nodes (x0 snapped to the nearest one), each path reweighted by
// lambda^m h(X_0) / ( h(X_m) prod_{p<m} G(X_p) ).
EstimateStats twisted_exact_is(const GridOperator& op, const GridEigenSystem& eig, int m,
                               double delta, int L, double x0, std::uint64_t seed);

// L conditioned chains on one frozen particle system; each contributes
// indicator * exp(log correction). Unbiased once averaged over independent
// trajectories as well.
EstimateStats conditional_particle_is(const ForwardTrajectory& traj,
                                      const BackwardSolution& backward, int m,
                                      double delta, int L, double x0,
                                      std::uint64_t seed);

struct LambdaCurve {
  std::vector<double> alphas;          // sorted
  std::vector<double> log_lambda_hat;  // seed-averaged growth-rate estimates
  std::vector<double> stderr_hat;      // standard error of each mean
  int num_particles = 0;
  int n = 0;
  int seeds_per_point = 0;
};

// Particle growth-rate estimate per tilt strength, averaged over seeds.
LambdaCurve lambda_curve(double c, const std::vector<double>& alphas, int num_particles,
                         int n, int seeds, std::uint64_t seed);

struct RatePoint {
  double value = 0.0;
  double argmax_alpha = 0.0;
};

// Convex dual on the curve's grid: max_alpha [ t*alpha - Lambda(alpha) ].
RatePoint rate_function(const LambdaCurve& curve, double t);

// Central difference of the (linearly interpolated) curve at alpha.
double lambda_derivative(const LambdaCurve& curve, double alpha, double step);

// No interior point above the chord of its neighbors by more than
// `sigmas` pooled standard errors (plus rounding slack).
bool lambda_curve_convex(const LambdaCurve& curve, double sigmas = 3.0);

}  // namespace keig
