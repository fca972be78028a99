#pragma once

// Risk-sensitive value-function layer: V = -log h and average cost
// varsigma = -log lambda, read off the particle estimates, plus oracle-side
// optimality diagnostics.

#include <vector>

#include "keig/backward.hpp"
#include "keig/forward.hpp"
#include "keig/grid_oracle.hpp"

namespace keig {

struct ValueFunctionEstimate {
  std::vector<double> eval_points;
  std::vector<double> v_hat;
  double varsigma_hat = 0.0;
  int num_particles = 0;
  int n = 0;
  int window = 0;
};

// v_hat = -log window-averaged h at each point; varsigma_hat = minus the mean
// of the first n log-lambda factors. window <= n.
ValueFunctionEstimate estimate_value_function(const ForwardTrajectory& traj,
                                              const BackwardSolution& backward,
                                              const std::vector<double>& eval_points,
                                              int window);

// Sup over grid nodes of |V(x) + varsigma + log G(x) + log M(e^-V)(x)| for the
// converged eigen-solution: the fixed-point equation the value function must
// solve, evaluated with the model's own transition density.
double bellman_residual(const GridEigenSystem& eig, const GridOperator& op);

// LHS - RHS of the twisting inequality at node i:
//   U + KL(twisted row || M row) + twisted-mean of V  >=  U - log M(e^-V),
// for an arbitrary positive twist h_twist and arbitrary V on the grid.
// Non-negative up to rounding for every choice.
double jensen_gap(const GridOperator& op, const std::vector<double>& v,
                  const std::vector<double>& h_twist, int i);

}  // namespace keig
