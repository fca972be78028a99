#pragma once

// Deterministic reference solver. A uniform grid with normalized trapezoid
// weights discretizes Q into A(i,j) = q(node_i, node_j) w_j; power iteration
// gives the principal triple (lambda, h, eta) and the twisted transition
// matrix; further routines compute semigroup iterates, finite-horizon h
// approximants, total-variation decay profiles, and certified brackets of
// additive-functional deviation probabilities.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "keig/kernel.hpp"

namespace keig {

struct GridOperator {
  DominatedKernelModel model;        // kept for off-grid rows
  std::vector<double> nodes;         // uniform, endpoints included
  std::vector<double> quad_weights;  // trapezoid masses, sum 1 (the nu masses)
  std::vector<double> g_values;      // G at the nodes
  Eigen::MatrixXd q_matrix;          // q(node_i, node_j)
  Eigen::MatrixXd a_matrix;          // q_matrix * diag(quad_weights)
  int size() const { return static_cast<int>(nodes.size()); }
};

struct GridEigenSystem {
  double lambda_star = 0.0;
  std::vector<double> h_star;        // normalized so sum_i eta_i h_i = 1
  std::vector<double> eta_star;      // probability masses on the nodes
  Eigen::MatrixXd p_star;            // twisted rows, each normalized by its own sum
  std::optional<double> rho;         // 1 - eps-/eps+ when the model declares bounds
  int iterations = 0;
  double residual = 0.0;             // max of the two eigen-equation residuals
};

// Throws ModelEvalError if the density is non-finite at any node pair.
GridOperator build_grid_operator(const DominatedKernelModel& model, int grid_size);

// Simultaneous measure/function power iteration; stops when successive
// eigenvalue estimates differ by less than tol. Throws NonConvergenceError
// (carrying the last residual) past max_iter.
GridEigenSystem power_iteration(const GridOperator& op, double tol = 1e-10,
                                int max_iter = 100000);

// One-step extension of the eigenfunction off the grid: h(x) = Q(h)(x) / lambda.
double eval_h_star(const GridOperator& op, const GridEigenSystem& eig, double x);

// d_n = max_i sum_j |lambda^{-n} A^n(i,j) - h_i eta_j| for n = 1..n_max.
std::vector<double> met_decay_profile(const GridOperator& op, const GridEigenSystem& eig,
                                      int n_max);

// Finite-horizon approximant: Q^{(n-p)}(1) normalized against the p-th
// evolved measure, on the grid.
std::vector<double> deterministic_h_pn(const GridOperator& op, const InitialLaw& initial,
                                       int p, int n);

// mu Q^{(n)}(phi). A dirac start off the grid is handled with an exact
// continuous first row; a uniform start integrates phi against nu.
double iterate_expectation(const GridOperator& op, const InitialLaw& initial,
                           const std::function<double(double)>& phi, int n);

struct ProbBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// Certified brackets of P_x0( sum_{p=1..m} reward(X_p) > m * delta ) for the
// model's mutation chain, by dynamic programming over a state grid times an
// integerized partial-sum grid. Per-step rewards are taken at their extremes
// over each node's grid cell, then rounded up (upper bound) or down (lower
// bound) to whole sum bins, with the threshold rounded the safe way for each
// side; states straddling a reward level set therefore widen the bracket
// instead of biasing it. The state-grid transition rows themselves are
// quadrature approximations, accurate to second order in the cell width.
ProbBracket brute_force_deviation_prob(const DominatedKernelModel& model,
                                       const std::function<double(double)>& reward, int m,
                                       double delta, double x0, int sum_bins,
                                       int state_bins = 257);

}  // namespace keig
