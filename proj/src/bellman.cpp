#include "keig/bellman.hpp"

#include <cmath>
#include <stdexcept>

namespace keig {

ValueFunctionEstimate estimate_value_function(const ForwardTrajectory& traj,
                                              const BackwardSolution& backward,
                                              const std::vector<double>& eval_points,
                                              int window) {
  ValueFunctionEstimate out;
  out.eval_points = eval_points;
  out.num_particles = traj.num_particles;
  out.n = backward.n;
  out.window = window;
  out.v_hat.reserve(eval_points.size());
  for (double x : eval_points) {
    out.v_hat.push_back(-std::log(window_average_h(traj, backward, x, window)));
  }
  out.varsigma_hat = -log_lambda_average(traj, backward.n);
  return out;
}

namespace {

// Quadrature mass of the mutation kernel, m(x_i, y_j) w_j on the grid.
std::vector<double> mutation_row_raw(const GridOperator& op, int i) {
  const int size = op.size();
  std::vector<double> row(size);
  const double base = op.model.log_source_norm(op.nodes[i]);
  for (int j = 0; j < size; ++j) {
    row[j] =
        std::exp(base + op.model.log_m_pair(op.nodes[i], op.nodes[j])) * op.quad_weights[j];
  }
  return row;
}

// Same row renormalized to an exact probability vector, for the
// change-of-measure identity which needs proper distributions.
std::vector<double> mutation_row(const GridOperator& op, int i) {
  std::vector<double> row = mutation_row_raw(op, i);
  double total = 0.0;
  for (double v : row) total += v;
  for (double& v : row) v /= total;
  return row;
}

}  // namespace

double bellman_residual(const GridEigenSystem& eig, const GridOperator& op) {
  const int size = op.size();
  const double varsigma = -std::log(eig.lambda_star);
  double worst = 0.0;
  for (int i = 0; i < size; ++i) {
    // The raw quadrature row keeps this consistent with the discretized
    // operator the eigen-system solves, so the residual measures
    // convergence rather than quadrature error.
    const std::vector<double> row = mutation_row_raw(op, i);
    double moved = 0.0;  // M(e^{-V}) = M(h)
    for (int j = 0; j < size; ++j) moved += row[j] * eig.h_star[j];
    const double v_here = -std::log(eig.h_star[i]);
    const double residual =
        v_here + varsigma + std::log(op.g_values[i]) + std::log(moved);
    worst = std::max(worst, std::abs(residual));
  }
  return worst;
}

double jensen_gap(const GridOperator& op, const std::vector<double>& v,
                  const std::vector<double>& h_twist, int i) {
  const int size = op.size();
  if (static_cast<int>(v.size()) != size || static_cast<int>(h_twist.size()) != size) {
    throw std::invalid_argument("grid function size mismatch");
  }
  const std::vector<double> row = mutation_row(op, i);
  double twist_mass = 0.0;
  for (int j = 0; j < size; ++j) twist_mass += row[j] * h_twist[j];
  double kl = 0.0;
  double twisted_v = 0.0;
  double moved_exp = 0.0;
  for (int j = 0; j < size; ++j) {
    const double twisted = row[j] * h_twist[j] / twist_mass;
    if (twisted > 0.0) kl += twisted * std::log(twisted / row[j]);
    twisted_v += twisted * v[j];
    moved_exp += row[j] * std::exp(-v[j]);
  }
  const double u_here = -std::log(op.g_values[i]);
  const double lhs = u_here + kl + twisted_v;
  const double rhs = u_here - std::log(moved_exp);
  return lhs - rhs;
}

}  // namespace keig
