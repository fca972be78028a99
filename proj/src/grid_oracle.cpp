#include "keig/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "keig/errors.hpp"

namespace keig {

namespace {

std::vector<double> uniform_nodes(const StateSpace& space, int count) {
  std::vector<double> nodes(count);
  const double step = space.length() / (count - 1);
  for (int i = 0; i < count; ++i) nodes[i] = space.lower + step * i;
  nodes.back() = space.upper;
  return nodes;
}

// Trapezoid masses against the uniform probability on the space: sum is 1.
std::vector<double> trapezoid_masses(int count) {
  std::vector<double> w(count, 1.0 / (count - 1));
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

int nearest_node(const std::vector<double>& nodes, double x) {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.begin()) return 0;
  if (it == nodes.end()) return static_cast<int>(nodes.size()) - 1;
  const int hi = static_cast<int>(it - nodes.begin());
  return (x - nodes[hi - 1] <= nodes[hi] - x) ? hi - 1 : hi;
}

}  // namespace

GridOperator build_grid_operator(const DominatedKernelModel& model, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  GridOperator op;
  op.model = model;
  op.nodes = uniform_nodes(model.space, grid_size);
  op.quad_weights = trapezoid_masses(grid_size);
  op.g_values.resize(grid_size);
  for (int i = 0; i < grid_size; ++i) op.g_values[i] = std::exp(model.log_potential(op.nodes[i]));
  op.q_matrix.resize(grid_size, grid_size);
  for (int i = 0; i < grid_size; ++i) {
    const double row_base = model.log_potential(op.nodes[i]) + model.log_source_norm(op.nodes[i]);
    for (int j = 0; j < grid_size; ++j) {
      const double q = std::exp(row_base + model.log_m_pair(op.nodes[i], op.nodes[j]));
      if (!std::isfinite(q)) throw ModelEvalError("kernel density is not finite at a grid node pair");
      op.q_matrix(i, j) = q;
    }
  }
  op.a_matrix = op.q_matrix;
  for (int j = 0; j < grid_size; ++j) op.a_matrix.col(j) *= op.quad_weights[j];
  return op;
}

GridEigenSystem power_iteration(const GridOperator& op, double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  const int n = op.size();
  Eigen::VectorXd h = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd eta =
      Eigen::Map<const Eigen::VectorXd>(op.quad_weights.data(), n);  // start at nu

  auto residual_of = [&](double lambda) {
    const double rh = (op.a_matrix * h - lambda * h).cwiseAbs().maxCoeff() /
                      (lambda * h.cwiseAbs().maxCoeff());
    const double re = (op.a_matrix.transpose() * eta - lambda * eta).cwiseAbs().maxCoeff() /
                      (lambda * eta.cwiseAbs().maxCoeff());
    return std::max(rh, re);
  };

  double lambda = 0.0;
  double prev = -1.0;
  int iters = 0;
  bool converged = false;
  while (iters < max_iter) {
    ++iters;
    Eigen::VectorXd eta_next = op.a_matrix.transpose() * eta;
    lambda = eta_next.sum();  // eta has mass 1, so this is the growth factor
    eta = eta_next / lambda;
    Eigen::VectorXd h_next = op.a_matrix * h;
    h = h_next / h_next.maxCoeff();
    if (prev >= 0.0 && std::abs(lambda - prev) < tol) {
      converged = true;
      break;
    }
    prev = lambda;
  }
  if (!converged) throw NonConvergenceError("power iteration did not converge", residual_of(lambda));

  // Two polishing sweeps tighten the eigenvectors past the eigenvalue stop.
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd eta_next = op.a_matrix.transpose() * eta;
    lambda = eta_next.sum();
    eta = eta_next / lambda;
    Eigen::VectorXd h_next = op.a_matrix * h;
    h = h_next / h_next.maxCoeff();
  }
  h /= eta.dot(h);  // pins the scale: eta(h) = 1

  GridEigenSystem eig;
  eig.lambda_star = lambda;
  eig.h_star.assign(h.data(), h.data() + n);
  eig.eta_star.assign(eta.data(), eta.data() + n);
  eig.iterations = iters;
  eig.residual = residual_of(lambda);
  eig.p_star.resize(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd row = op.a_matrix.row(i).cwiseProduct(h.transpose());
    eig.p_star.row(i) = row / row.sum();  // actual sum, so each row is exactly a distribution
  }
  if (op.model.epsilon_bounds) {
    eig.rho = 1.0 - op.model.epsilon_bounds->first / op.model.epsilon_bounds->second;
  }
  return eig;
}

double eval_h_star(const GridOperator& op, const GridEigenSystem& eig, double x) {
  double acc = 0.0;
  for (int j = 0; j < op.size(); ++j) {
    acc += std::exp(op.model.log_density_q(x, op.nodes[j])) * op.quad_weights[j] * eig.h_star[j];
  }
  return acc / eig.lambda_star;
}

std::vector<double> met_decay_profile(const GridOperator& op, const GridEigenSystem& eig,
                                      int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  const int n = op.size();
  const Eigen::MatrixXd b = op.a_matrix / eig.lambda_star;
  const Eigen::Map<const Eigen::VectorXd> h(eig.h_star.data(), n);
  const Eigen::Map<const Eigen::VectorXd> eta(eig.eta_star.data(), n);
  const Eigen::MatrixXd limit = h * eta.transpose();
  std::vector<double> profile;
  profile.reserve(n_max);
  Eigen::MatrixXd power = b;
  for (int step = 1; step <= n_max; ++step) {
    profile.push_back((power - limit).cwiseAbs().rowwise().sum().maxCoeff());
    if (step < n_max) power = power * b;
  }
  return profile;
}

namespace {

// Initial masses on the grid; dirac and empirical atoms snap to the nearest node.
Eigen::VectorXd initial_masses(const GridOperator& op, const InitialLaw& initial) {
  const int n = op.size();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  switch (initial.kind) {
    case InitialLaw::Kind::uniform:
      mu = Eigen::Map<const Eigen::VectorXd>(op.quad_weights.data(), n);
      break;
    case InitialLaw::Kind::dirac:
      mu[nearest_node(op.nodes, initial.point)] = 1.0;
      break;
    case InitialLaw::Kind::empirical: {
      if (initial.atoms.empty()) throw std::invalid_argument("empirical law has no atoms");
      const double share = 1.0 / static_cast<double>(initial.atoms.size());
      for (double a : initial.atoms) mu[nearest_node(op.nodes, a)] += share;
      break;
    }
  }
  return mu;
}

}  // namespace

std::vector<double> deterministic_h_pn(const GridOperator& op, const InitialLaw& initial,
                                       int p, int n) {
  if (p < 0 || n < 0 || p > n) throw std::invalid_argument("need 0 <= p <= n");
  const int size = op.size();
  // Survival vector Q^(n-p)(1), rescaled per step; the scale cancels below.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(size);
  for (int k = 0; k < n - p; ++k) {
    w = op.a_matrix * w;
    w /= w.maxCoeff();
  }
  // Evolved normalized measure at time p.
  Eigen::VectorXd eta = initial_masses(op, initial);
  for (int k = 0; k < p; ++k) {
    eta = op.a_matrix.transpose() * eta;
    eta /= eta.sum();
  }
  w /= eta.dot(w);
  return std::vector<double>(w.data(), w.data() + size);
}

double iterate_expectation(const GridOperator& op, const InitialLaw& initial,
                           const std::function<double(double)>& phi, int n) {
  if (n < 0) throw std::invalid_argument("n must be non-negative");
  const int size = op.size();

  if (initial.kind == InitialLaw::Kind::empirical) {
    if (initial.atoms.empty()) throw std::invalid_argument("empirical law has no atoms");
    double acc = 0.0;
    for (double a : initial.atoms) acc += iterate_expectation(op, InitialLaw::dirac(a), phi, n);
    return acc / static_cast<double>(initial.atoms.size());
  }

  if (n == 0) {
    if (initial.kind == InitialLaw::Kind::dirac) return phi(initial.point);
    double acc = 0.0;
    for (int i = 0; i < size; ++i) acc += op.quad_weights[i] * phi(op.nodes[i]);
    return acc;
  }

  // v = A^k phi with per-step rescaling to dodge under/overflow; k is n-1 for
  // a dirac start (the first transition is applied exactly from the point)
  // and n for a uniform start.
  const bool dirac = initial.kind == InitialLaw::Kind::dirac;
  const int steps = dirac ? n - 1 : n;
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = phi(op.nodes[i]);
  double log_scale = 0.0;
  for (int k = 0; k < steps; ++k) {
    v = op.a_matrix * v;
    const double top = v.cwiseAbs().maxCoeff();
    if (top == 0.0) return 0.0;
    v /= top;
    log_scale += std::log(top);
  }

  double inner = 0.0;
  if (dirac) {
    for (int j = 0; j < size; ++j) {
      inner += std::exp(op.model.log_density_q(initial.point, op.nodes[j])) *
               op.quad_weights[j] * v[j];
    }
  } else {
    for (int i = 0; i < size; ++i) inner += op.quad_weights[i] * v[i];
  }
  if (inner == 0.0) return 0.0;
  const double sign = inner > 0.0 ? 1.0 : -1.0;
  return sign * std::exp(log_scale + std::log(std::abs(inner)));
}

ProbBracket brute_force_deviation_prob(const DominatedKernelModel& model,
                                       const std::function<double(double)>& reward, int m,
                                       double delta, double x0, int sum_bins,
                                       int state_bins) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (sum_bins < 1) throw std::invalid_argument("sum_bins must be at least 1");
  if (state_bins < 2) throw std::invalid_argument("state_bins must be at least 2");
  if (!model.space.contains(x0)) throw std::invalid_argument("x0 outside the state space");

  const std::vector<double> nodes = uniform_nodes(model.space, state_bins);
  const std::vector<double> masses = trapezoid_masses(state_bins);
  // Reward extremes over each node's cell, scanned at a few points. A state
  // that lands anywhere in the cell earns between u_lo and u_hi, so rounding
  // against the cell extremes keeps the bracket honest about states that
  // straddle a level set of the reward. Exact for piecewise monotone rewards
  // whose features are wider than a cell.
  const double half_cell = 0.5 * model.space.length() / (state_bins - 1);
  std::vector<double> u_lo(state_bins), u_hi(state_bins);
  for (int j = 0; j < state_bins; ++j) {
    const double a = std::max(model.space.lower, nodes[j] - half_cell);
    const double b = std::min(model.space.upper, nodes[j] + half_cell);
    double lo = reward(a), hi = lo;
    for (int k = 1; k <= 4; ++k) {
      const double v = reward(a + (b - a) * k / 4.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    u_lo[j] = lo;
    u_hi[j] = hi;
  }
  const double u_min = *std::min_element(u_lo.begin(), u_lo.end());
  const double u_max = *std::max_element(u_hi.begin(), u_hi.end());
  if (delta >= u_max) return {0.0, 0.0};  // the strict event cannot happen
  if (delta < u_min) return {1.0, 1.0};

  // Mutation transition matrix on the state grid, rows forced to sum to 1.
  Eigen::MatrixXd t_mat(state_bins, state_bins);
  for (int j = 0; j < state_bins; ++j) {
    const double row_base = model.log_source_norm(nodes[j]);
    for (int k = 0; k < state_bins; ++k) {
      const double d = std::exp(row_base + model.log_m_pair(nodes[j], nodes[k])) * masses[k];
      if (!std::isfinite(d)) throw ModelEvalError("mutation density is not finite on the grid");
      t_mat(j, k) = d;
    }
    t_mat.row(j) /= t_mat.row(j).sum();
  }
  Eigen::VectorXd start_row(state_bins);
  for (int k = 0; k < state_bins; ++k) {
    start_row[k] = std::exp(model.log_source_norm(x0) + model.log_m_pair(x0, nodes[k])) * masses[k];
  }
  start_row /= start_row.sum();

  const double unit = (u_max - u_min) / static_cast<double>(sum_bins);
  const double tau = (delta - u_min) * static_cast<double>(m) / unit;  // threshold in units
  // One DP per rounding side. Rounding rewards up and the threshold down
  // overstates every crossing, so that side is a certified upper bound;
  // the opposite rounding is the lower bound.
  auto run_side = [&](bool upper) {
    std::vector<long long> units(state_bins);
    for (int j = 0; j < state_bins; ++j) {
      const double scaled = ((upper ? u_hi[j] : u_lo[j]) - u_min) / unit;
      units[j] = upper ? static_cast<long long>(std::ceil(scaled - 1e-9))
                       : static_cast<long long>(std::floor(scaled + 1e-9));
      units[j] = std::clamp(units[j], 0LL, static_cast<long long>(sum_bins));
    }
    const long long t = upper ? static_cast<long long>(std::floor(tau - 1e-9)) + 1
                              : static_cast<long long>(std::floor(tau + 1e-9)) + 1;
    if (t <= 0) return 1.0;
    if (t > static_cast<long long>(m) * sum_bins) return 0.0;

    // value(j, s): crossing probability from state j at this time with s
    // units banked; s = t is absorbing, so column t holds ones.
    const int cols = static_cast<int>(t) + 1;
    Eigen::MatrixXd value = Eigen::MatrixXd::Zero(state_bins, cols);
    for (int j = 0; j < state_bins; ++j) {
      value(j, cols - 1) = 1.0;
    }
    // At the final time only the bank matters; seed and walk back to time 1.
    for (int p = m; p >= 2; --p) {
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(state_bins, cols);
      next.col(cols - 1).setOnes();
      const long long reachable = static_cast<long long>(p - 1) * sum_bins;
      const int s_top = static_cast<int>(std::min<long long>(reachable, t - 1));
      Eigen::VectorXd g(state_bins);
      for (int s = 0; s <= s_top; ++s) {
        for (int j = 0; j < state_bins; ++j) {
          const long long banked = std::min<long long>(s + units[j], t);
          g[j] = value(j, static_cast<int>(banked));
        }
        next.col(s).noalias() = t_mat * g;
      }
      value.swap(next);
    }
    double prob = 0.0;
    for (int j = 0; j < state_bins; ++j) {
      const long long banked = std::min<long long>(units[j], t);
      prob += start_row[j] * value(j, static_cast<int>(banked));
    }
    return prob;
  };

  ProbBracket out;
  out.upper = run_side(true);
  out.lower = run_side(false);
  out.lower = std::min(out.lower, out.upper);
  return out;
}

}  // namespace keig
