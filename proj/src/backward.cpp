#include "keig/backward.hpp"

#include <cmath>
#include <stdexcept>

#include "keig/errors.hpp"
#include "keig/logops.hpp"
#include "keig/parallel.hpp"
#include "keig/rng.hpp"

namespace keig {

namespace {

double log_source_at(const ForwardTrajectory& traj, int p, int i) {
  return traj.log_g[p][i] + traj.model.log_source_norm(traj.ensembles[p].points[i]);
}

// One backward step: h at (level p, state x) from the stored level p+1.
double backward_step(const ForwardTrajectory& traj, const std::vector<double>& h_next,
                     int p, double x) {
  const auto& next = traj.ensembles[p + 1].points;
  const auto& denom = traj.log_backward_denominators[p + 1];
  const double source =
      traj.model.log_potential(x) + traj.model.log_source_norm(x);
  double acc = 0.0;
  for (std::size_t j = 0; j < next.size(); ++j) {
    acc += std::exp(source + traj.model.log_m_pair(x, next[j]) - denom[j]) * h_next[j];
  }
  return acc;
}

}  // namespace

BackwardSolution run_backward(const ForwardTrajectory& traj) {
  const int two_n = traj.horizon;
  const int n = two_n / 2;
  const int num = traj.num_particles;
  BackwardSolution sol;
  sol.n = n;
  sol.h_values.resize(n + 1);
  sol.normalizers.resize(n + 1);
  sol.h_values[n].assign(num, 1.0);
  sol.normalizers[n] = 1.0;

  for (int p = two_n - 1; p >= n; --p) {
    const auto& states = traj.ensembles[p].points;
    const auto& next = traj.ensembles[p + 1].points;
    const auto& denom = traj.log_backward_denominators[p + 1];
    const auto& h_next = sol.h_values[p + 1 - n];
    auto& h_here = sol.h_values[p - n];
    h_here.resize(num);
    parallel_for(static_cast<std::size_t>(num), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double source = log_source_at(traj, p, static_cast<int>(i));
        double acc = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
          acc += std::exp(source + traj.model.log_m_pair(states[i], next[j]) - denom[j]) *
                 h_next[j];
        }
        h_here[i] = acc;
      }
    });
    double mean = 0.0;
    for (double v : h_here) mean += v;
    sol.normalizers[p - n] = mean / static_cast<double>(num);
  }
  return sol;
}

double eval_h(const ForwardTrajectory& traj, const BackwardSolution& backward, int p,
              double x) {
  const int n = backward.n;
  if (p < n || p >= 2 * n) throw std::invalid_argument("level outside the stored window");
  if (!traj.model.space.contains(x)) throw std::invalid_argument("state outside the space");
  return backward_step(traj, backward.layer(p + 1), p, x);
}

double window_average_h(const ForwardTrajectory& traj, const BackwardSolution& backward,
                        double x, int m) {
  if (m < 1 || m > backward.n) throw std::invalid_argument("window length out of range");
  double acc = 0.0;
  for (int p = backward.n; p < backward.n + m; ++p) acc += eval_h(traj, backward, p, x);
  return acc / static_cast<double>(m);
}

TwistedRow twisted_row(const ForwardTrajectory& traj, const BackwardSolution& backward,
                       int p, double x) {
  const int n = backward.n;
  if (p < n + 1 || p > 2 * n) throw std::invalid_argument("level outside the stored window");
  if (!traj.model.space.contains(x)) throw std::invalid_argument("state outside the space");
  const auto& atoms = traj.ensembles[p].points;
  const auto& denom = traj.log_backward_denominators[p];
  const auto& h_here = backward.layer(p);
  const double source = traj.model.log_potential(x) + traj.model.log_source_norm(x);
  TwistedRow row;
  row.source = x;
  row.time = p;
  row.probabilities.resize(atoms.size());
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double w =
        std::exp(source + traj.model.log_m_pair(x, atoms[j]) - denom[j]) * h_here[j];
    row.probabilities[j] = w;
    total += w;
  }
  if (total <= 0.0) throw DegenerateWeightsError("twisted row has no mass");
  for (double& w : row.probabilities) w /= total;
  return row;
}

TwistedChainSample sample_twisted_chain(const ForwardTrajectory& traj,
                                        const BackwardSolution& backward, double x0,
                                        int m, std::uint64_t seed) {
  const int n = backward.n;
  if (m < 0 || m > n) throw std::invalid_argument("chain length out of range");
  if (!traj.model.space.contains(x0)) throw std::invalid_argument("start outside the space");
  TwistedChainSample out;
  out.path.push_back(x0);
  if (m == 0) return out;  // empty product and the h ratio cancel exactly

  double log_corr = traj.log_lambda[n] - traj.model.log_potential(x0) +
                    std::log(eval_h(traj, backward, n, x0));
  double x = x0;
  for (int k = 1; k <= m; ++k) {
    const TwistedRow row = twisted_row(traj, backward, n + k, x);
    RngStream pick(seed, StreamPurpose::chain, static_cast<std::uint64_t>(n + k), 0);
    const int j = CategoricalTable(row.probabilities).sample(pick);
    x = traj.ensembles[n + k].points[j];
    out.path.push_back(x);
    out.atom_indices.push_back(j);
    if (k < m) log_corr += traj.log_lambda[n + k] - traj.log_g[n + k][j];
  }
  log_corr -= std::log(backward.layer(n + m)[out.atom_indices.back()]);
  out.log_correction = log_corr;
  return out;
}

namespace {

// Advances layer log-weights from level p to p+1:
//   out(j) = log lambda_p - D_{p+1,j} + lse_k( ell(k) + log q(zeta_p^k, zeta_{p+1}^j) ).
std::vector<double> advance_layer(const ForwardTrajectory& traj,
                                  const std::vector<double>& ell, int p) {
  const auto& prev = traj.ensembles[p].points;
  const auto& next = traj.ensembles[p + 1].points;
  const auto& denom = traj.log_backward_denominators[p + 1];
  std::vector<double> source(prev.size());
  for (std::size_t k = 0; k < prev.size(); ++k) {
    source[k] = ell[k] + log_source_at(traj, p, static_cast<int>(k));
  }
  std::vector<double> out(next.size());
  parallel_for(next.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> row(prev.size());
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t k = 0; k < prev.size(); ++k) {
        row[k] = source[k] + traj.model.log_m_pair(prev[k], next[j]);
      }
      out[j] = traj.log_lambda[p] - denom[j] + log_sum_exp(row);
    }
  });
  return out;
}

// log mu'( q(., y) ) for each level-1 atom y.
std::vector<double> initial_log_weights(const ForwardTrajectory& traj,
                                        const InitialLaw& mu_prime) {
  const auto& atoms = traj.ensembles[1].points;
  const auto& model = traj.model;
  std::vector<double> out(atoms.size());
  switch (mu_prime.kind) {
    case InitialLaw::Kind::dirac:
      if (!model.space.contains(mu_prime.point)) {
        throw std::invalid_argument("dirac point outside the space");
      }
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        out[j] = model.log_density_q(mu_prime.point, atoms[j]);
      }
      break;
    case InitialLaw::Kind::empirical: {
      if (mu_prime.atoms.empty()) throw std::invalid_argument("empirical law has no atoms");
      std::vector<double> row(mu_prime.atoms.size());
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (std::size_t k = 0; k < mu_prime.atoms.size(); ++k) {
          row[k] = model.log_density_q(mu_prime.atoms[k], atoms[j]);
        }
        out[j] = log_sum_exp(row) -
                 std::log(static_cast<double>(mu_prime.atoms.size()));
      }
      break;
    }
    case InitialLaw::Kind::uniform: {
      // Trapezoid quadrature of the x-integral against the uniform law.
      const int grid = 2049;
      const double step = model.space.length() / (grid - 1);
      std::vector<double> row(grid);
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (int k = 0; k < grid; ++k) {
          const double node = model.space.lower + step * k;
          const double mass = (k == 0 || k == grid - 1) ? 0.5 : 1.0;
          row[k] = std::log(mass / (grid - 1)) + model.log_density_q(node, atoms[j]);
        }
        out[j] = log_sum_exp(row);
      }
      break;
    }
  }
  return out;
}

}  // namespace

double random_semigroup_apply(const ForwardTrajectory& traj, const InitialLaw& mu_prime,
                              const std::function<double(double)>& phi, int n) {
  if (n < 1 || n > traj.horizon) throw std::invalid_argument("step count out of range");
  std::vector<double> ell = initial_log_weights(traj, mu_prime);
  const auto& d1 = traj.log_backward_denominators[1];
  for (std::size_t j = 0; j < ell.size(); ++j) {
    ell[j] += traj.log_lambda[0] - d1[j];
  }
  for (int p = 1; p < n; ++p) ell = advance_layer(traj, ell, p);

  const auto& atoms = traj.ensembles[n].points;
  double top = ell[0];
  for (double v : ell) top = std::max(top, v);
  double acc = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    acc += std::exp(ell[j] - top) * phi(atoms[j]);
  }
  if (acc == 0.0) return 0.0;
  const double sign = acc > 0.0 ? 1.0 : -1.0;
  return sign * std::exp(top + std::log(std::abs(acc)));
}

double log_particle_semigroup_mass(const ForwardTrajectory& traj, int p, int n) {
  if (p < 0 || n <= p || n > traj.horizon) throw std::invalid_argument("bad level range");
  // Seed with the level-p empirical law: its q-integrals are exactly the
  // cached denominators, leaving lambda_p - log N per atom.
  std::vector<double> ell(traj.num_particles,
                          traj.log_lambda[p] -
                              std::log(static_cast<double>(traj.num_particles)));
  for (int level = p + 1; level < n; ++level) ell = advance_layer(traj, ell, level);
  return log_sum_exp(ell);
}

PathwiseRatioReport pathwise_ratio_diagnostic(const ForwardTrajectory& traj,
                                              const BackwardSolution& backward,
                                              const std::vector<double>& probe_points) {
  if (!traj.model.epsilon_bounds) {
    throw UnsupportedDiagnostic("model declares no two-sided density bounds");
  }
  const double lo = traj.model.epsilon_bounds->first;
  const double hi = traj.model.epsilon_bounds->second;
  PathwiseRatioReport rep;
  rep.lower_bound = lo / hi;
  rep.upper_bound = hi / lo;
  double lo_seen = backward.h_values[0][0];
  double hi_seen = lo_seen;
  for (const auto& layer : backward.h_values) {
    for (double v : layer) {
      lo_seen = std::min(lo_seen, v);
      hi_seen = std::max(hi_seen, v);
    }
  }
  for (double x : probe_points) {
    for (int p = backward.n; p < 2 * backward.n; ++p) {
      const double v = eval_h(traj, backward, p, x);
      lo_seen = std::min(lo_seen, v);
      hi_seen = std::max(hi_seen, v);
    }
  }
  rep.min_h = lo_seen;
  rep.max_h = hi_seen;
  const double slack = 1e-9;
  rep.pass = lo_seen >= rep.lower_bound * (1.0 - slack) &&
             hi_seen <= rep.upper_bound * (1.0 + slack);
  return rep;
}

}  // namespace keig
