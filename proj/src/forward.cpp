#include "keig/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "keig/errors.hpp"
#include "keig/logops.hpp"
#include "keig/parallel.hpp"
#include "keig/models.hpp"
#include "keig/rng.hpp"

namespace keig {

namespace detail {

std::vector<double> selection_mutation_step(const DominatedKernelModel& model,
                                            const std::vector<double>& prev_states,
                                            const std::vector<double>& prev_log_g,
                                            int level, std::uint64_t seed, int count) {
  const CategoricalTable table(normalize_log_weights(LogWeightVector{prev_log_g}));
  std::vector<double> next(count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream pick(seed, StreamPurpose::selection, static_cast<std::uint64_t>(level), i);
      const int ancestor = table.sample(pick);
      RngStream move(seed, StreamPurpose::mutation, static_cast<std::uint64_t>(level), i);
      next[i] = model.mutate(prev_states[ancestor], move);
    }
  });
  return next;
}

std::vector<double> denominator_columns(const DominatedKernelModel& model,
                                        const std::vector<double>& prev_states,
                                        const std::vector<double>& prev_log_g,
                                        const std::vector<double>& next_states) {
  const std::size_t n_prev = prev_states.size();
  std::vector<double> source(n_prev);  // log G(x_i) + log of M's normalizer at x_i
  for (std::size_t i = 0; i < n_prev; ++i) {
    source[i] = prev_log_g[i] + model.log_source_norm(prev_states[i]);
  }
  std::vector<double> columns(next_states.size());
  parallel_for(next_states.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> row(n_prev);
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < n_prev; ++i) {
        row[i] = source[i] + model.log_m_pair(prev_states[i], next_states[j]);
      }
      columns[j] = log_sum_exp(row);
    }
  });
  return columns;
}

}  // namespace detail

ForwardTrajectory run_forward(const DominatedKernelModel& model, int num_particles,
                              int two_n, const InitialLaw& initial, std::uint64_t seed) {
  if (num_particles < 1) throw std::invalid_argument("need at least one particle");
  if (two_n < 2 || two_n % 2 != 0) throw std::invalid_argument("horizon must be even and >= 2");
  if (initial.kind == InitialLaw::Kind::empirical) {
    throw std::invalid_argument("forward pass starts from dirac or uniform laws only");
  }

  ForwardTrajectory traj;
  traj.model = model;
  traj.initial = initial;
  traj.num_particles = num_particles;
  traj.horizon = two_n;
  traj.seed = seed;
  traj.ensembles.resize(two_n + 1);
  traj.log_g.resize(two_n + 1);
  traj.log_lambda.resize(two_n + 1);
  traj.log_backward_denominators.resize(two_n + 1);

  auto& first = traj.ensembles[0].points;
  first.resize(num_particles);
  parallel_for(static_cast<std::size_t>(num_particles),
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   RngStream draw(seed, StreamPurpose::init, 0, i);
                   first[i] = sample_initial(initial, model.space, draw);
                 }
               });

  const double log_n = std::log(static_cast<double>(num_particles));
  auto score_level = [&](int p) {
    const auto& states = traj.ensembles[p].points;
    auto& lg = traj.log_g[p];
    lg.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) lg[i] = model.log_potential(states[i]);
    traj.log_lambda[p] = log_sum_exp(lg) - log_n;
  };
  score_level(0);

  for (int p = 1; p <= two_n; ++p) {
    const auto& prev = traj.ensembles[p - 1].points;
    traj.ensembles[p].points = detail::selection_mutation_step(
        model, prev, traj.log_g[p - 1], p, seed, num_particles);
    score_level(p);
    traj.log_backward_denominators[p] = detail::denominator_columns(
        model, prev, traj.log_g[p - 1], traj.ensembles[p].points);
  }
  return traj;
}

double log_lambda_average(const ForwardTrajectory& traj, int n) {
  if (n < 1 || n > traj.horizon) throw std::invalid_argument("average length out of range");
  double acc = 0.0;
  for (int p = 0; p < n; ++p) acc += traj.log_lambda[p];
  return acc / static_cast<double>(n);
}

}  // namespace keig
