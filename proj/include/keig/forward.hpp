#pragma once

// Forward interacting-particle pass: multinomial selection proportional to G,
// mutation by M, per-step eigenvalue factors, and the cached column sums that
// the backward recursion and twisted-row queries divide by.

#include <cstdint>
#include <vector>

#include "keig/kernel.hpp"

namespace keig {

struct ForwardTrajectory {
  DominatedKernelModel model;
  InitialLaw initial;
  std::vector<EmpiricalMeasure> ensembles;  // levels p = 0..2n
  std::vector<std::vector<double>> log_g;   // log G at each particle, same shape
  std::vector<double> log_lambda;           // log[(1/N) sum_i G(zeta_p^i)]
  // Entry [p][j] = log sum_i q(zeta_{p-1}^i, zeta_p^j); level 0 stays empty.
  std::vector<std::vector<double>> log_backward_denominators;
  int num_particles = 0;
  int horizon = 0;  // 2n
  std::uint64_t seed = 0;
};

// Runs the full 2n-step pass. initial must be dirac (inside the space) or
// uniform. Throws std::invalid_argument on N < 1 or odd/short two_n, and
// DegenerateWeightsError if a selection level has no mass (impossible for
// strictly positive G, kept as a guard).
ForwardTrajectory run_forward(const DominatedKernelModel& model, int num_particles,
                              int two_n, const InitialLaw& initial, std::uint64_t seed);

// Mean of the first n stored log lambda values; 1 <= n <= horizon.
double log_lambda_average(const ForwardTrajectory& traj, int n);

namespace detail {

// One production selection+mutation step: draws `count` particles targeting
// the G-weighted mixture of the previous level. Factored out so the sampling
// law itself is testable with many replicate draws.
std::vector<double> selection_mutation_step(const DominatedKernelModel& model,
                                            const std::vector<double>& prev_states,
                                            const std::vector<double>& prev_log_g,
                                            int level, std::uint64_t seed, int count);

// Column sums log sum_i q(prev_i, next_j) for one level, in log domain.
std::vector<double> denominator_columns(const DominatedKernelModel& model,
                                        const std::vector<double>& prev_states,
                                        const std::vector<double>& prev_log_g,
                                        const std::vector<double>& next_states);

}  // namespace detail

}  // namespace keig
