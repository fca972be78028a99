#pragma once

// Backward pass over a frozen forward trajectory: eigenfunction values on the
// particle clouds for levels n..2n, off-grid evaluation, window averaging,
// twisted transition rows, the conditional twisted chain, and the unbiased
// semigroup functional.

#include <cstdint>
#include <functional>
#include <vector>

#include "keig/forward.hpp"

namespace keig {

struct BackwardSolution {
  int n = 0;  // half horizon; layer k holds level n+k
  std::vector<std::vector<double>> h_values;  // levels n..2n, entry i at zeta_p^i
  std::vector<double> normalizers;            // per-layer particle mean (should be 1)

  const std::vector<double>& layer(int p) const { return h_values[p - n]; }
};

BackwardSolution run_backward(const ForwardTrajectory& traj);

// h at an arbitrary state, one recursion step off the stored layer p+1.
// Valid for p in [n, 2n-1] and x inside the state space.
double eval_h(const ForwardTrajectory& traj, const BackwardSolution& backward, int p,
              double x);

// Mean of eval_h over the window p = n..n+m-1; requires 1 <= m <= n.
double window_average_h(const ForwardTrajectory& traj, const BackwardSolution& backward,
                        double x, int m);

struct TwistedRow {
  double source = 0.0;  // the conditioning state x
  int time = 0;         // level p; probabilities[j] targets atom zeta_p^j
  std::vector<double> probabilities;
};

// Twisted transition out of x onto the level-p cloud, n+1 <= p <= 2n. The
// normalizer is the running sum of the unnormalized weights, which equals
// h_{p-1}(x) algebraically, so the row sums to 1 at rounding level.
TwistedRow twisted_row(const ForwardTrajectory& traj, const BackwardSolution& backward,
                       int p, double x);

struct TwistedChainSample {
  std::vector<double> path;      // m+1 states, path[0] = x0
  std::vector<int> atom_indices; // m entries, index of each visited atom
  double log_correction = 0.0;
};

// Draws the conditioned chain X_0 = x0, X_k ~ twisted row at level n+k, for
// k = 1..m (m <= n), and returns the log of the importance factor
//   sum_{k<m} [log lambda_{n+k} - log G(X_k)] + log h_n(X_0) - log h_{n+m}(X_m).
// Deterministic given the seed. m = 0 returns the bare start, correction 0.
TwistedChainSample sample_twisted_chain(const ForwardTrajectory& traj,
                                        const BackwardSolution& backward, double x0,
                                        int m, std::uint64_t seed);

// Unbiased functional mu' Q^(n)(phi) of the frozen trajectory: layer weights
// advance by one lambda factor and one normalized transition per step. For
// mu' equal to the level-0 empirical law this telescopes to the lambda
// product times the level-n mean of phi.
double random_semigroup_apply(const ForwardTrajectory& traj, const InitialLaw& mu_prime,
                              const std::function<double(double)>& phi, int n);

// log of the particle estimate of eta_p^N applied through n-p semigroup
// steps to the unit function; algebraically equal to sum of log lambda over
// levels p..n-1. Requires 0 <= p < n <= horizon.
double log_particle_semigroup_mass(const ForwardTrajectory& traj, int p, int n);

struct PathwiseRatioReport {
  double min_h = 0.0;
  double max_h = 0.0;
  double lower_bound = 0.0;  // eps- / eps+
  double upper_bound = 0.0;  // eps+ / eps-
  bool pass = false;
};

// Checks the two-sided envelope eps-/eps+ <= h <= eps+/eps- over every stored
// layer value and over eval_h at the probe points for each window level.
// Throws UnsupportedDiagnostic when the model declares no density bounds.
PathwiseRatioReport pathwise_ratio_diagnostic(const ForwardTrajectory& traj,
                                              const BackwardSolution& backward,
                                              const std::vector<double>& probe_points);

}  // namespace keig
