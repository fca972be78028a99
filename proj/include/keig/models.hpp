#pragma once

// The three built-in kernels: a slab neutron-transport chain with a Laplace
// move and absorption potential, a truncated square-root diffusion step with a
// two-level running cost, and a mean-reverting Gaussian chain with a clamped
// reward and exponential tilt. Each returns the full dominated-kernel bundle
// with nu = uniform on the model's interval.

#include "keig/kernel.hpp"

namespace keig {

// Double-well absorption term: delta * p(2x/3 - 1/2) with the fixed sixth
// degree polynomial p(t) = 1e-3 t^6 - 300 t^4 + 24 t^2 + (28/5) t.
double neutron_absorption(double delta, double x);

// Running cost for the control example: 2 on [0, 10-delta], 0 inside the
// well, 1 on [10+delta, inf).
double cir_cost(double delta, double x);

// Reward for the rare-event chain: x clamped to [-1, 1].
double rare_event_reward(double x);

// Slab transport kernel on [0, L]: G(x) = e^{-U_delta(x)} (1 - (e^{-cx} + e^{-c(L-x)})/2),
// M(x,.) a two-sided exponential jump confined to the slab. Analytic density
// bounds are attached (q simplifies to e^{-U_delta(x)} (Lc/2) e^{-c|x-y|}).
DominatedKernelModel neutron_model(double L, double c, double delta);

// One time step of dX = theta (mu_rev - X) dt + sigma sqrt(X) dW, truncated to
// [x_min, x_max] with per-source renormalization; G = exp(-cir_cost). The
// lower cutoff keeps the density finite on the grid (the untruncated density
// diverges at 0 for the parameter regime of interest). No density bounds.
DominatedKernelModel cir_bellman_model(double theta, double mu_rev, double sigma, double dt,
                                       double x_max, double delta, double x_min = 0.01);

// Mean-halving Gaussian move truncated to [-c, c], potential exp(alpha * reward).
// Density bounds from the exact in-y extremes and a fine scan in x.
DominatedKernelModel rare_event_model(double c, double alpha);

// Draw from an initial law (uniform and empirical consume one uniform variate).
double sample_initial(const InitialLaw& law, const StateSpace& space, RngStream& stream);

}  // namespace keig
