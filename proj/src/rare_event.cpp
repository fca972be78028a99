#include "keig/rare_event.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "keig/logops.hpp"
#include "keig/models.hpp"
#include "keig/rng.hpp"

namespace keig {

namespace {

EstimateStats summarize(const std::vector<double>& values) {
  EstimateStats out;
  out.replications = static_cast<int>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  out.mean = mean;
  out.rel_var_defined = mean != 0.0;
  out.rel_variance = out.rel_var_defined ? var / (mean * mean) : 0.0;
  return out;
}

}  // namespace

EstimateStats naive_is(const DominatedKernelModel& model, int m, double delta, int L,
                       double x0, std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("need at least two replications");
  if (m < 0) throw std::invalid_argument("horizon must be non-negative");
  if (!model.space.contains(x0)) throw std::invalid_argument("x0 outside the space");
  std::vector<double> values(L);
  for (int rep = 0; rep < L; ++rep) {
    double x = x0;
    double total = 0.0;
    for (int p = 1; p <= m; ++p) {
      RngStream move(seed, StreamPurpose::naive, static_cast<std::uint64_t>(p),
                     static_cast<std::uint64_t>(rep));
      x = model.mutate(x, move);
      total += rare_event_reward(x);
    }
    values[rep] = total > delta * m ? 1.0 : 0.0;
  }
  return summarize(values);
}

EstimateStats twisted_exact_is(const GridOperator& op, const GridEigenSystem& eig, int m,
                               double delta, int L, double x0, std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("need at least two replications");
  if (m < 0) throw std::invalid_argument("horizon must be non-negative");
  if (!op.model.space.contains(x0)) throw std::invalid_argument("x0 outside the space");
  const int size = op.size();
  std::vector<CategoricalTable> rows;
  rows.reserve(size);
  for (int i = 0; i < size; ++i) {
    rows.emplace_back(
        std::vector<double>(eig.p_star.row(i).begin(), eig.p_star.row(i).end()));
  }
  int start = 0;
  for (int i = 1; i < size; ++i) {
    if (std::abs(op.nodes[i] - x0) < std::abs(op.nodes[start] - x0)) start = i;
  }
  const double log_lambda = std::log(eig.lambda_star);

  std::vector<double> values(L);
  for (int rep = 0; rep < L; ++rep) {
    int node = start;
    double total = 0.0;
    double log_w = static_cast<double>(m) * log_lambda + std::log(eig.h_star[node]);
    for (int p = 1; p <= m; ++p) {
      log_w -= std::log(op.g_values[node]);  // G at X_{p-1}
      RngStream pick(seed, StreamPurpose::twisted, static_cast<std::uint64_t>(p),
                     static_cast<std::uint64_t>(rep));
      node = rows[node].sample(pick);
      total += rare_event_reward(op.nodes[node]);
    }
    log_w -= std::log(eig.h_star[node]);
    values[rep] = total > delta * m ? std::exp(log_w) : 0.0;
  }
  return summarize(values);
}

EstimateStats conditional_particle_is(const ForwardTrajectory& traj,
                                      const BackwardSolution& backward, int m,
                                      double delta, int L, double x0,
                                      std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("need at least two replications");
  std::vector<double> values(L);
  for (int rep = 0; rep < L; ++rep) {
    // Distinct seeds give disjoint counter-based streams per replicate.
    const TwistedChainSample chain =
        sample_twisted_chain(traj, backward, x0, m, seed + static_cast<std::uint64_t>(rep));
    double total = 0.0;
    for (int p = 1; p <= m; ++p) total += rare_event_reward(chain.path[p]);
    values[rep] = total > delta * m ? std::exp(chain.log_correction) : 0.0;
  }
  return summarize(values);
}

LambdaCurve lambda_curve(double c, const std::vector<double>& alphas, int num_particles,
                         int n, int seeds, std::uint64_t seed) {
  if (alphas.empty()) throw std::invalid_argument("need at least one tilt strength");
  if (!std::is_sorted(alphas.begin(), alphas.end())) {
    throw std::invalid_argument("tilt strengths must be sorted");
  }
  if (seeds < 1) throw std::invalid_argument("need at least one seed");
  LambdaCurve curve;
  curve.alphas = alphas;
  curve.num_particles = num_particles;
  curve.n = n;
  curve.seeds_per_point = seeds;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const DominatedKernelModel model = rare_event_model(c, alphas[k]);
    std::vector<double> reps(seeds);
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(k) * seeds + s;
      const ForwardTrajectory traj =
          run_forward(model, num_particles, n, InitialLaw::dirac(0.0), run_seed);
      reps[s] = log_lambda_average(traj, n);
    }
    double mean = 0.0;
    for (double v : reps) mean += v;
    mean /= seeds;
    double ss = 0.0;
    for (double v : reps) ss += (v - mean) * (v - mean);
    curve.log_lambda_hat.push_back(mean);
    curve.stderr_hat.push_back(seeds > 1 ? std::sqrt(ss / (seeds - 1) / seeds) : 0.0);
  }
  return curve;
}

RatePoint rate_function(const LambdaCurve& curve, double t) {
  if (curve.alphas.empty()) throw std::invalid_argument("empty curve");
  RatePoint best;
  best.value = t * curve.alphas[0] - curve.log_lambda_hat[0];
  best.argmax_alpha = curve.alphas[0];
  for (std::size_t k = 1; k < curve.alphas.size(); ++k) {
    const double v = t * curve.alphas[k] - curve.log_lambda_hat[k];
    if (v > best.value) {
      best.value = v;
      best.argmax_alpha = curve.alphas[k];
    }
  }
  best.value += 0.0;  // flush -0
  return best;
}

namespace {

double interpolate(const LambdaCurve& curve, double alpha) {
  const auto& a = curve.alphas;
  if (alpha < a.front() || alpha > a.back()) {
    throw std::invalid_argument("tilt strength outside the curve range");
  }
  const auto it = std::lower_bound(a.begin(), a.end(), alpha);
  if (it == a.begin()) return curve.log_lambda_hat.front();
  const std::size_t hi = static_cast<std::size_t>(it - a.begin());
  if (hi == a.size()) return curve.log_lambda_hat.back();
  const double w = (alpha - a[hi - 1]) / (a[hi] - a[hi - 1]);
  return (1.0 - w) * curve.log_lambda_hat[hi - 1] + w * curve.log_lambda_hat[hi];
}

}  // namespace

double lambda_derivative(const LambdaCurve& curve, double alpha, double step) {
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  return (interpolate(curve, alpha + step) - interpolate(curve, alpha - step)) /
         (2.0 * step);
}

bool lambda_curve_convex(const LambdaCurve& curve, double sigmas) {
  for (std::size_t k = 1; k + 1 < curve.alphas.size(); ++k) {
    const double a0 = curve.alphas[k - 1], a1 = curve.alphas[k], a2 = curve.alphas[k + 1];
    const double w = (a1 - a0) / (a2 - a0);
    const double chord =
        (1.0 - w) * curve.log_lambda_hat[k - 1] + w * curve.log_lambda_hat[k + 1];
    const double pooled = std::sqrt(curve.stderr_hat[k - 1] * curve.stderr_hat[k - 1] +
                                    curve.stderr_hat[k] * curve.stderr_hat[k] +
                                    curve.stderr_hat[k + 1] * curve.stderr_hat[k + 1]);
    if (curve.log_lambda_hat[k] > chord + sigmas * pooled + 1e-9) return false;
  }
  return true;
}

}  // namespace keig
