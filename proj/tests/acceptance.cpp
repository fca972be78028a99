// End-to-end acceptance gate. Each check prints one [PASS]/[FAIL] line with
// the measured quantities and its wall time; the exit status is the number of
// failed checks. Tolerances are pinned here, next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "keig/backward.hpp"
#include "keig/bellman.hpp"
#include "keig/forward.hpp"
#include "keig/grid_oracle.hpp"
#include "keig/models.hpp"
#include "keig/rare_event.hpp"

using namespace keig;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double analytic_slab_h(double x) {
  return 4.0 / (kPi + 2.0) * (std::sin(x) + std::cos(x));
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// 1. Grid solver vs the closed-form slab transport solution.
Outcome transport_closed_form() {
  const auto op = build_grid_operator(neutron_model(kPi / 2.0, 1.0, 0.0), 512);
  const auto eig = power_iteration(op);
  const double lambda_err = std::abs(eig.lambda_star - 0.5);
  double h_err = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    h_err = std::max(h_err, std::abs(eig.h_star[i] - analytic_slab_h(op.nodes[i])));
  }
  return {lambda_err < 1e-6 && h_err < 1e-4,
          fmt("lambda err %.3g (tol 1e-6), sup h err %.3g (tol 1e-4)", lambda_err, h_err)};
}

// 2. Particle eigenfunction estimate against the same closed form.
Outcome particle_h_accuracy() {
  const auto model = neutron_model(kPi / 2.0, 1.0, 0.0);
  const int N = 250, two_n = 2000, window = 100, seeds = 20, pts = 150;
  double total = 0.0, worst_seed = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto traj = run_forward(model, N, two_n, InitialLaw::dirac(0.0), 1000 + s);
    const auto back = run_backward(traj);
    double sup_rel = 0.0;
    for (int k = 0; k < pts; ++k) {
      const double x = (kPi / 2.0) * (k + 0.5) / pts;
      const double truth = analytic_slab_h(x);
      const double rel = std::abs(window_average_h(traj, back, x, window) - truth) / truth;
      sup_rel = std::max(sup_rel, rel);
    }
    total += sup_rel;
    worst_seed = std::max(worst_seed, sup_rel);
  }
  const double mean_sup = total / seeds;
  return {mean_sup < 0.05,
          fmt("mean sup rel err %.4f over %d seeds (tol 0.05), worst seed %.4f", mean_sup,
              seeds, worst_seed)};
}

// 3. Algebraic identities of one frozen particle system, at rounding level.
Outcome exact_particle_identities() {
  const double tol = 1e-10;
  double worst_mean = 0.0, worst_row = 0.0, worst_mass = 0.0;
  for (int which = 0; which < 2; ++which) {
    const auto model =
        which ? rare_event_model(2.0, 6.0) : neutron_model(kPi / 2.0, 1.0, 0.5);
    const int N = which ? 120 : 80;
    const int two_n = which ? 60 : 40;
    const auto traj = run_forward(model, N, two_n, InitialLaw::uniform(), 42 + which);
    const auto back = run_backward(traj);

    for (double mean : back.normalizers) {
      worst_mean = std::max(worst_mean, std::abs(mean - 1.0));
    }

    const int n = two_n / 2;
    const double mid = 0.5 * (model.space.lower + model.space.upper);
    for (int p : {n + 1, n + n / 2, two_n}) {
      for (double x :
           {traj.ensembles[p - 1].points[0], traj.ensembles[p - 1].points[N / 2], mid}) {
        const auto row = twisted_row(traj, back, p, x);
        const double sum =
            std::accumulate(row.probabilities.begin(), row.probabilities.end(), 0.0);
        worst_row = std::max(worst_row, std::abs(sum - 1.0));
      }
    }

    const std::vector<std::pair<int, int>> spans{{0, n}, {0, two_n}, {n / 2, n}, {n, two_n}};
    for (const auto& [p, q] : spans) {
      double direct = 0.0;
      for (int l = p; l < q; ++l) direct += traj.log_lambda[l];
      const double mass = log_particle_semigroup_mass(traj, p, q);
      worst_mass =
          std::max(worst_mass, std::abs(mass - direct) / std::max(1.0, std::abs(direct)));
    }
  }
  const bool pass = worst_mean < tol && worst_row < tol && worst_mass < tol;
  return {pass, fmt("layer means off by %.2e, row sums by %.2e, mass identity by %.2e "
                    "(tol 1e-10 each)",
                    worst_mean, worst_row, worst_mass)};
}

// 4. The randomized semigroup functional is unbiased for a start law that is
// not the trajectory's own.
Outcome semigroup_unbiasedness() {
  const auto model = rare_event_model(2.0, 1.0);
  const auto op = build_grid_operator(model, 4097);
  const auto phi = [](double x) { return (x >= 0.0 && x <= 2.0) ? 1.0 : 0.0; };
  const int steps = 5, trials = 10000;
  const double truth = iterate_expectation(op, InitialLaw::dirac(0.5), phi, steps);

  double sum = 0.0, ss = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto traj = run_forward(model, 50, 10, InitialLaw::uniform(), 20000 + t);
    const double v = random_semigroup_apply(traj, InitialLaw::dirac(0.5), phi, steps);
    sum += v;
    ss += v * v;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt(std::max(0.0, (ss - trials * mean * mean) / (trials - 1)));
  const double se = sd / std::sqrt(double(trials));
  const double gap = std::abs(mean - truth);
  return {gap < 4.0 * se,
          fmt("grand mean %.6f vs oracle %.6f, |gap| %.2e < 4 se = %.2e", mean, truth, gap,
              4.0 * se)};
}

// 5. The conditioned-chain estimator of a deviation probability lands inside
// the certified dynamic-programming bracket.
Outcome conditional_estimator_bracket() {
  const auto model = rare_event_model(2.0, 6.0);
  const int m = 5, trajectories = 200, chains = 100;
  const double delta = 0.8;

  std::vector<double> means(trajectories);
  double grand = 0.0;
  for (int t = 0; t < trajectories; ++t) {
    const auto traj = run_forward(model, 25, 16, InitialLaw::dirac(0.0), 5000 + t);
    const auto back = run_backward(traj);
    means[t] = conditional_particle_is(traj, back, m, delta, chains, 0.0,
                                       90000 + static_cast<std::uint64_t>(t) * chains)
                   .mean;
    grand += means[t];
  }
  grand /= trajectories;
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  const double se = std::sqrt(ss / (trajectories - 1) / trajectories);

  const auto bracket =
      brute_force_deviation_prob(model, rare_event_reward, m, delta, 0.0, 2048);
  const bool pass = grand > bracket.lower - 4.0 * se && grand < bracket.upper + 4.0 * se;
  return {pass, fmt("grand mean %.4e vs bracket [%.4e, %.4e] +/- 4 se = %.2e", grand,
                    bracket.lower, bracket.upper, 4.0 * se)};
}

// 6. Total-variation decay of the normalized semigroup obeys the geometric
// envelope computed from the analytic density bounds.
Outcome mixing_decay_envelope() {
  const auto op = build_grid_operator(neutron_model(kPi / 2.0, 1.0, 0.0), 512);
  const auto eig = power_iteration(op);
  const double eps_hi = kPi / 4.0;
  const double eps_lo = eps_hi * std::exp(-kPi / 2.0);
  const double rho = 1.0 - eps_lo / eps_hi;
  const double amp = 2.0 * (eps_hi / eps_lo) * (eps_hi / eps_lo);

  const auto profile = met_decay_profile(op, eig, 50);
  double worst_ratio = 0.0;
  bool ok = true;
  for (int n = 1; n <= 50; ++n) {
    const double bound = amp * std::pow(rho, n);
    ok = ok && profile[n - 1] <= bound;
    worst_ratio = std::max(worst_ratio, profile[n - 1] / bound);
  }
  return {ok, fmt("max d_n / envelope = %.3f over n = 1..50 (must stay <= 1), d_50 = %.2e",
                  worst_ratio, profile[49])};
}

// 7. Both converged oracles solve the log-domain fixed-point equation, and the
// control-cost discontinuities appear where the running cost places them.
Outcome fixed_point_and_discontinuities() {
  const auto slab_op = build_grid_operator(neutron_model(kPi / 2.0, 1.0, 0.0), 512);
  const auto slab_eig = power_iteration(slab_op);
  const double slab_res = bellman_residual(slab_eig, slab_op);

  // the near-singular lower edge makes the fixed-point residual track the
  // eigenvector error at ~1e5 amplification, so iterate deeper than default
  const auto cir_op =
      build_grid_operator(cir_bellman_model(2.0, 10.0, 20.0, 0.01, 500.0, 5.0), 2048);
  const auto cir_eig = power_iteration(cir_op, 1e-13, 400000);
  const double cir_res = bellman_residual(cir_eig, cir_op);

  const int pts = 321;
  std::vector<double> xs(pts), v(pts);
  for (int i = 0; i < pts; ++i) {
    xs[i] = 2.0 + 28.0 * i / (pts - 1);
    v[i] = -std::log(eval_h_star(cir_op, cir_eig, xs[i]));
  }
  int j1 = 0, j2 = 0;
  double b1 = -1.0, b2 = -1.0;
  for (int i = 0; i + 1 < pts; ++i) {
    const double jump = std::abs(v[i + 1] - v[i]);
    if (jump > b1) {
      b2 = b1;
      j2 = j1;
      b1 = jump;
      j1 = i;
    } else if (jump > b2) {
      b2 = jump;
      j2 = i;
    }
  }
  const auto covers = [&](int i, double x) { return xs[i] <= x && x <= xs[i + 1]; };
  const bool edges_found = (covers(j1, 5.0) && covers(j2, 15.0)) ||
                           (covers(j1, 15.0) && covers(j2, 5.0));
  const bool pass = slab_res < 1e-5 && cir_res < 1e-5 && edges_found;
  return {pass, fmt("residuals %.2e / %.2e (tol 1e-5); top jumps at [%.2f,%.2f], "
                    "[%.2f,%.2f] must cover 5 and 15",
                    slab_res, cir_res, xs[j1], xs[j1 + 1], xs[j2], xs[j2 + 1])};
}

// 8. The tilted growth-rate curve has the expected local slope and the
// variance of the estimators behaves as the theory predicts in m.
Outcome tilted_variance_behavior() {
  const auto curve = lambda_curve(2.0, {9.5, 10.0, 10.5}, 250, 500, 6, 77);
  const double deriv = lambda_derivative(curve, 10.0, 0.5);
  const bool slope_ok = std::abs(deriv - 0.9) <= 0.05;
  // independent cross-check of the same finite difference on the grid solver
  const auto grid_log_lambda = [](double a) {
    return std::log(
        power_iteration(build_grid_operator(rare_event_model(2.0, a), 2049)).lambda_star);
  };
  const double oracle_deriv = grid_log_lambda(10.5) - grid_log_lambda(9.5);

  const auto plain = rare_event_model(2.0, 0.0);
  bool naive_monotone = true;
  double prev = -1.0;
  std::string naive_list;
  for (int m = 1; m <= 5; ++m) {
    const auto st = naive_is(plain, m, 0.9, 500000, 0.0, 123 + m);
    naive_monotone = naive_monotone && st.rel_var_defined && st.rel_variance > prev;
    prev = st.rel_variance;
    naive_list += fmt("%s%.1f", m == 1 ? "" : ",", st.rel_variance);
  }

  // pooled per-replicate variance needs the between-trajectory component, so
  // spread the replicates over enough independent particle systems
  const std::vector<double> alphas{1.0, 2.0, 4.0, 8.0, 16.0};
  const int traj_count = 12, chains = 175;
  double best_slope = 1e300;
  double best_alpha = -1.0;
  std::string slope_list;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const auto model = rare_event_model(2.0, alphas[a]);
    std::vector<ForwardTrajectory> trajs;
    std::vector<BackwardSolution> backs;
    for (int t = 0; t < traj_count; ++t) {
      trajs.push_back(
          run_forward(model, 250, 1000, InitialLaw::dirac(0.0), 300 + a * 17 + t));
      backs.push_back(run_backward(trajs.back()));
    }
    std::vector<double> ms, logs;
    bool defined = true;
    for (int m = 5; m <= 50; m += 5) {
      double mean = 0.0, second = 0.0;
      for (int t = 0; t < traj_count; ++t) {
        const auto st =
            conditional_particle_is(trajs[t], backs[t], m, 0.9, chains, 0.0,
                                    40000 + (a * traj_count + t) * 1000 + m);
        mean += st.mean / traj_count;
        const double var = st.rel_var_defined ? st.rel_variance * st.mean * st.mean : 0.0;
        second += (var + st.mean * st.mean) / traj_count;
      }
      const double var = second - mean * mean;
      if (mean <= 0.0 || var <= 0.0) {
        defined = false;
        break;
      }
      ms.push_back(m);
      logs.push_back(std::log(var / (mean * mean)));
    }
    const double slope = defined ? fit_slope(ms, logs) : 1e300;
    slope_list += fmt("%s%.0f:%s", a == 0 ? "" : ",", alphas[a],
                      defined ? fmt("%.4f", slope).c_str() : "undef");
    if (slope < best_slope) {
      best_slope = slope;
      best_alpha = alphas[a];
    }
  }
  const bool cond_ok = best_alpha == 8.0;
  const bool pass = slope_ok && naive_monotone && cond_ok;
  return {pass, fmt("curve slope at tilt 10 = %.4f, grid oracle %.4f (want 0.9 +/- 0.05); "
                    "naive rel var by m = [%s] monotone=%s; log rel-var growth slopes by "
                    "tilt [%s], slowest at %.0f (want 8)",
                    deriv, oracle_deriv, naive_list.c_str(),
                    naive_monotone ? "yes" : "no", slope_list.c_str(), best_alpha)};
}

// 9. Root-mean-square error of the particle eigenfunction decays like one
// over the square root of the particle count.
Outcome rmse_decay_rate() {
  const auto model = neutron_model(kPi / 2.0, 1.0, 0.0);
  const double truth = 4.0 * std::sqrt(2.0) / (kPi + 2.0);
  const std::vector<int> sizes{50, 100, 200, 400};
  const int seeds = 40;
  std::vector<double> lx, ly;
  std::string rmse_list;
  for (int size : sizes) {
    double mse = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const auto traj =
          run_forward(model, size, 120, InitialLaw::uniform(), 888 + size * 100 + s);
      const auto back = run_backward(traj);
      const double err = window_average_h(traj, back, kPi / 4.0, 6) - truth;
      mse += err * err;
    }
    const double rmse = std::sqrt(mse / seeds);
    lx.push_back(std::log(double(size)));
    ly.push_back(std::log(rmse));
    rmse_list += fmt("%s%.4f", size == sizes.front() ? "" : ",", rmse);
  }
  const double slope = fit_slope(lx, ly);
  return {slope <= -0.35 && slope >= -0.65,
          fmt("log-log RMSE slope %.3f (want -0.5 +/- 0.15), rmse by N = [%s]", slope,
              rmse_list.c_str())};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {"transport eigen-solution matches closed form", 10, transport_closed_form},
      {"particle eigenfunction within 5% of closed form", 300, particle_h_accuracy},
      {"particle identities hold at rounding level", 30, exact_particle_identities},
      {"randomized semigroup functional is unbiased", 120, semigroup_unbiasedness},
      {"conditioned chains land in the certified bracket", 300,
       conditional_estimator_bracket},
      {"mixing decay obeys the geometric envelope", 30, mixing_decay_envelope},
      {"fixed-point residuals and cost discontinuities", 120,
       fixed_point_and_discontinuities},
      {"tilted growth slope and variance behavior", 900, tilted_variance_behavior},
      {"RMSE decays at the Monte Carlo rate", 600, rmse_decay_rate},
  };

  int failures = 0;
  for (const auto& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.run();
    } catch (const std::exception& ex) {
      out = {false, fmt("exception: %s", ex.what())};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
    const bool ok = out.pass && dt <= e.budget_seconds;
    std::printf("[%s] %s: %s (%.1fs, budget %.0fs)\n", ok ? "PASS" : "FAIL", e.name,
                out.detail.c_str(), dt, e.budget_seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d/%zu acceptance checks passed\n", int(entries.size()) - failures,
              entries.size());
  return failures == 0 ? 0 : 1;
}
