#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "keig/backward.hpp"
#include "keig/bellman.hpp"
#include "keig/forward.hpp"
#include "keig/grid_oracle.hpp"
#include "keig/models.hpp"

using namespace keig;

TEST_CASE("value function estimate is the log transform of the particle solution") {
  const auto model = neutron_model(M_PI / 2.0, 1.0, 0.0);
  const auto traj = run_forward(model, 80, 40, InitialLaw::uniform(), 5);
  const auto backward = run_backward(traj);

  const std::vector<double> pts = {0.3, 0.8, 1.2};
  const auto est = estimate_value_function(traj, backward, pts, 10);

  REQUIRE(est.v_hat.size() == pts.size());
  CHECK(est.eval_points == pts);
  CHECK(est.num_particles == 80);
  CHECK(est.n == 20);
  CHECK(est.window == 10);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double h = window_average_h(traj, backward, pts[i], 10);
    CHECK(std::exp(-est.v_hat[i]) == doctest::Approx(h).epsilon(1e-14));
  }
  CHECK(est.varsigma_hat == doctest::Approx(-log_lambda_average(traj, 20)).epsilon(1e-14));
}

TEST_CASE("value function estimate rejects an out of range window") {
  const auto model = neutron_model(M_PI / 2.0, 1.0, 0.0);
  const auto traj = run_forward(model, 20, 8, InitialLaw::uniform(), 5);
  const auto backward = run_backward(traj);
  CHECK_THROWS_AS(estimate_value_function(traj, backward, {0.5}, 0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_value_function(traj, backward, {0.5}, 5), std::invalid_argument);
}

TEST_CASE("converged transport eigen solution solves its fixed point equation") {
  const auto op = build_grid_operator(neutron_model(M_PI / 2.0, 1.0, 0.0), 512);
  const auto eig = power_iteration(op);
  CHECK(bellman_residual(eig, op) < 1e-6);
}

TEST_CASE("converged squared radial diffusion solution solves its fixed point equation") {
  const auto op = build_grid_operator(cir_bellman_model(2.0, 10.0, 20.0, 0.01, 500.0, 5.0), 1024);
  const auto eig = power_iteration(op);
  CHECK(bellman_residual(eig, op) < 1e-5);
}

TEST_CASE("twisting inequality holds with equality at the eigen pair") {
  const auto op = build_grid_operator(neutron_model(M_PI / 2.0, 1.0, 0.5), 101);
  const auto eig = power_iteration(op);
  std::vector<double> v(eig.h_star.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = -std::log(eig.h_star[j]);
  for (int i : {0, 25, 50, 75, 100}) {
    const double gap = jensen_gap(op, v, eig.h_star, i);
    CHECK(std::abs(gap) < 1e-10);
  }
}

TEST_CASE("twisting inequality is non negative for arbitrary twists") {
  const auto op = build_grid_operator(neutron_model(M_PI / 2.0, 1.0, 0.0), 101);
  const int n = 101;
  std::vector<double> v(n), bumpy(n), flat(n, 1.0);
  for (int j = 0; j < n; ++j) {
    const double x = op.nodes[j];
    v[j] = std::sin(3.0 * x) - 0.2 * x;
    bumpy[j] = std::exp(std::cos(5.0 * x)) + 0.1;
  }
  for (int i : {0, 17, 44, 60, 93}) {
    CHECK(jensen_gap(op, v, bumpy, i) > -1e-10);
    CHECK(jensen_gap(op, v, flat, i) > -1e-10);
  }
  // a mistwisted kernel pays a strictly positive price somewhere
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, jensen_gap(op, v, bumpy, i));
  CHECK(worst > 1e-3);
}

TEST_CASE("twisting diagnostic rejects mismatched grids") {
  const auto op = build_grid_operator(neutron_model(M_PI / 2.0, 1.0, 0.0), 33);
  std::vector<double> good(33, 1.0), bad(32, 1.0);
  CHECK_THROWS_AS(jensen_gap(op, bad, good, 0), std::invalid_argument);
  CHECK_THROWS_AS(jensen_gap(op, good, bad, 0), std::invalid_argument);
}
