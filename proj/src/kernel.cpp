#include "keig/kernel.hpp"

#include <cmath>

namespace keig {

bool check_epsilon_bounds(const DominatedKernelModel& model, int probe) {
  if (!model.epsilon_bounds) return true;
  const auto [eps_lo, eps_hi] = *model.epsilon_bounds;
  // Slack of a few ulps: bounds that are attained exactly in closed form can
  // land one rounding step outside after the log-domain round trip.
  const double lo = eps_lo * (1.0 - 1e-12);
  const double hi = eps_hi * (1.0 + 1e-12);
  const double a = model.space.lower, len = model.space.length();
  for (int i = 0; i < probe; ++i) {
    const double x = a + len * i / (probe - 1);
    for (int j = 0; j < probe; ++j) {
      const double y = a + len * j / (probe - 1);
      const double q = std::exp(model.log_density_q(x, y));
      if (!(q >= lo && q <= hi)) return false;
    }
  }
  return true;
}

}  // namespace keig
