#include "keig/models.hpp"

#include <algorithm>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "keig/bessel.hpp"
#include "keig/errors.hpp"

namespace keig {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * M_SQRT1_2); }

}  // namespace

double neutron_absorption(double delta, double x) {
  const double t = 2.0 * x / 3.0 - 0.5;
  const double t2 = t * t;
  const double poly = 1e-3 * t2 * t2 * t2 - 300.0 * t2 * t2 + 24.0 * t2 + 5.6 * t;
  return delta * poly;
}

double cir_cost(double delta, double x) {
  if (x <= 10.0 - delta) return 2.0;
  if (x >= 10.0 + delta) return 1.0;
  return 0.0;
}

double rare_event_reward(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

DominatedKernelModel neutron_model(double L, double c, double delta) {
  if (!(L > 0.0) || !(c > 0.0)) throw std::invalid_argument("neutron_model: need L > 0, c > 0");
  if (delta < 0.0) throw std::invalid_argument("neutron_model: need delta >= 0");

  DominatedKernelModel m;
  m.space = StateSpace(0.0, L);
  m.label = "neutron";

  // Unnormalized two-sided exponential mass around x, confined to [0, L].
  auto edge_norm = [L, c](double x) { return 2.0 - std::exp(-c * x) - std::exp(-c * (L - x)); };

  m.log_potential = [delta, edge_norm](double x) {
    return -neutron_absorption(delta, x) + std::log(edge_norm(x)) - M_LN2;
  };
  m.log_source_norm = [L, c, edge_norm](double x) {
    return std::log(L * c) - std::log(edge_norm(x));
  };
  m.log_m_pair = [c](double x, double y) { return -c * std::abs(y - x); };

  // Piecewise closed-form inverse CDF of the confined exponential jump.
  m.mutate = [L, c](double x, RngStream& stream) {
    const double below = 1.0 - std::exp(-c * x);
    const double above = 1.0 - std::exp(-c * (L - x));
    const double s = stream.next_double() * (below + above);
    double y;
    if (s < below) {
      y = x + std::log(s + std::exp(-c * x)) / c;  // lands in [0, x]
    } else {
      y = x - std::log1p(below - s) / c;  // lands in [x, L]
    }
    return y < 0.0 ? 0.0 : (y > L ? L : y);
  };

  // q(x,y) = e^{-U_delta(x)} (Lc/2) e^{-c|x-y|}: extremes of U give exact bounds.
  double u_min = 0.0, u_max = 0.0;
  if (delta > 0.0) {
    constexpr int kScan = 200001;
    u_min = u_max = neutron_absorption(delta, 0.0);
    for (int i = 1; i < kScan; ++i) {
      const double u = neutron_absorption(delta, L * i / (kScan - 1));
      u_min = std::min(u_min, u);
      u_max = std::max(u_max, u);
    }
    // widen by a Lipschitz margin so the scan cannot clip the true extremes
    u_min -= 1e-3 * delta;
    u_max += 1e-3 * delta;
  }
  const double half_lc = 0.5 * L * c;
  m.epsilon_bounds = std::make_pair(half_lc * std::exp(-u_max - c * L),
                                    half_lc * std::exp(-u_min));

  m.log_density_q = [lp = m.log_potential, sn = m.log_source_norm,
                     pr = m.log_m_pair](double x, double y) {
    return lp(x) + sn(x) + pr(x, y);
  };
  return m;
}

DominatedKernelModel cir_bellman_model(double theta, double mu_rev, double sigma, double dt,
                                       double x_max, double delta, double x_min) {
  if (!(theta > 0.0) || !(mu_rev > 0.0) || !(sigma > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("cir_bellman_model: need positive dynamics parameters");
  if (!(x_min > 0.0) || !(x_min < x_max))
    throw std::invalid_argument("cir_bellman_model: need 0 < x_min < x_max");
  if (delta < 0.0) throw std::invalid_argument("cir_bellman_model: need delta >= 0");

  const double decay = std::exp(-theta * dt);
  const double gain = sigma * sigma * (1.0 - decay) / (4.0 * theta);  // chi-square scale
  const double df = 4.0 * theta * mu_rev / (sigma * sigma);
  const double nu = 0.5 * df - 1.0;
  const double span = x_max - x_min;

  DominatedKernelModel m;
  m.space = StateSpace(x_min, x_max);
  m.label = "cir-bellman";

  m.log_potential = [delta](double x) { return -cir_cost(delta, x); };

  auto noncentrality = [decay, gain](double x) { return x * decay / gain; };

  // Mass the untruncated one-step law keeps inside [x_min, x_max].
  auto log_kept_mass = [df, gain, x_min, x_max, noncentrality](double x) {
    const boost::math::non_central_chi_squared dist(df, noncentrality(x));
    const double kept = boost::math::cdf(dist, x_max / gain) - boost::math::cdf(dist, x_min / gain);
    if (!(kept > 0.0)) throw ModelEvalError("cir density: empty truncation window");
    return std::log(kept);
  };

  // log density w.r.t. nu = uniform splits as source part + pair part; the pair
  // part carries the Bessel factor of the noncentral chi-square form.
  m.log_source_norm = [span, gain, df, log_kept_mass, noncentrality](double x) {
    const double u = noncentrality(x);
    return std::log(span) - std::log(gain) - log_kept_mass(x) - 0.5 * u -
           (0.25 * df - 0.5) * std::log(u) - M_LN2;
  };
  m.log_m_pair = [gain, df, nu, noncentrality](double x, double y) {
    const double u = noncentrality(x);
    const double z = y / gain;
    return -0.5 * z + (0.25 * df - 0.5) * std::log(z) + log_bessel_i(nu, std::sqrt(u * z));
  };

  // Exact draw from the truncated law: Poisson-mixed gamma for the untruncated
  // step, rejection into the window.
  m.mutate = [gain, df, x_min, x_max, noncentrality](double x, RngStream& stream) {
    std::poisson_distribution<long> mix(0.5 * noncentrality(x));
    for (long attempt = 0; attempt < 1000000; ++attempt) {
      const long k = mix(stream);
      std::gamma_distribution<double> body(0.5 * df + static_cast<double>(k), 2.0);
      const double y = gain * body(stream);
      if (y >= x_min && y <= x_max) return y;
    }
    throw ModelEvalError("cir mutate: rejection cap reached");
  };

  m.log_density_q = [lp = m.log_potential, sn = m.log_source_norm,
                     pr = m.log_m_pair](double x, double y) {
    return lp(x) + sn(x) + pr(x, y);
  };
  return m;
}

DominatedKernelModel rare_event_model(double c, double alpha) {
  if (!(c > 0.0)) throw std::invalid_argument("rare_event_model: need c > 0");

  DominatedKernelModel m;
  m.space = StateSpace(-c, c);
  m.label = "rare-event";

  auto window_mass = [c](double x) {
    return std_normal_cdf(c - 0.5 * x) - std_normal_cdf(-c - 0.5 * x);
  };

  m.log_potential = [alpha](double x) { return alpha * rare_event_reward(x); };
  m.log_source_norm = [c, window_mass](double x) {
    return std::log(2.0 * c) - std::log(window_mass(x));
  };
  m.log_m_pair = [](double x, double y) {
    const double d = y - 0.5 * x;
    return -0.5 * d * d - 0.5 * kLog2Pi;
  };

  // Inverse-CDF draw from the Gaussian confined to [-c, c].
  m.mutate = [c](double x, RngStream& stream) {
    const double p_lo = std_normal_cdf(-c - 0.5 * x);
    const double p_hi = std_normal_cdf(c - 0.5 * x);
    const double p = p_lo + stream.next_double() * (p_hi - p_lo);
    const double y = 0.5 * x + M_SQRT2 * boost::math::erf_inv(2.0 * p - 1.0);
    return y < -c ? -c : (y > c ? c : y);
  };

  // In y the density peaks at y = x/2 (always inside the window since |x| <= c)
  // and bottoms at the far endpoint, distance c + |x|/2 away; scan x for the
  // outer extremes and widen slightly to cover scan resolution.
  {
    constexpr int kScan = 4001;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
      const double x = -c + 2.0 * c * i / (kScan - 1);
      const double base = alpha * rare_event_reward(x) + std::log(2.0 * c) -
                          std::log(window_mass(x)) - 0.5 * kLog2Pi;
      const double far = c + 0.5 * std::abs(x);
      hi = std::max(hi, base);
      lo = std::min(lo, base - 0.5 * far * far);
    }
    m.epsilon_bounds = std::make_pair(std::exp(lo) * (1.0 - 1e-4), std::exp(hi) * (1.0 + 1e-4));
  }

  m.log_density_q = [lp = m.log_potential, sn = m.log_source_norm,
                     pr = m.log_m_pair](double x, double y) {
    return lp(x) + sn(x) + pr(x, y);
  };
  return m;
}

double sample_initial(const InitialLaw& law, const StateSpace& space, RngStream& stream) {
  switch (law.kind) {
    case InitialLaw::Kind::dirac:
      if (!space.contains(law.point))
        throw std::invalid_argument("initial law: dirac point outside the state space");
      return law.point;
    case InitialLaw::Kind::uniform:
      return space.lower + stream.next_double() * space.length();
    case InitialLaw::Kind::empirical: {
      const auto k = static_cast<std::size_t>(stream.next_double() * law.atoms.size());
      return space.clamp(law.atoms[std::min(k, law.atoms.size() - 1)]);
    }
  }
  throw std::logic_error("initial law: unknown kind");
}

}  // namespace keig
