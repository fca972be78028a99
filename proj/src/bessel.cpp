#include "keig/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "keig/errors.hpp"

namespace keig {

namespace {

// Ascending series: I_nu(w) = (w/2)^nu * sum_k (w^2/4)^k / (k! Gamma(nu+k+1)).
// Safe in linear domain for w <= 50 (largest term is far below overflow).
double log_bessel_series(double nu, double w) {
  const double quarter = 0.25 * w * w;
  double term = std::exp(-std::lgamma(nu + 1.0));
  double sum = term;
  for (int k = 1; k <= 2000; ++k) {
    term *= quarter / (k * (nu + k));
    sum += term;
    if (term < sum * 1e-17) return nu * std::log(0.5 * w) + std::log(sum);
  }
  throw ModelEvalError("log_bessel_i: series did not converge");
}

// Large-argument expansion: I_nu(w) ~ e^w / sqrt(2 pi w) * sum_k (-1)^k a_k / w^k
// with a_k = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k).
double log_bessel_asymptotic(double nu, double w) {
  const double mu = 4.0 * nu * nu;
  double factor = 1.0;
  double a = 1.0;
  double sign = -1.0;
  for (int k = 1; k <= 8; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k);
    factor += sign * a / std::pow(w, k);
    sign = -sign;
  }
  return w - 0.5 * std::log(2.0 * M_PI * w) + std::log(factor);
}

}  // namespace

double log_bessel_i(double nu, double w) {
  if (!(nu > -1.0)) throw std::invalid_argument("log_bessel_i: need nu > -1");
  if (!(w >= 0.0)) throw std::invalid_argument("log_bessel_i: need w >= 0");
  if (w == 0.0) {
    if (nu == 0.0) return 0.0;
    return nu > 0.0 ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
  }
  return w <= 50.0 ? log_bessel_series(nu, w) : log_bessel_asymptotic(nu, w);
}

}  // namespace keig
