#include "keig/logops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "keig/errors.hpp"

namespace keig {

double log_sum_exp(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty list");
  const double m = *std::max_element(values.begin(), values.end());
  if (m == -std::numeric_limits<double>::infinity())
    throw DegenerateWeightsError("log_sum_exp: all weights are -inf");
  if (values.size() == 1) return values[0];
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> normalize_log_weights(const LogWeightVector& w) {
  const double lse = log_sum_exp(w.log_values);  // reports degenerate input
  std::vector<double> p(w.log_values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(w.log_values[i] - lse);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

CategoricalTable::CategoricalTable(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
  cumulative_.resize(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw std::invalid_argument("categorical: negative probability");
    acc += probs[i];
    cumulative_[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9)
    throw std::invalid_argument("categorical: probabilities do not sum to 1");
}

int CategoricalTable::sample(RngStream& stream) const {
  const double u = stream.next_double() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;  // u landed on the total mass exactly
  return static_cast<int>(it - cumulative_.begin());
}

int categorical_sample(const std::vector<double>& probs, RngStream& stream) {
  return CategoricalTable(probs).sample(stream);
}

}  // namespace keig
