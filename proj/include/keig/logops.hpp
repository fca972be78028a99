#pragma once

// Log-domain weight arithmetic: stable log-sum-exp, normalization of log
// weights into probabilities, and categorical sampling. All selection and
// twisted-kernel weights in the library pass through here.

#include <vector>

#include "keig/rng.hpp"

namespace keig {

// Carrier for weights kept in log domain.
struct LogWeightVector {
  std::vector<double> log_values;
};

// log sum_i exp(v_i) with max shift; exact for a single element.
// Throws std::invalid_argument on an empty list, DegenerateWeightsError when
// every entry is -inf.
double log_sum_exp(const std::vector<double>& values);

// Probabilities p_i = exp(w_i - logsumexp(w)), renormalized so they sum to 1.
std::vector<double> normalize_log_weights(const LogWeightVector& w);

// Cumulative table for repeated categorical draws from one distribution.
// Probabilities must be nonnegative and sum to 1 within 1e-9.
class CategoricalTable {
 public:
  explicit CategoricalTable(const std::vector<double>& probs);
  int sample(RngStream& stream) const;

 private:
  std::vector<double> cumulative_;
};

// Single categorical draw; index i comes up with probability probs[i].
int categorical_sample(const std::vector<double>& probs, RngStream& stream);

}  // namespace keig
