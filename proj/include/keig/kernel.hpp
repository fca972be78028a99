#pragma once

// Core abstractions: the compact interval state space, initial laws, and the
// dominated-kernel bundle Q(x,dy) = G(x) M(x,dy) = q(x,y) nu(dy). The
// reference measure nu is always the uniform probability measure on the
// model's interval, so quadrature weights double as nu masses.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "keig/rng.hpp"

namespace keig {

struct StateSpace {
  double lower = 0.0;
  double upper = 1.0;

  StateSpace() = default;
  StateSpace(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("StateSpace: need finite lower < upper");
  }
  double length() const { return upper - lower; }
  bool contains(double x) const { return x >= lower && x <= upper; }
  double clamp(double x) const { return x < lower ? lower : (x > upper ? upper : x); }
};

// Initial law of the particle system or a semigroup start measure.
struct InitialLaw {
  enum class Kind { dirac, uniform, empirical };
  Kind kind = Kind::uniform;
  double point = 0.0;          // dirac
  std::vector<double> atoms;   // empirical: equal-weight point cloud

  static InitialLaw dirac(double x) {
    InitialLaw law;
    law.kind = Kind::dirac;
    law.point = x;
    return law;
  }
  static InitialLaw uniform() {
    InitialLaw law;
    law.kind = Kind::uniform;
    return law;
  }
  static InitialLaw empirical(std::vector<double> points) {
    if (points.empty()) throw std::invalid_argument("InitialLaw: empty point cloud");
    InitialLaw law;
    law.kind = Kind::empirical;
    law.atoms = std::move(points);
    return law;
  }
};

// The (H)-style data of one model. The mutation density splits as
//   log m(x,y) = log_source_norm(x) + log_m_pair(x,y)
// so inner loops over particle pairs can hoist the x-only part; the full
// kernel density is always q(x,y) = G(x) m(x,y), assembled in log_density_q
// from the same three pieces (one source of truth).
struct DominatedKernelModel {
  StateSpace space;
  std::function<double(double)> log_potential;               // log G(x)
  std::function<double(double, RngStream&)> mutate;          // draw from M(x,.)
  std::function<double(double)> log_source_norm;             // x-only part of log dM/dnu
  std::function<double(double, double)> log_m_pair;          // remaining part of log dM/dnu
  std::function<double(double, double)> log_density_q;       // log dQ(x,.)/dnu (y)
  std::optional<std::pair<double, double>> epsilon_bounds;   // (eps-, eps+) when declared
  std::string label;
};

// Uniform-weight particle cloud.
struct EmpiricalMeasure {
  std::vector<double> points;
  int size() const { return static_cast<int>(points.size()); }
};

// Verifies eps- <= q(x,y) <= eps+ on a probe x probe grid (endpoints included).
// Models without declared bounds pass vacuously.
bool check_epsilon_bounds(const DominatedKernelModel& model, int probe = 64);

}  // namespace keig
