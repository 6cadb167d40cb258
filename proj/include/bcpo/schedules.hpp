#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include "bcpo/info_bounds.hpp"

namespace bcpo::enc {

struct BetaSchedule {
  enum class Shape { Linear, Fixed };
  double start = 1e-4;
  double end = 0.1;
  long total_steps = 0;
  Shape shape = Shape::Linear;

  void validate() const {
    if (!(start > 0.0) || !(end > 0.0))
      throw std::invalid_argument("beta schedule: start and end must be > 0");
    if (shape == Shape::Linear && total_steps <= 0)
      throw std::invalid_argument("beta schedule: linear shape needs total_steps > 0");
  }
};

inline double beta_at(const BetaSchedule& s, long step) {
  if (step < 0) throw std::invalid_argument("beta_at: step must be >= 0");
  if (s.shape == BetaSchedule::Shape::Fixed) return s.start;
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(s.total_steps));
  return s.start + (s.end - s.start) * frac;
}

inline double vib_loss(double kl_rate_value, double mi_estimate, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("vib_loss: beta must be > 0");
  return beta * kl_rate_value - mi_estimate;
}

// Alarm when the running contrastive MI average drops below the Fano floor:
// the observation window is too narrow for the requested Bayes error.
inline bool window_sufficiency_alarm(double mi_running_avg, double delta,
                                     long n_contexts) {
  return mi_running_avg < info::fano_window_floor(delta, n_contexts);
}

}  // namespace bcpo::enc
