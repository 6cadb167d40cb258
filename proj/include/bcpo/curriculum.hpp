#pragma once

#include <random>
#include <vector>

#include "bcpo/context.hpp"

namespace bcpo::loop {

// Easy-first curriculum over context bins: cells are sampled via a softmax of
// min-max-normalized running mean returns (temperature 1) with a per-bin
// probability floor of 0.05 / N_bin; the context is then drawn uniformly
// inside the chosen cell. Running means are exponential moving averages with
// decay 0.9.
class ContextSampler {
 public:
  ContextSampler(const env::ContextSpec& spec, long n_bins);

  long n_bins() const { return n_bins_; }
  double bin_lo(long b) const;
  double bin_hi(long b) const;
  long bin_of(double context) const;

  struct Draw {
    long bin = 0;
    double context = 0.0;
  };
  Draw sample(std::mt19937_64& rng) const;
  // Bin chosen uniformly; used during warm-up, before returns exist.
  Draw sample_uniform(std::mt19937_64& rng) const;

  void update_return(long bin, double episode_return);
  double mean_return(long bin) const { return returns_[static_cast<std::size_t>(bin)]; }

  // Cell probabilities; sums to 1 and respects the exploration floor.
  std::vector<double> probabilities() const;

  // Probabilities for externally supplied normalized returns (exposed so the
  // softmax arithmetic is testable in isolation).
  static std::vector<double> softmax_with_floor(const std::vector<double>& normalized,
                                                double floor);

 private:
  env::ContextSpec spec_;
  long n_bins_ = 0;
  double ema_decay_ = 0.9;
  std::vector<double> returns_;
  std::vector<bool> seen_;
};

}  // namespace bcpo::loop
