#include "bcpo/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcpo::loop {

ContextSampler::ContextSampler(const env::ContextSpec& spec, long n_bins)
    : spec_(spec), n_bins_(n_bins) {
  spec_.validate();
  if (n_bins <= 0) throw std::invalid_argument("context sampler: n_bins must be > 0");
  if (!spec_.train_set.empty()) n_bins_ = static_cast<long>(spec_.train_set.size());
  returns_.assign(static_cast<std::size_t>(n_bins_), 0.0);
  seen_.assign(static_cast<std::size_t>(n_bins_), false);
}

double ContextSampler::bin_lo(long b) const {
  const double w = (spec_.train_hi - spec_.train_lo) / static_cast<double>(n_bins_);
  return spec_.train_lo + static_cast<double>(b) * w;
}

double ContextSampler::bin_hi(long b) const {
  const double w = (spec_.train_hi - spec_.train_lo) / static_cast<double>(n_bins_);
  return spec_.train_lo + static_cast<double>(b + 1) * w;
}

long ContextSampler::bin_of(double context) const {
  if (!spec_.train_set.empty()) {
    for (std::size_t i = 0; i < spec_.train_set.size(); ++i)
      if (spec_.train_set[i] == context) return static_cast<long>(i);
    throw std::invalid_argument("context sampler: value not in the finite train set");
  }
  const double w = (spec_.train_hi - spec_.train_lo) / static_cast<double>(n_bins_);
  if (w <= 0.0) return 0;
  long b = static_cast<long>(std::floor((context - spec_.train_lo) / w));
  return std::min(n_bins_ - 1, std::max(0L, b));
}

std::vector<double> ContextSampler::softmax_with_floor(
    const std::vector<double>& normalized, double floor) {
  const std::size_t n = normalized.size();
  std::vector<double> p(n);
  double mx = normalized[0];
  for (double v : normalized) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(normalized[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  // Clamp-and-renormalize until the floor holds for every cell.
  std::vector<bool> clamped(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    double free_mass = 1.0, free_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i])
        free_mass -= floor;
      else
        free_sum += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) continue;
      const double scaled = p[i] / free_sum * free_mass;
      if (scaled < floor) {
        clamped[i] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t i = 0; i < n; ++i)
        p[i] = clamped[i] ? floor : p[i] / free_sum * free_mass;
      break;
    }
  }
  return p;
}

std::vector<double> ContextSampler::probabilities() const {
  double lo = returns_[0], hi = returns_[0];
  for (double r : returns_) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  std::vector<double> normalized(static_cast<std::size_t>(n_bins_), 0.0);
  if (hi > lo)
    for (long i = 0; i < n_bins_; ++i)
      normalized[static_cast<std::size_t>(i)] = (returns_[static_cast<std::size_t>(i)] - lo) / (hi - lo);
  return softmax_with_floor(normalized, 0.05 / static_cast<double>(n_bins_));
}

ContextSampler::Draw ContextSampler::sample_uniform(std::mt19937_64& rng) const {
  std::uniform_int_distribution<long> d(0, n_bins_ - 1);
  const long bin = d(rng);
  if (!spec_.train_set.empty()) return {bin, spec_.train_set[static_cast<std::size_t>(bin)]};
  std::uniform_real_distribution<double> c(bin_lo(bin), bin_hi(bin));
  return {bin, c(rng)};
}

ContextSampler::Draw ContextSampler::sample(std::mt19937_64& rng) const {
  const std::vector<double> p = probabilities();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  long bin = n_bins_ - 1;
  for (long i = 0; i < n_bins_; ++i) {
    acc += p[static_cast<std::size_t>(i)];
    if (r < acc) {
      bin = i;
      break;
    }
  }
  if (!spec_.train_set.empty()) return {bin, spec_.train_set[static_cast<std::size_t>(bin)]};
  std::uniform_real_distribution<double> c(bin_lo(bin), bin_hi(bin));
  return {bin, c(rng)};
}

void ContextSampler::update_return(long bin, double episode_return) {
  if (bin < 0 || bin >= n_bins_)
    throw std::out_of_range("context sampler: bin out of range");
  auto& r = returns_[static_cast<std::size_t>(bin)];
  if (!seen_[static_cast<std::size_t>(bin)]) {
    r = episode_return;
    seen_[static_cast<std::size_t>(bin)] = true;
  } else {
    r = ema_decay_ * r + (1.0 - ema_decay_) * episode_return;
  }
}

}  // namespace bcpo::loop
