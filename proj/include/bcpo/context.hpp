#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcpo/rng.hpp"

namespace bcpo::env {

enum class EnvKind { ScaledCartPole, TabularChain, TwoContextBandit };

EnvKind env_kind_from_string(const std::string& s);
std::string to_string(EnvKind k);

// Context distribution spec. Training contexts come either from a closed
// interval or a finite set; test contexts always from a closed interval.
struct ContextSpec {
  EnvKind kind = EnvKind::ScaledCartPole;
  double train_lo = 0.75;
  double train_hi = 2.0;
  std::vector<double> train_set;  // non-empty selects the finite-set rule
  double test_lo = 0.5;
  double test_hi = 2.5;
  long bins = 8;

  void validate() const {
    if (bins <= 0) throw std::invalid_argument("context spec: bins must be positive");
    if (train_set.empty()) {
      if (!(train_lo <= train_hi))
        throw std::invalid_argument("context spec: empty train interval");
      if (!(test_lo <= train_lo && train_hi <= test_hi))
        throw std::invalid_argument("context spec: train range must lie inside test range");
    } else {
      if (!(test_lo <= test_hi))
        throw std::invalid_argument("context spec: empty test interval");
    }
  }
};

inline double sample_context(const ContextSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  if (!spec.train_set.empty()) {
    std::uniform_int_distribution<std::size_t> d(0, spec.train_set.size() - 1);
    return spec.train_set[d(rng)];
  }
  if (spec.train_lo == spec.train_hi) return spec.train_lo;
  return uniform(rng, spec.train_lo, spec.train_hi);
}

inline double sample_test_context(const ContextSpec& spec, std::mt19937_64& rng) {
  if (spec.test_lo == spec.test_hi) return spec.test_lo;
  return uniform(rng, spec.test_lo, spec.test_hi);
}

}  // namespace bcpo::env
