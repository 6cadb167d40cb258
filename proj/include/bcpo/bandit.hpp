#pragma once

#include <random>
#include <stdexcept>

namespace bcpo::env {

// One-step two-context bandit. Contexts {c0, c1} uniform; actions a+ / a-;
// observations o+ / o- through the p-channel Pr[o+|c1] = p, Pr[o+|c0] = 1-p.
// Rewards: r_c1(a+) = +1, r_c1(a-) = -1, r_c0(a+) = -1, r_c0(a-) = +1.
struct TwoContextBandit {
  static constexpr int kC0 = 0;
  static constexpr int kC1 = 1;
  static constexpr int kActionPlus = 0;
  static constexpr int kActionMinus = 1;
  static constexpr int kObsPlus = 0;
  static constexpr int kObsMinus = 1;

  double p;

  explicit TwoContextBandit(double p_) : p(p_) {
    if (!(p > 0.0 && p < 1.0) || p == 0.5)
      throw std::invalid_argument("bandit: p must be in (0,1) \\ {1/2}");
  }

  int sample_context(std::mt19937_64& rng) const {
    std::bernoulli_distribution d(0.5);
    return d(rng) ? kC1 : kC0;
  }

  int observe(int ctx, std::mt19937_64& rng) const {
    const double p_plus = ctx == kC1 ? p : 1.0 - p;
    std::bernoulli_distribution d(p_plus);
    return d(rng) ? kObsPlus : kObsMinus;
  }

  double reward(int ctx, int action) const {
    const double aligned = action == kActionPlus ? 1.0 : -1.0;
    return ctx == kC1 ? aligned : -aligned;
  }

  double channel(int obs, int ctx) const {
    const double p_plus = ctx == kC1 ? p : 1.0 - p;
    return obs == kObsPlus ? p_plus : 1.0 - p_plus;
  }
};

struct BanditRound {
  int observation;
  double reward;
};

inline BanditRound bandit_round(const TwoContextBandit& b, int ctx, int action,
                                std::mt19937_64& rng) {
  if (ctx != TwoContextBandit::kC0 && ctx != TwoContextBandit::kC1)
    throw std::invalid_argument("bandit_round: ctx must be c0 or c1");
  return {b.observe(ctx, rng), b.reward(ctx, action)};
}

}  // namespace bcpo::env
