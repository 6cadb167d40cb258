#include "bcpo/instances.hpp"

#include "bcpo/bandit.hpp"
#include "bcpo/rng.hpp"

namespace bcpo::oracle {

TabularCMDP bandit_cmdp(double p) {
  TabularCMDP m = TabularCMDP::empty(2, 2, 2);
  m.discount = 0.0;
  m.horizon = 1;
  const env::TwoContextBandit b(p);
  for (long c = 0; c < 2; ++c) {
    m.mu(c, env::TwoContextBandit::kObsPlus) =
        b.channel(env::TwoContextBandit::kObsPlus, static_cast<int>(c));
    m.mu(c, env::TwoContextBandit::kObsMinus) =
        b.channel(env::TwoContextBandit::kObsMinus, static_cast<int>(c));
    for (long s = 0; s < 2; ++s)
      for (long a = 0; a < 2; ++a) {
        m.R(c, s, a) = b.reward(static_cast<int>(c), static_cast<int>(a));
        m.P(c, s, a, s) = 1.0;
      }
  }
  m.validate();
  return m;
}

DiscreteEncoder bandit_posterior_encoder() {
  return DiscreteEncoder::deterministic({0, 0, 1, 1}, 2);  // window index s*2+a
}

TabularCMDP revealed_context_cmdp(std::mt19937_64& rng, long n_contexts, long n_states,
                                  long n_actions, double discount) {
  TabularCMDP m = TabularCMDP::empty(n_states, n_actions, n_contexts);
  m.discount = discount;
  m.horizon = 2;
  for (long s = 0; s < n_states; ++s)
    for (long a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      std::vector<double> row(static_cast<std::size_t>(n_states));
      for (long s2 = 0; s2 < n_states; ++s2) {
        row[static_cast<std::size_t>(s2)] = uniform(rng, 0.05, 1.0);
        sum += row[static_cast<std::size_t>(s2)];
      }
      for (long c = 0; c < n_contexts; ++c)
        for (long s2 = 0; s2 < n_states; ++s2)
          m.P(c, s, a, s2) = row[static_cast<std::size_t>(s2)] / sum;
    }
  for (long c = 0; c < n_contexts; ++c) {
    m.mu(c, c % n_states) = 1.0;
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    for (long s = 0; s < n_states; ++s) {
      const double base = uniform(rng, -0.2, 0.2);
      const double d = uniform(rng, 0.5, 1.0);
      for (long a = 0; a < n_actions; ++a)
        m.R(c, s, a) = base + sign * d * (a == 0 ? 1.0 : -1.0);
    }
  }
  m.validate();
  return m;
}

DiscreteEncoder merge_adjacent_contexts_encoder(long n_states, long n_actions) {
  std::vector<long> code(static_cast<std::size_t>(n_states * n_actions));
  for (long o = 0; o < n_states * n_actions; ++o)
    code[static_cast<std::size_t>(o)] = (o / n_actions) / 2;
  return DiscreteEncoder::deterministic(code, (n_states + 1) / 2);
}

}  // namespace bcpo::oracle
