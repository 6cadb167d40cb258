#pragma once

#include <vector>

#include "bcpo/cmdp.hpp"

namespace bcpo::oracle {

struct QTable {
  long n_states = 0;
  long n_actions = 0;
  std::vector<double> q;  // [s][a]

  double at(long s, long a) const {
    return q[static_cast<std::size_t>(s * n_actions + a)];
  }
  double& at(long s, long a) { return q[static_cast<std::size_t>(s * n_actions + a)]; }

  double v(long s) const;
  // Ties broken toward the lowest action index.
  std::vector<long> greedy() const;
};

// Discounted value iteration for one context; returned table has sup-norm
// Bellman residual below tol.
QTable value_iteration(const TabularCMDP& m, long c, double tol = 1e-10);

double bellman_residual(const TabularCMDP& m, long c, const QTable& q);

// Q^pi for a fixed context-blind policy.
QTable policy_evaluation(const TabularCMDP& m, long c, const BehaviorPolicy& pi,
                         double tol = 1e-12);

// J_c(pi) from the context's initial distribution.
double policy_return(const TabularCMDP& m, long c, const BehaviorPolicy& pi,
                     double tol = 1e-12);

// Optimal context-aware return J* = E_c E_{s~mu_c} V*_c(s).
double optimal_return(const TabularCMDP& m, double tol = 1e-10);

// Augmented-state oracle: the latent code is drawn once per episode from the
// encoder applied to the window law, and the posterior over contexts given
// the code stays fixed within the episode. Each supported code solves the
// posterior-averaged MDP.
struct AugmentedVI {
  long n_codes = 0;
  std::vector<double> code_prob;    // p(z)
  std::vector<double> posterior;    // [z][c], rows of supported codes sum to 1
  std::vector<QTable> q;            // per code; empty table when unsupported
  std::vector<bool> supported;      // p(z) > 0
  std::vector<std::string> notes;   // excluded zero-probability codes

  double posterior_at(long z, long c) const {
    return posterior[static_cast<std::size_t>(z) * static_cast<std::size_t>(n_contexts) +
                     static_cast<std::size_t>(c)];
  }
  long n_contexts = 0;
};

AugmentedVI augmented_value_iteration(const TabularCMDP& m, const DiscreteEncoder& enc,
                                      const info::JointPMF& window,
                                      double tol = 1e-10);

// Return of the policy family {greedy of aug.q[z]} evaluated exactly in the
// true per-context dynamics, weighted by p(c, z).
double best_code_policy_return(const TabularCMDP& m, const AugmentedVI& aug,
                               const info::JointPMF& window,
                               const DiscreteEncoder& enc, double tol = 1e-12);

}  // namespace bcpo::oracle
