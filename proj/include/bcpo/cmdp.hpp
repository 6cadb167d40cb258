#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcpo/joint_pmf.hpp"

namespace bcpo::oracle {

// Context-blind Markov behavior policy pi(a|s); generates windows and
// trajectory laws for the exact oracles.
struct BehaviorPolicy {
  long n_states = 0;
  long n_actions = 0;
  std::vector<double> p;  // [s][a]

  static BehaviorPolicy uniform(long n_states, long n_actions);
  static BehaviorPolicy deterministic(const std::vector<long>& action_of_state,
                                      long n_actions);
  double at(long s, long a) const { return p[static_cast<std::size_t>(s * n_actions + a)]; }
  void validate() const;
};

// Finite contextual MDP: per-context kernels, rewards, and initial state
// distributions over shared state/action alphabets.
struct TabularCMDP {
  long n_states = 0;
  long n_actions = 0;
  long n_contexts = 0;
  double discount = 0.99;
  long horizon = 0;  // trajectory length for exact enumeration (0 = unset)
  std::vector<double> ctx_prior;  // [C]
  std::vector<double> initial;    // [C][S]
  std::vector<double> kernel;     // [C][S][A][S']
  std::vector<double> reward;     // [C][S][A]

  static TabularCMDP empty(long S, long A, long C);

  double P(long c, long s, long a, long s2) const {
    return kernel[static_cast<std::size_t>(((c * n_states + s) * n_actions + a) * n_states + s2)];
  }
  double& P(long c, long s, long a, long s2) {
    return kernel[static_cast<std::size_t>(((c * n_states + s) * n_actions + a) * n_states + s2)];
  }
  double R(long c, long s, long a) const {
    return reward[static_cast<std::size_t>((c * n_states + s) * n_actions + a)];
  }
  double& R(long c, long s, long a) {
    return reward[static_cast<std::size_t>((c * n_states + s) * n_actions + a)];
  }
  double mu(long c, long s) const {
    return initial[static_cast<std::size_t>(c * n_states + s)];
  }
  double& mu(long c, long s) {
    return initial[static_cast<std::size_t>(c * n_states + s)];
  }

  void validate(double tol = 1e-12) const;
};

// Row-stochastic channel q(z|o) from a finite observation alphabet to a
// finite code alphabet.
struct DiscreteEncoder {
  long n_in = 0;
  long n_out = 0;
  std::vector<double> q;  // [o][z]

  static DiscreteEncoder identity(long n);
  static DiscreteEncoder constant(long n_in);
  static DiscreteEncoder deterministic(const std::vector<long>& code_of_obs, long n_out);
  double at(long o, long z) const {
    return q[static_cast<std::size_t>(o * n_out + z)];
  }
  void validate(double tol = 1e-12) const;
};

// Exact law of length-T trajectories (s_1,a_1,...,s_T,a_T) under a behavior
// policy; joint axes are [C, X1..XT] with the composite symbol X=(s,a).
// Refuses horizons beyond 6 or dense laws beyond the 10^7-cell cap.
struct TrajectoryLaw {
  info::JointPMF joint;
  long n_states = 0;
  long n_actions = 0;
  long horizon = 0;

  long x_of(long s, long a) const { return s * n_actions + a; }
};

TrajectoryLaw enumerate_trajectories(const TabularCMDP& m, const BehaviorPolicy& pol,
                                     long T);

// p(c, o) where o is the flattened length-k window symbol over (S*A)^k.
info::JointPMF window_joint(const TrajectoryLaw& law, long k);

// p(c, z) induced by an encoder on a [C, O] window joint.
info::JointPMF code_joint(const info::JointPMF& window, const DiscreteEncoder& enc);

// Builds a deterministic chain CMDP whose contexts differ in slip probability
// and reward scale. slip_override >= 0 pins a common slip for every context.
TabularCMDP chain_mdp(long ctx_count, long length, std::uint64_t seed,
                      double slip_override = -1.0, double discount = 0.9);

}  // namespace bcpo::oracle
