#include "bcpo/cmdp.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace bcpo::oracle {

BehaviorPolicy BehaviorPolicy::uniform(long n_states, long n_actions) {
  BehaviorPolicy b{n_states, n_actions,
                   std::vector<double>(static_cast<std::size_t>(n_states * n_actions),
                                       1.0 / static_cast<double>(n_actions))};
  return b;
}

BehaviorPolicy BehaviorPolicy::deterministic(const std::vector<long>& action_of_state,
                                             long n_actions) {
  const long S = static_cast<long>(action_of_state.size());
  BehaviorPolicy b{S, n_actions,
                   std::vector<double>(static_cast<std::size_t>(S * n_actions), 0.0)};
  for (long s = 0; s < S; ++s)
    b.p[static_cast<std::size_t>(s * n_actions + action_of_state[static_cast<std::size_t>(s)])] = 1.0;
  return b;
}

void BehaviorPolicy::validate() const {
  for (long s = 0; s < n_states; ++s) {
    double sum = 0.0;
    for (long a = 0; a < n_actions; ++a) sum += at(s, a);
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("behavior policy row " + std::to_string(s) +
                                  " not normalized");
  }
}

TabularCMDP TabularCMDP::empty(long S, long A, long C) {
  TabularCMDP m;
  m.n_states = S;
  m.n_actions = A;
  m.n_contexts = C;
  m.ctx_prior.assign(static_cast<std::size_t>(C), 1.0 / static_cast<double>(C));
  m.initial.assign(static_cast<std::size_t>(C * S), 0.0);
  m.kernel.assign(static_cast<std::size_t>(C * S * A * S), 0.0);
  m.reward.assign(static_cast<std::size_t>(C * S * A), 0.0);
  return m;
}

void TabularCMDP::validate(double tol) const {
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::invalid_argument("cmdp: discount must be in [0,1)");
  double prior_sum = 0.0;
  for (double v : ctx_prior) prior_sum += v;
  if (std::abs(prior_sum - 1.0) > tol)
    throw std::invalid_argument("cmdp: context prior not normalized");
  for (long c = 0; c < n_contexts; ++c) {
    double mu_sum = 0.0;
    for (long s = 0; s < n_states; ++s) mu_sum += mu(c, s);
    if (std::abs(mu_sum - 1.0) > tol)
      throw std::invalid_argument("cmdp: initial distribution of context " +
                                  std::to_string(c) + " not normalized");
    for (long s = 0; s < n_states; ++s)
      for (long a = 0; a < n_actions; ++a) {
        if (!std::isfinite(R(c, s, a)))
          throw std::invalid_argument("cmdp: non-finite reward");
        double row = 0.0;
        for (long s2 = 0; s2 < n_states; ++s2) {
          const double v = P(c, s, a, s2);
          if (v < 0.0) throw std::invalid_argument("cmdp: negative kernel entry");
          row += v;
        }
        if (std::abs(row - 1.0) > tol)
          throw std::invalid_argument("cmdp: kernel row (c=" + std::to_string(c) +
                                      ",s=" + std::to_string(s) + ",a=" +
                                      std::to_string(a) + ") not stochastic");
      }
  }
}

DiscreteEncoder DiscreteEncoder::identity(long n) {
  DiscreteEncoder e{n, n, std::vector<double>(static_cast<std::size_t>(n * n), 0.0)};
  for (long i = 0; i < n; ++i) e.q[static_cast<std::size_t>(i * n + i)] = 1.0;
  return e;
}

DiscreteEncoder DiscreteEncoder::constant(long n_in) {
  DiscreteEncoder e{n_in, 1, std::vector<double>(static_cast<std::size_t>(n_in), 1.0)};
  return e;
}

DiscreteEncoder DiscreteEncoder::deterministic(const std::vector<long>& code_of_obs,
                                               long n_out) {
  const long n_in = static_cast<long>(code_of_obs.size());
  DiscreteEncoder e{n_in, n_out,
                    std::vector<double>(static_cast<std::size_t>(n_in * n_out), 0.0)};
  for (long o = 0; o < n_in; ++o) {
    const long z = code_of_obs[static_cast<std::size_t>(o)];
    if (z < 0 || z >= n_out)
      throw std::invalid_argument("encoder: code index out of range");
    e.q[static_cast<std::size_t>(o * n_out + z)] = 1.0;
  }
  return e;
}

void DiscreteEncoder::validate(double tol) const {
  for (long o = 0; o < n_in; ++o) {
    double row = 0.0;
    for (long z = 0; z < n_out; ++z) {
      const double v = at(o, z);
      if (v < 0.0) throw std::invalid_argument("encoder: negative entry");
      row += v;
    }
    if (std::abs(row - 1.0) > tol)
      throw std::invalid_argument("encoder: row " + std::to_string(o) +
                                  " not stochastic");
  }
}

TrajectoryLaw enumerate_trajectories(const TabularCMDP& m, const BehaviorPolicy& pol,
                                     long T) {
  if (T < 1) throw std::invalid_argument("enumerate_trajectories: T >= 1 required");
  if (T > 6)
    throw info::CapacityError(
        "exact trajectory enumeration refuses horizons beyond 6");
  m.validate();
  pol.validate();
  const long X = m.n_states * m.n_actions;
  std::vector<info::Axis> axes{{"C", m.n_contexts}};
  for (long t = 1; t <= T; ++t) axes.push_back({"X" + std::to_string(t), X});
  info::JointPMF joint = info::JointPMF::zeros(axes);  // throws past the cell cap

  // DFS over (s,a) paths, accumulating path probability.
  struct Frame {
    long s, a;
  };
  std::vector<Frame> path(static_cast<std::size_t>(T));
  for (long c = 0; c < m.n_contexts; ++c) {
    const double pc = m.ctx_prior[static_cast<std::size_t>(c)];
    if (pc <= 0.0) continue;
    // iterative DFS with explicit probability stack
    std::vector<double> prob(static_cast<std::size_t>(T) + 1);
    std::vector<long> sym(static_cast<std::size_t>(T));
    std::function<void(long, long, double)> walk = [&](long t, long s, double pr) {
      if (pr <= 0.0) return;
      if (t == T) {
        long f = c;
        for (long i = 0; i < T; ++i) f = f * X + sym[static_cast<std::size_t>(i)];
        joint[f] += pr;
        return;
      }
      for (long a = 0; a < m.n_actions; ++a) {
        const double pa = pol.at(s, a);
        if (pa <= 0.0) continue;
        sym[static_cast<std::size_t>(t)] = s * m.n_actions + a;
        if (t + 1 == T) {
          walk(t + 1, -1, pr * pa);
        } else {
          for (long s2 = 0; s2 < m.n_states; ++s2) {
            const double pt = m.P(c, s, a, s2);
            if (pt <= 0.0) continue;
            walk(t + 1, s2, pr * pa * pt);
          }
        }
      }
    };
    for (long s1 = 0; s1 < m.n_states; ++s1) {
      const double p0 = m.mu(c, s1);
      if (p0 <= 0.0) continue;
      walk(0, s1, pc * p0);
    }
  }
  return TrajectoryLaw{std::move(joint), m.n_states, m.n_actions, T};
}

info::JointPMF window_joint(const TrajectoryLaw& law, long k) {
  if (k < 1 || k > law.horizon)
    throw std::invalid_argument("window_joint: require 1 <= k <= T");
  std::vector<std::string> keep{"C"};
  for (long t = 1; t <= k; ++t) keep.push_back("X" + std::to_string(t));
  info::JointPMF m = law.joint.marginal(keep);
  // Row-major [C, X1..Xk] flat layout doubles as the mixed-radix window index,
  // so the data can be reinterpreted as a [C, O] joint directly.
  long O = 1;
  for (long t = 0; t < k; ++t) O *= law.n_states * law.n_actions;
  std::vector<double> probs(m.data(), m.data() + m.numel());
  return info::JointPMF({{"C", m.axes()[0].size}, {"O", O}}, std::move(probs));
}

info::JointPMF code_joint(const info::JointPMF& window, const DiscreteEncoder& enc) {
  const long C = window.axes()[0].size;
  const long O = window.axes()[1].size;
  if (enc.n_in != O)
    throw std::invalid_argument("code_joint: encoder input alphabet mismatch");
  info::JointPMF out = info::JointPMF::zeros({{"C", C}, {"Z", enc.n_out}});
  for (long c = 0; c < C; ++c)
    for (long o = 0; o < O; ++o) {
      const double pco = window[c * O + o];
      if (pco <= 0.0) continue;
      for (long z = 0; z < enc.n_out; ++z) {
        const double qz = enc.at(o, z);
        if (qz > 0.0) out[c * enc.n_out + z] += pco * qz;
      }
    }
  return out;
}

TabularCMDP chain_mdp(long ctx_count, long length, std::uint64_t seed,
                      double slip_override, double discount) {
  if (ctx_count < 2) throw std::invalid_argument("chain_mdp: ctx_count >= 2 required");
  if (length < 2) throw std::invalid_argument("chain_mdp: length >= 2 required");
  TabularCMDP m = TabularCMDP::empty(length, 2, ctx_count);
  m.discount = discount;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.05);
  const long goal = length - 1;
  for (long c = 0; c < ctx_count; ++c) {
    m.mu(c, 0) = 1.0;
    double slip = slip_override >= 0.0
                      ? slip_override
                      : 0.1 + 0.25 * static_cast<double>(c) /
                                static_cast<double>(ctx_count - 1) +
                            jitter(rng);
    const double scale = 1.0 + 0.5 * static_cast<double>(c);
    for (long s = 0; s < length; ++s) {
      if (s == goal) {
        // absorbing
        m.P(c, s, 0, s) = 1.0;
        m.P(c, s, 1, s) = 1.0;
        continue;
      }
      const long left = s > 0 ? s - 1 : s;
      const long right = s + 1;
      m.P(c, s, 0, left) += 1.0 - slip;
      m.P(c, s, 0, s) += slip;
      m.P(c, s, 1, right) += 1.0 - slip;
      m.P(c, s, 1, s) += slip;
      if (s == goal - 1) m.R(c, s, 1) = scale;
    }
  }
  m.validate();
  return m;
}

}  // namespace bcpo::oracle
