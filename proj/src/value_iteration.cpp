#include "bcpo/value_iteration.hpp"

#include <cmath>
#include <stdexcept>

namespace bcpo::oracle {

namespace {

constexpr long kMaxSweeps = 2'000'000;

// One Bellman optimality sweep on a generic (kernel, reward) pair.
double sweep(const std::vector<double>& kernel, const std::vector<double>& reward,
             long S, long A, double gamma, std::vector<double>& q,
             std::vector<double>& scratch_v) {
  for (long s = 0; s < S; ++s) {
    double best = q[static_cast<std::size_t>(s * A)];
    for (long a = 1; a < A; ++a) best = std::max(best, q[static_cast<std::size_t>(s * A + a)]);
    scratch_v[static_cast<std::size_t>(s)] = best;
  }
  double diff = 0.0;
  for (long s = 0; s < S; ++s)
    for (long a = 0; a < A; ++a) {
      double next = 0.0;
      const double* row = kernel.data() + (s * A + a) * S;
      for (long s2 = 0; s2 < S; ++s2) next += row[s2] * scratch_v[static_cast<std::size_t>(s2)];
      const double nq = reward[static_cast<std::size_t>(s * A + a)] + gamma * next;
      diff = std::max(diff, std::abs(nq - q[static_cast<std::size_t>(s * A + a)]));
      q[static_cast<std::size_t>(s * A + a)] = nq;
    }
  return diff;
}

QTable solve_mdp(const std::vector<double>& kernel, const std::vector<double>& reward,
                 long S, long A, double gamma, double tol) {
  QTable t{S, A, std::vector<double>(static_cast<std::size_t>(S * A), 0.0)};
  std::vector<double> v(static_cast<std::size_t>(S), 0.0);
  for (long it = 0; it < kMaxSweeps; ++it) {
    const double diff = sweep(kernel, reward, S, A, gamma, t.q, v);
    if (diff < tol) return t;  // residual of the returned table <= gamma * diff
  }
  throw std::runtime_error("value iteration failed to converge");
}

void extract_context(const TabularCMDP& m, long c, std::vector<double>& kernel,
                     std::vector<double>& reward) {
  const long S = m.n_states, A = m.n_actions;
  kernel.assign(static_cast<std::size_t>(S * A * S), 0.0);
  reward.assign(static_cast<std::size_t>(S * A), 0.0);
  for (long s = 0; s < S; ++s)
    for (long a = 0; a < A; ++a) {
      reward[static_cast<std::size_t>(s * A + a)] = m.R(c, s, a);
      for (long s2 = 0; s2 < S; ++s2)
        kernel[static_cast<std::size_t>((s * A + a) * S + s2)] = m.P(c, s, a, s2);
    }
}

}  // namespace

double QTable::v(long s) const {
  double best = at(s, 0);
  for (long a = 1; a < n_actions; ++a) best = std::max(best, at(s, a));
  return best;
}

std::vector<long> QTable::greedy() const {
  std::vector<long> pi(static_cast<std::size_t>(n_states), 0);
  for (long s = 0; s < n_states; ++s) {
    long best = 0;
    for (long a = 1; a < n_actions; ++a)
      if (at(s, a) > at(s, best)) best = a;
    pi[static_cast<std::size_t>(s)] = best;
  }
  return pi;
}

QTable value_iteration(const TabularCMDP& m, long c, double tol) {
  if (c < 0 || c >= m.n_contexts)
    throw std::invalid_argument("value_iteration: context out of range");
  m.validate();
  std::vector<double> kernel, reward;
  extract_context(m, c, kernel, reward);
  return solve_mdp(kernel, reward, m.n_states, m.n_actions, m.discount, tol);
}

double bellman_residual(const TabularCMDP& m, long c, const QTable& q) {
  const long S = m.n_states, A = m.n_actions;
  double res = 0.0;
  for (long s = 0; s < S; ++s)
    for (long a = 0; a < A; ++a) {
      double next = 0.0;
      for (long s2 = 0; s2 < S; ++s2) next += m.P(c, s, a, s2) * q.v(s2);
      res = std::max(res, std::abs(m.R(c, s, a) + m.discount * next - q.at(s, a)));
    }
  return res;
}

QTable policy_evaluation(const TabularCMDP& m, long c, const BehaviorPolicy& pi,
                         double tol) {
  const long S = m.n_states, A = m.n_actions;
  QTable t{S, A, std::vector<double>(static_cast<std::size_t>(S * A), 0.0)};
  std::vector<double> v(static_cast<std::size_t>(S), 0.0);
  for (long it = 0; it < kMaxSweeps; ++it) {
    for (long s = 0; s < S; ++s) {
      double val = 0.0;
      for (long a = 0; a < A; ++a) val += pi.at(s, a) * t.at(s, a);
      v[static_cast<std::size_t>(s)] = val;
    }
    double diff = 0.0;
    for (long s = 0; s < S; ++s)
      for (long a = 0; a < A; ++a) {
        double next = 0.0;
        for (long s2 = 0; s2 < S; ++s2) next += m.P(c, s, a, s2) * v[static_cast<std::size_t>(s2)];
        const double nq = m.R(c, s, a) + m.discount * next;
        diff = std::max(diff, std::abs(nq - t.at(s, a)));
        t.at(s, a) = nq;
      }
    if (diff < tol) return t;
  }
  throw std::runtime_error("policy evaluation failed to converge");
}

double policy_return(const TabularCMDP& m, long c, const BehaviorPolicy& pi,
                     double tol) {
  const QTable t = policy_evaluation(m, c, pi, tol);
  double j = 0.0;
  for (long s = 0; s < m.n_states; ++s) {
    double val = 0.0;
    for (long a = 0; a < m.n_actions; ++a) val += pi.at(s, a) * t.at(s, a);
    j += m.mu(c, s) * val;
  }
  return j;
}

double optimal_return(const TabularCMDP& m, double tol) {
  double j = 0.0;
  for (long c = 0; c < m.n_contexts; ++c) {
    const QTable q = value_iteration(m, c, tol);
    double jc = 0.0;
    for (long s = 0; s < m.n_states; ++s) jc += m.mu(c, s) * q.v(s);
    j += m.ctx_prior[static_cast<std::size_t>(c)] * jc;
  }
  return j;
}

AugmentedVI augmented_value_iteration(const TabularCMDP& m, const DiscreteEncoder& enc,
                                      const info::JointPMF& window, double tol) {
  enc.validate();
  const info::JointPMF cz = code_joint(window, enc);
  const long C = m.n_contexts, Z = enc.n_out, S = m.n_states, A = m.n_actions;
  AugmentedVI out;
  out.n_codes = Z;
  out.n_contexts = C;
  out.code_prob.assign(static_cast<std::size_t>(Z), 0.0);
  out.posterior.assign(static_cast<std::size_t>(Z * C), 0.0);
  out.q.resize(static_cast<std::size_t>(Z));
  out.supported.assign(static_cast<std::size_t>(Z), false);
  for (long z = 0; z < Z; ++z) {
    double pz = 0.0;
    for (long c = 0; c < C; ++c) pz += cz[c * Z + z];
    out.code_prob[static_cast<std::size_t>(z)] = pz;
    if (pz <= 1e-15) {
      out.notes.push_back("code " + std::to_string(z) +
                          " has zero probability; excluded");
      continue;
    }
    out.supported[static_cast<std::size_t>(z)] = true;
    for (long c = 0; c < C; ++c)
      out.posterior[static_cast<std::size_t>(z * C + c)] = cz[c * Z + z] / pz;
    // Posterior-averaged MDP for this code.
    std::vector<double> kernel(static_cast<std::size_t>(S * A * S), 0.0);
    std::vector<double> reward(static_cast<std::size_t>(S * A), 0.0);
    for (long c = 0; c < C; ++c) {
      const double w = out.posterior[static_cast<std::size_t>(z * C + c)];
      if (w <= 0.0) continue;
      for (long s = 0; s < S; ++s)
        for (long a = 0; a < A; ++a) {
          reward[static_cast<std::size_t>(s * A + a)] += w * m.R(c, s, a);
          for (long s2 = 0; s2 < S; ++s2)
            kernel[static_cast<std::size_t>((s * A + a) * S + s2)] += w * m.P(c, s, a, s2);
        }
    }
    out.q[static_cast<std::size_t>(z)] = solve_mdp(kernel, reward, S, A, m.discount, tol);
  }
  return out;
}

double best_code_policy_return(const TabularCMDP& m, const AugmentedVI& aug,
                               const info::JointPMF& window,
                               const DiscreteEncoder& enc, double tol) {
  const info::JointPMF cz = code_joint(window, enc);
  const long C = m.n_contexts, Z = enc.n_out;
  double j = 0.0;
  for (long z = 0; z < Z; ++z) {
    if (!aug.supported[static_cast<std::size_t>(z)]) continue;
    const BehaviorPolicy pi_z = BehaviorPolicy::deterministic(
        aug.q[static_cast<std::size_t>(z)].greedy(), m.n_actions);
    for (long c = 0; c < C; ++c) {
      const double pcz = cz[c * Z + z];
      if (pcz <= 0.0) continue;
      const QTable t = policy_evaluation(m, c, pi_z, tol);
      double jc = 0.0;
      for (long s = 0; s < m.n_states; ++s) {
        double val = 0.0;
        for (long a = 0; a < m.n_actions; ++a) val += pi_z.at(s, a) * t.at(s, a);
        jc += m.mu(c, s) * val;
      }
      j += pcz * jc;
    }
  }
  return j;
}

}  // namespace bcpo::oracle
