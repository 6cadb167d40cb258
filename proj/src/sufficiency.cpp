#include "bcpo/sufficiency.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "bcpo/info_bounds.hpp"
#include "bcpo/info_measures.hpp"

namespace bcpo::oracle {

using nlohmann::json;

namespace {

std::vector<std::string> x_axes(long T) {
  std::vector<std::string> v;
  for (long t = 1; t <= T; ++t) v.push_back("X" + std::to_string(t));
  return v;
}

}  // namespace

std::string SufficiencyReport::to_json() const {
  json j{{"observation_sufficient", observation_sufficient},
         {"obs_residual_nats", obs_residual},
         {"weak_control", weak_control},
         {"return_gap", return_gap},
         {"strong_control", strong_control},
         {"max_q_deviation", max_q_deviation},
         {"delta_i_nats", delta_i},
         {"i_c_tau_nats", i_c_tau},
         {"i_c_window_nats", i_c_window},
         {"i_c_code_nats", i_c_code},
         {"j_star", j_star},
         {"j_best_code", j_best_code},
         {"window_bayes_error", window_bayes_error},
         {"window_length", window_length},
         {"horizon", horizon},
         {"hierarchy_ok", hierarchy_ok}};
  return j.dump(2);
}

SufficiencyReport certify_sufficiency(const TabularCMDP& m, const DiscreteEncoder& enc,
                                      const BehaviorPolicy& window_policy, long k,
                                      double tol) {
  const long T = m.horizon > 0 ? m.horizon : k;
  if (k > T) throw std::invalid_argument("certify_sufficiency: k exceeds horizon");
  const TrajectoryLaw law = enumerate_trajectories(m, window_policy, T);
  const info::JointPMF w = window_joint(law, k);
  const info::JointPMF cz = code_joint(w, enc);

  SufficiencyReport r;
  r.window_length = k;
  r.horizon = T;
  r.i_c_tau = info::mutual_information(law.joint, {"C"}, x_axes(T));
  r.i_c_window = info::mutual_information(w, "C", "O");
  r.i_c_code = info::mutual_information(cz, "C", "Z");
  r.window_bayes_error = info::bayes_error(w, "C", "O");

  r.obs_residual = r.i_c_window - r.i_c_code;
  r.observation_sufficient = r.obs_residual <= tol;
  r.delta_i = r.i_c_tau - r.i_c_code;

  r.j_star = optimal_return(m);
  const AugmentedVI aug = augmented_value_iteration(m, enc, w);
  r.j_best_code = best_code_policy_return(m, aug, w, enc);
  r.return_gap = r.j_star - r.j_best_code;
  r.weak_control = r.return_gap <= tol;

  // Pointwise deviation over supported (z, c) pairs.
  std::vector<QTable> q_star(static_cast<std::size_t>(m.n_contexts));
  for (long c = 0; c < m.n_contexts; ++c) q_star[static_cast<std::size_t>(c)] = value_iteration(m, c);
  const long Z = enc.n_out;
  double dev = 0.0;
  for (long z = 0; z < Z; ++z) {
    if (!aug.supported[static_cast<std::size_t>(z)]) continue;
    for (long c = 0; c < m.n_contexts; ++c) {
      if (aug.posterior_at(z, c) <= 1e-12) continue;
      for (long s = 0; s < m.n_states; ++s)
        for (long a = 0; a < m.n_actions; ++a)
          dev = std::max(dev, std::abs(aug.q[static_cast<std::size_t>(z)].at(s, a) -
                                       q_star[static_cast<std::size_t>(c)].at(s, a)));
    }
  }
  r.max_q_deviation = dev;
  r.strong_control = dev <= tol;

  r.hierarchy_ok = (!r.strong_control || r.observation_sufficient) &&
                   (!r.strong_control || r.weak_control);
  return r;
}

std::string InfoReport::to_json() const {
  json j{{"delta_i_nats", delta_i},
         {"processing_gap_nats", processing_gap},
         {"encoder_gap_nats", encoder_gap},
         {"i_c_tau_nats", i_c_tau},
         {"i_c_window_nats", i_c_window},
         {"i_c_code_nats", i_c_code},
         {"window_length", window_length},
         {"horizon", horizon}};
  if (has_replay) {
    j["replay_gap_nats"] = replay_gap;
    j["replay_eps"] = replay_eps;
    j["replay_bound_valid"] = replay_bound_valid;
    if (replay_bound_valid) j["replay_bound_nats"] = replay_bound;
  }
  return j.dump(2);
}

InfoReport information_residual(const TabularCMDP& m, const BehaviorPolicy& policy,
                                const DiscreteEncoder& enc, long k,
                                const info::JointPMF* buffer_window) {
  const long T = m.horizon > 0 ? m.horizon : k;
  if (k > T) throw std::invalid_argument("information_residual: k exceeds horizon");
  const TrajectoryLaw law = enumerate_trajectories(m, policy, T);
  const info::JointPMF w = window_joint(law, k);
  const info::JointPMF cz = code_joint(w, enc);

  InfoReport r;
  r.window_length = k;
  r.horizon = T;
  r.i_c_tau = info::mutual_information(law.joint, {"C"}, x_axes(T));
  r.i_c_window = info::mutual_information(w, "C", "O");
  r.i_c_code = info::mutual_information(cz, "C", "Z");
  r.processing_gap = r.i_c_tau - r.i_c_window;
  r.encoder_gap = r.i_c_window - r.i_c_code;
  r.delta_i = r.i_c_tau - r.i_c_code;

  if (buffer_window != nullptr) {
    r.has_replay = true;
    const info::JointPMF cz_buf = code_joint(*buffer_window, enc);
    const double i_buf = info::mutual_information(cz_buf, "C", "Z");
    r.replay_gap = std::abs(r.i_c_code - i_buf);
    // Effective clip radius of the policy/buffer window ratio.
    double eps = 0.0;
    bool ratio_defined = true;
    for (long i = 0; i < w.numel(); ++i) {
      const double pq = w[i], pb = (*buffer_window)[i];
      if (pb <= 0.0) {
        if (pq > 0.0) ratio_defined = false;
        continue;
      }
      eps = std::max(eps, std::abs(pq / pb - 1.0));
    }
    r.replay_eps = ratio_defined ? eps : std::numeric_limits<double>::infinity();
    r.replay_bound_valid =
        ratio_defined && eps > 0.0 && eps < 1.0 && m.n_contexts > 2;
    if (r.replay_bound_valid)
      r.replay_bound = info::replay_gap_bound(eps, m.n_contexts);
  }
  return r;
}

}  // namespace bcpo::oracle
