#pragma once

#include <optional>
#include <string>

#include "bcpo/value_iteration.hpp"

namespace bcpo::oracle {

// Certificate for one (CMDP, encoder, window policy, k) instance. All
// information quantities are exact and in nats.
struct SufficiencyReport {
  bool observation_sufficient = false;
  double obs_residual = 0.0;  // I(C;O) - I(C;Z)
  bool weak_control = false;
  double return_gap = 0.0;  // J* - best Z-conditioned return
  bool strong_control = false;
  double max_q_deviation = 0.0;  // max over supported (z,c) of |Q*_Z - Q*|
  double delta_i = 0.0;          // I(C;tau) - I(C;Z)

  double i_c_tau = 0.0;
  double i_c_window = 0.0;
  double i_c_code = 0.0;
  double j_star = 0.0;
  double j_best_code = 0.0;
  double window_bayes_error = 0.0;
  long window_length = 0;
  long horizon = 0;

  // strong => weak (Cor. on the hierarchy) and strong => observation must
  // hold in every emitted report.
  bool hierarchy_ok = true;

  std::string to_json() const;
};

SufficiencyReport certify_sufficiency(const TabularCMDP& m, const DiscreteEncoder& enc,
                                      const BehaviorPolicy& window_policy, long k,
                                      double tol = 1e-8);

// Exact information-residual decomposition under the policy-induced
// trajectory law: delta_i = processing + encoder.
struct InfoReport {
  double delta_i = 0.0;
  double processing_gap = 0.0;  // I(C;tau) - I(C;O)
  double encoder_gap = 0.0;     // I(C;O) - I(C;Z)
  double i_c_tau = 0.0;
  double i_c_window = 0.0;
  double i_c_code = 0.0;
  long window_length = 0;
  long horizon = 0;

  bool has_replay = false;
  double replay_gap = 0.0;       // |I_pi(C;Z) - I_buffer(C;Z)|
  double replay_eps = 0.0;       // max |ratio - 1| over shared support
  double replay_bound = 0.0;     // Prop.-style certificate when applicable
  bool replay_bound_valid = false;

  std::string to_json() const;
};

InfoReport information_residual(const TabularCMDP& m, const BehaviorPolicy& policy,
                                const DiscreteEncoder& enc, long k,
                                const info::JointPMF* buffer_window = nullptr);

}  // namespace bcpo::oracle
