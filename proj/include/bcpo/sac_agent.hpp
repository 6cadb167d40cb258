#pragma once

#include <memory>
#include <random>

#include "bcpo/mlp.hpp"
#include "bcpo/optim.hpp"

namespace bcpo::rl {

constexpr double kActorLogStdMin = -20.0;
constexpr double kActorLogStdMax = 2.0;

struct SacConfig {
  double lr = 3e-4;
  double discount = 0.99;
  double alpha = 0.1;  // fixed entropy coefficient
  double tau = 0.005;  // target smoothing
  long batch_size = 256;
  std::vector<long> hidden{256, 256};
  double action_scale = 10.0;  // tanh output is scaled to [-scale, scale]
};

// Transition batch on the augmented state (s, z); `done` masks terminal
// bootstrapping (1.0 = terminal). Truncation bootstraps normally.
struct SacBatch {
  nd::Tensor obs;       // [B, obs_dim]
  nd::Tensor act;       // [B, act_dim]
  nd::Tensor rew;       // [B]
  nd::Tensor obs_next;  // [B, obs_dim]
  nd::Tensor done;      // [B]
};

struct ActorSample {
  nd::Var action;    // [B, act_dim], tanh-squashed and scaled
  nd::Var log_prob;  // [B]
};

// Squashed-Gaussian actor + twin critics with polyak-averaged targets.
class SacAgent {
 public:
  SacAgent(nd::ParamStore& store, long obs_dim, long act_dim, const SacConfig& cfg,
           std::mt19937_64& init_rng);

  const SacConfig& config() const { return cfg_; }
  long obs_dim() const { return obs_dim_; }
  long act_dim() const { return act_dim_; }

  // Reparameterized tanh-Gaussian sample with the change-of-variables
  // log-density correction; noise is a [B, act_dim] standard-normal draw.
  ActorSample actor_sample(nd::Tape& tape, nd::Var obs, nd::Var noise) const;

  // No-grad batch sampling (used for critic targets and rollouts).
  struct ActionValue {
    nd::Tensor action;    // [B, act_dim]
    nd::Tensor log_prob;  // [B]
  };
  ActionValue actor_sample_eval(const nd::Tensor& obs, std::mt19937_64& rng,
                                bool deterministic = false) const;

  double act_scalar(const std::vector<double>& obs, std::mt19937_64& rng,
                    bool deterministic) const;

  // TD target y = r + gamma (1-done) (min_i Q_target_i(s',a') - alpha log pi(a'));
  // exposed for tests.
  nd::Tensor critic_targets(const SacBatch& batch, std::mt19937_64& rng,
                            double alpha_override = -1.0) const;

  struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double mean_q = 0.0;
    double mean_log_prob = 0.0;
  };
  // One critic step + one actor step + one polyak step on the targets.
  UpdateStats update(const SacBatch& batch, std::mt19937_64& rng);

  // Individual steps (no polyak); update() composes these.
  double critic_step(const SacBatch& batch, std::mt19937_64& rng,
                     double alpha_override = -1.0);
  double actor_step(const SacBatch& batch, std::mt19937_64& rng, UpdateStats* stats);

  // Loss evaluation without applying gradients (for contract tests).
  double critic_loss_value(const SacBatch& batch, std::mt19937_64& rng,
                           double alpha_override = -1.0) const;
  double actor_loss_value(const SacBatch& batch, std::mt19937_64& rng,
                          double alpha_override = -1.0) const;

  const nd::MlpParams& actor() const { return actor_; }
  const nd::MlpParams& q1() const { return q1_; }
  const nd::MlpParams& q2() const { return q2_; }
  nd::MlpParams& q1_mutable() { return q1_; }
  const nd::MlpParams& q1_target() const { return q1_t_; }
  const nd::MlpParams& q2_target() const { return q2_t_; }

  void polyak_step();

 private:
  nd::Var critic_forward(nd::Tape& tape, const nd::MlpParams& q, nd::Var obs_act,
                         bool frozen) const;

  SacConfig cfg_;
  long obs_dim_ = 0, act_dim_ = 0;
  nd::MlpParams actor_, q1_, q2_, q1_t_, q2_t_;
  std::unique_ptr<nd::Adam> actor_opt_, critic_opt_;
};

// target <- (1 - tau) * target + tau * online, elementwise.
void polyak_update(const std::vector<nd::Param*>& online,
                   const std::vector<nd::Param*>& target, double tau);

}  // namespace bcpo::rl
