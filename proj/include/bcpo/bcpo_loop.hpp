#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "bcpo/cartpole.hpp"
#include "bcpo/context.hpp"
#include "bcpo/curriculum.hpp"
#include "bcpo/encoder.hpp"
#include "bcpo/infonce.hpp"
#include "bcpo/replay.hpp"
#include "bcpo/sac_agent.hpp"
#include "bcpo/schedules.hpp"
#include "bcpo/window.hpp"

namespace bcpo::loop {

// Which signal the policy conditions on besides the raw state. "bcpo" is the
// full pipeline; "blind" and "oracle" are the internal comparison arms.
enum class Arm { Bcpo, Blind, Oracle };
Arm arm_from_string(const std::string& s);
std::string to_string(Arm a);

struct TrainConfig {
  env::ContextSpec ctx;
  env::CartPoleParams physics;

  // encoder block
  long d_z = 2;
  std::vector<long> enc_hidden{256, 256, 64};
  nd::Activation enc_activation = nd::Activation::GeLU;
  bool enc_layer_norm = true;
  enc::BetaSchedule beta;
  long n_negatives = 7;
  double enc_lr = 3e-4;
  long enc_batch = 128;

  rl::SacConfig sac;

  // bcpo block
  long warmup_episodes = 10;
  long warmup_min_steps = 3000;  // keep collecting until this many env steps
  long epochs = 50;
  long n_enc = 64;
  long n_rl = 16;
  double gamma_rec = 0.25;
  long window_k = 10;
  long max_env_steps = 0;  // 0: epochs bound the run and the beta schedule
  long eval_period_steps = 5000;
  long eval_rollouts = 50;
  long buffer_capacity = 500000;

  Arm arm = Arm::Bcpo;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: no files written

  void validate() const;
  long obs_dim() const;  // policy input width for the configured arm
};

struct EpisodeStats {
  long steps = 0;
  double episode_return = 0.0;
  long bin = 0;
  double context = 1.0;
};

struct PhaseStats {
  bool skipped = false;
  long steps = 0;
  double mi_estimate = 0.0;
  double kl_rate = 0.0;
  double vib_loss = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  long rollouts = 0;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  // Warm-up, then `epochs` rounds of {collect, inner, outer, anneal};
  // stops early once max_env_steps is reached (when set).
  void run();

  void warmup();
  EpisodeStats collect_episode();
  PhaseStats inner_encoder_phase();
  PhaseStats outer_rl_phase();

  EvalResult evaluate_range(double lo, double hi, long rollouts, std::uint64_t tag);
  double rollout_return(double kappa, std::uint64_t rollout_seed, bool deterministic);

  void save_checkpoint(const std::string& stem) const;
  void load_checkpoint(const std::string& stem);

  const TrainConfig& config() const { return cfg_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ContextSampler& sampler() { return sampler_; }
  long total_env_steps() const { return env_steps_; }
  long epochs_done() const { return epoch_; }
  double beta_now() const;
  bool warmup_done() const { return warmup_done_; }
  // InfoNCE MI estimate at the first and last warm-up pre-training step.
  double warmup_mi_first() const { return warmup_mi_first_; }
  double warmup_mi_last() const { return warmup_mi_last_; }
  const std::vector<std::string>& phase_log() const { return phase_log_; }
  const enc::GaussianEncoder* encoder() const { return encoder_ ? &*encoder_ : nullptr; }
  rl::SacAgent& agent() { return *agent_; }

  // Record sampling hook used by the slice-contract test: logical indices of
  // the last inner-phase batch.
  const std::vector<long>& last_inner_indices() const { return last_inner_indices_; }

  enc::EncodeValue encode_window(const std::vector<double>& flat_window, bool sample);

 private:
  void collect_step_records(EpisodeStats& stats, bool random_policy);
  rl::SacBatch assemble_sac_batch(long batch_size);
  bool assemble_contrastive_batch(enc::ContrastiveBatch& out, double gamma_rec);
  bool encoder_minibatch_step(double beta, double gamma_rec, double* mi, double* kl,
                              double* loss);
  std::vector<double> augmented_obs(const std::vector<double>& s,
                                    const std::vector<double>& z, double context) const;
  void write_metric(const std::string& line);
  void log_epoch_record(const EpisodeStats& ep, const PhaseStats& inner,
                        const PhaseStats& outer);
  void maybe_evaluate();
  void dump_embeddings(long step);

  TrainConfig cfg_;
  env::CartPole env_;
  ContextSampler sampler_;
  ReplayBuffer buffer_;

  nd::ParamStore store_;
  std::optional<enc::GaussianEncoder> encoder_;
  std::optional<enc::BilinearCritic> nce_critic_;
  std::unique_ptr<nd::Adam> enc_opt_;
  std::unique_ptr<rl::SacAgent> agent_;

  std::mt19937_64 env_rng_, policy_rng_, enc_noise_rng_, sampler_rng_, init_rng_,
      batch_rng_;

  long env_steps_ = 0;
  long epoch_ = 0;
  long next_eval_at_ = 0;
  long eval_count_ = 0;
  bool warmup_done_ = false;
  double warmup_mi_first_ = 0.0;
  double warmup_mi_last_ = 0.0;
  double last_test_return_ = 0.0;
  double last_train_return_ = 0.0;
  bool have_eval_ = false;

  std::vector<std::string> phase_log_;
  std::vector<long> last_inner_indices_;
  std::unique_ptr<std::ofstream> metrics_;
  std::unique_ptr<std::ofstream> embeddings_;
};

}  // namespace bcpo::loop
