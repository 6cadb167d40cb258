#pragma once

#include <vector>

#include "bcpo/autodiff.hpp"
#include "bcpo/encoder.hpp"

namespace bcpo::enc {

// Learnable bilinear score f(z, z') = z^T W z'. W starts at identity;
// symmetry is not enforced.
struct BilinearCritic {
  nd::Param* W = nullptr;
  long d = 0;
};

BilinearCritic make_bilinear_critic(nd::ParamStore& store, const std::string& name,
                                    long d_z);

// Contrastive batch of flattened windows with in-batch negatives. Row i of
// positives shares anchor i's context bin. The candidate pool is the positive
// rows followed by the optional extras rows; negative_index[i] lists K-1 pool
// rows whose bin differs from anchor i's.
struct ContrastiveBatch {
  nd::Tensor anchors;    // [B, w]
  nd::Tensor positives;  // [B, w]
  nd::Tensor extras;     // [E, w] or empty; fallback negatives pool
  std::vector<long> anchor_bins;                  // [B]
  std::vector<long> pool_bins;                    // [B + E]
  std::vector<std::vector<long>> negative_index;  // [B][K-1], indices into the pool

  long size() const { return anchors.rank() == 2 ? anchors.rows() : 0; }
  long n_candidates() const {
    return negative_index.empty() ? 1 : 1 + static_cast<long>(negative_index[0].size());
  }

  // Positive shares the anchor's bin and is a distinct window; negatives
  // never share it.
  void validate() const;
};

struct InfoNceResult {
  nd::Var loss;         // cross-entropy of the positive among K candidates
  nd::Var mi_estimate;  // ln K - loss, always <= ln K
  double loss_value = 0.0;
  double mi_value = 0.0;
};

// Scores [B, K] with the positive in column 0; averaged over anchors.
InfoNceResult infonce_from_scores(nd::Tape& tape, nd::Var scores);

// Bilinear scores between anchor codes and candidate codes (column j of the
// score matrix comes from candidates[j]; candidates[0] are the positives).
InfoNceResult infonce_codes(nd::Tape& tape, const BilinearCritic& critic,
                            nd::Var anchor_codes, const std::vector<nd::Var>& candidates);

// Full path: encode windows with reparameterization noise, score against the
// in-batch candidate pool, reduce over anchors. The anchors' encoding is
// exposed for the KL rate term.
InfoNceResult infonce(nd::Tape& tape, const GaussianEncoder& encoder,
                      const BilinearCritic& critic, const ContrastiveBatch& batch,
                      std::mt19937_64& noise_rng, EncodeResult* anchor_out = nullptr);

// Barber-Agakov lower bound on I(C;Z) for uniform curriculum bins:
// E[log q(c|z)] + ln N, with the decoder given as logits over bins.
nd::Var ba_bound(nd::Tape& tape, nd::Var decoder_logits, const std::vector<long>& true_bin);

}  // namespace bcpo::enc
