#include "bcpo/infonce.hpp"

#include <cmath>

#include "bcpo/rng.hpp"

namespace bcpo::enc {

BilinearCritic make_bilinear_critic(nd::ParamStore& store, const std::string& name,
                                    long d_z) {
  nd::Tensor w({d_z, d_z}, 0.0);
  for (long i = 0; i < d_z; ++i) w.at(i, i) = 1.0;
  return {&store.create(name, std::move(w)), d_z};
}

InfoNceResult infonce_from_scores(nd::Tape& tape, nd::Var scores) {
  const nd::Tensor& s = tape.value(scores);
  if (s.rank() != 2 || s.rows() == 0 || s.cols() < 2)
    throw nd::ShapeError("infonce: need a non-empty [B, K>=2] score matrix");
  const long B = s.rows(), K = s.cols();
  const nd::Var lse = tape.logsumexp_cols(scores);
  const nd::Var pos = tape.pick(scores, std::vector<long>(static_cast<std::size_t>(B), 0));
  const nd::Var loss = tape.mean_all(tape.sub(lse, pos));
  const double ln_k = std::log(static_cast<double>(K));
  const nd::Var mi = tape.affine(loss, -1.0, ln_k);
  InfoNceResult r{loss, mi, tape.value(loss)[0], tape.value(mi)[0]};
  return r;
}

InfoNceResult infonce_codes(nd::Tape& tape, const BilinearCritic& critic,
                            nd::Var anchor_codes, const std::vector<nd::Var>& candidates) {
  if (candidates.empty()) throw nd::ShapeError("infonce: empty candidate set");
  const nd::Var aw = tape.matmul(anchor_codes, tape.param(*critic.W));
  nd::Var scores;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const long B = tape.value(anchor_codes).rows();
    nd::Var col = tape.reshape(tape.sum_cols(tape.mul(aw, candidates[j])), {B, 1});
    scores = j == 0 ? col : tape.concat_cols(scores, col);
  }
  return infonce_from_scores(tape, scores);
}

void ContrastiveBatch::validate() const {
  const long B = size();
  if (B == 0) throw nd::ShapeError("infonce: empty batch");
  if (positives.rows() != B || static_cast<long>(anchor_bins.size()) != B ||
      static_cast<long>(negative_index.size()) != B)
    throw nd::ShapeError("infonce: inconsistent batch");
  const long pool = B + (extras.rank() == 2 ? extras.rows() : 0);
  if (static_cast<long>(pool_bins.size()) != pool)
    throw nd::ShapeError("infonce: pool bin labels missing");
  for (long i = 0; i < B; ++i) {
    if (pool_bins[static_cast<std::size_t>(i)] != anchor_bins[static_cast<std::size_t>(i)])
      throw nd::ShapeError("infonce: positive must share the anchor's bin");
    if (negative_index[static_cast<std::size_t>(i)].empty())
      throw nd::ShapeError("infonce: anchor without negatives");
    for (long j : negative_index[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= pool) throw nd::ShapeError("infonce: negative index out of range");
      if (pool_bins[static_cast<std::size_t>(j)] == anchor_bins[static_cast<std::size_t>(i)])
        throw nd::ShapeError("infonce: negative shares the anchor's bin");
    }
  }
}

InfoNceResult infonce(nd::Tape& tape, const GaussianEncoder& encoder,
                      const BilinearCritic& critic, const ContrastiveBatch& batch,
                      std::mt19937_64& noise_rng, EncodeResult* anchor_out) {
  batch.validate();
  const long B = batch.size();
  const long K = batch.n_candidates();
  auto encode_rows = [&](const nd::Tensor& rows) {
    nd::Tensor noise({rows.rows(), encoder.d_z});
    for (long i = 0; i < noise.numel(); ++i) noise[i] = normal(noise_rng);
    return encode(tape, encoder, tape.constant(rows), tape.constant(std::move(noise)));
  };
  const EncodeResult anchor = encode_rows(batch.anchors);
  if (anchor_out) *anchor_out = anchor;
  nd::Var pool_z = encode_rows(batch.positives).z;
  if (batch.extras.rank() == 2 && batch.extras.rows() > 0)
    pool_z = tape.concat_rows(pool_z, encode_rows(batch.extras).z);

  // scores[i, 0] = f(a_i, p_i); scores[i, k] = f(a_i, pool[negative_index[i][k-1]]).
  const nd::Var aw = tape.matmul(anchor.z, tape.param(*critic.W));
  std::vector<long> rep_idx, cand_idx;
  rep_idx.reserve(static_cast<std::size_t>(B * K));
  cand_idx.reserve(static_cast<std::size_t>(B * K));
  for (long i = 0; i < B; ++i) {
    rep_idx.push_back(i);
    cand_idx.push_back(i);  // positive
    for (long j : batch.negative_index[static_cast<std::size_t>(i)]) {
      rep_idx.push_back(i);
      cand_idx.push_back(j);
    }
  }
  const nd::Var lhs = tape.gather_rows(aw, rep_idx);
  const nd::Var rhs = tape.gather_rows(pool_z, cand_idx);
  const nd::Var scores =
      tape.reshape(tape.sum_cols(tape.mul(lhs, rhs)), {B, K});
  return infonce_from_scores(tape, scores);
}

nd::Var ba_bound(nd::Tape& tape, nd::Var decoder_logits, const std::vector<long>& true_bin) {
  const nd::Tensor& l = tape.value(decoder_logits);
  require_finite(l, "ba_bound logits");
  if (l.rank() != 2 || l.rows() != static_cast<long>(true_bin.size()))
    throw nd::ShapeError("ba_bound: one label per logit row required");
  const long N = l.cols();
  // E[log softmax(logits)[label]] + H(C), H(C) = ln N for uniform bins.
  const nd::Var log_q =
      tape.sub(tape.pick(decoder_logits, true_bin), tape.logsumexp_cols(decoder_logits));
  return tape.affine(tape.mean_all(log_q), 1.0, std::log(static_cast<double>(N)));
}

}  // namespace bcpo::enc
