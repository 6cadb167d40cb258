#pragma once

#include <map>
#include <string>

namespace bcpo::info {

// Binary entropy in nats; h2(0) = h2(1) = 0.
double binary_entropy(double d);

// h2(delta) + delta * ln(N-1); upper bound on the processing gap given Bayes
// error at most delta over N contexts.
double fano_processing_bound(double delta, long n_contexts);

// max(0, (1-delta) * ln N - ln 2); lower bound on I(C;O) under the same
// hypothesis. Used by the training monitor.
double fano_window_floor(double delta, long n_contexts);

// (eps/2) * ln(N-1) + h2(eps/2); bound on |I_q(C;X) - I_b(C;X)| when the
// importance ratio q/b is clipped to [1-eps, 1+eps]. Requires 0<eps<1, N>2.
double replay_gap_bound(double eps, long n_contexts);

struct BoundReport {
  enum class Kind { FanoLower, ProcessingUpper, ReplayUpper };
  Kind kind;
  double value = 0.0;  // nats, always >= 0
  std::map<std::string, double> inputs;

  std::string kind_name() const;
  std::string to_json() const;
};

BoundReport make_fano_lower(double delta, long n_contexts);
BoundReport make_processing_upper(double delta, long n_contexts);
BoundReport make_replay_upper(double eps, long n_contexts);

}  // namespace bcpo::info
