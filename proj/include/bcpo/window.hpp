#pragma once

#include <vector>

#include "bcpo/tensor.hpp"

namespace bcpo::env {

struct WindowEntry {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;

  bool operator==(const WindowEntry&) const = default;
};

// Rolling ring of the most recent k (state, action, reward) tuples.
//
// Flattened layout (fixed): k slots, oldest first, each slot
//   [state..., action..., reward, mask]
// with mask 1 for filled slots and an all-zero slot otherwise. Entries occupy
// the newest slots, so short windows (episode start) are zero-padded at the
// oldest end.
class ObservationWindow {
 public:
  ObservationWindow(long k, long state_dim, long action_dim)
      : k_(k), state_dim_(state_dim), action_dim_(action_dim) {
    if (k <= 0 || state_dim <= 0 || action_dim <= 0)
      throw nd::ShapeError("observation window: dims must be positive");
  }

  long capacity() const { return k_; }
  long size() const { return static_cast<long>(entries_.size()); }
  long state_dim() const { return state_dim_; }
  long action_dim() const { return action_dim_; }
  long slot_width() const { return state_dim_ + action_dim_ + 2; }
  long flat_width() const { return k_ * slot_width(); }

  const WindowEntry& entry(long i) const { return entries_[static_cast<std::size_t>(i)]; }

  void push(WindowEntry e);
  void clear() { entries_.clear(); }

  std::vector<double> flatten() const;
  static ObservationWindow unflatten(const std::vector<double>& flat, long k,
                                     long state_dim, long action_dim);

  bool operator==(const ObservationWindow&) const = default;

 private:
  long k_, state_dim_, action_dim_;
  std::vector<WindowEntry> entries_;  // oldest -> newest
};

}  // namespace bcpo::env
