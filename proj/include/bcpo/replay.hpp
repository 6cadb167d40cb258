#pragma once

#include <string>
#include <vector>

namespace bcpo::loop {

// One stored transition. Latent codes are never part of this record; the
// outer phase re-encodes the stored window with the current encoder instead.
struct ReplayRecord {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<double> next_window;  // flattened observation window after the step
  double context = 0.0;
  bool done = false;  // terminal; truncation is not stored as done

  // Field names as serialized; the audit test checks no latent ever appears.
  std::string to_json() const;
};

// FIFO ring buffer. Logical index 0 is the oldest retained record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity);

  long capacity() const { return capacity_; }
  long size() const { return static_cast<long>(ring_.size()); }
  long total_inserted() const { return total_inserted_; }

  void push(ReplayRecord rec);

  const ReplayRecord& at(long logical) const;
  const ReplayRecord& newest(long back = 0) const { return at(size() - 1 - back); }

  // ceil(gamma_rec * size), the freshest records the encoder may train on.
  long recency_slice_size(double gamma_rec) const;
  // Logical index of the first record inside the recency slice.
  long recency_slice_begin(double gamma_rec) const {
    return size() - recency_slice_size(gamma_rec);
  }

 private:
  long capacity_ = 0;
  long next_ = 0;  // physical slot of the next insert once full
  long total_inserted_ = 0;
  std::vector<ReplayRecord> ring_;
};

}  // namespace bcpo::loop
