#include "bcpo/window.hpp"

namespace bcpo::env {

void ObservationWindow::push(WindowEntry e) {
  if (static_cast<long>(e.state.size()) != state_dim_ ||
      static_cast<long>(e.action.size()) != action_dim_)
    throw nd::ShapeError("observation window: entry dims mismatch");
  entries_.push_back(std::move(e));
  if (size() > k_) entries_.erase(entries_.begin());
}

std::vector<double> ObservationWindow::flatten() const {
  std::vector<double> out(static_cast<std::size_t>(flat_width()), 0.0);
  const long pad = k_ - size();
  for (long i = 0; i < size(); ++i) {
    const WindowEntry& e = entries_[static_cast<std::size_t>(i)];
    double* slot = out.data() + (pad + i) * slot_width();
    for (long j = 0; j < state_dim_; ++j) slot[j] = e.state[static_cast<std::size_t>(j)];
    for (long j = 0; j < action_dim_; ++j)
      slot[state_dim_ + j] = e.action[static_cast<std::size_t>(j)];
    slot[state_dim_ + action_dim_] = e.reward;
    slot[state_dim_ + action_dim_ + 1] = 1.0;  // validity mask
  }
  return out;
}

ObservationWindow ObservationWindow::unflatten(const std::vector<double>& flat, long k,
                                               long state_dim, long action_dim) {
  ObservationWindow w(k, state_dim, action_dim);
  const long slot_width = state_dim + action_dim + 2;
  if (static_cast<long>(flat.size()) != k * slot_width)
    throw nd::ShapeError("unflatten: length mismatch");
  for (long i = 0; i < k; ++i) {
    const double* slot = flat.data() + i * slot_width;
    if (slot[state_dim + action_dim + 1] == 0.0) continue;  // padding slot
    WindowEntry e;
    e.state.assign(slot, slot + state_dim);
    e.action.assign(slot + state_dim, slot + state_dim + action_dim);
    e.reward = slot[state_dim + action_dim];
    w.push(std::move(e));
  }
  return w;
}

}  // namespace bcpo::env
