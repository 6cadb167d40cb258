#include "bcpo/replay.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bcpo::loop {

std::string ReplayRecord::to_json() const {
  std::ostringstream os;
  os.precision(17);
  auto arr = [&](const std::vector<double>& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",";
      os << v[i];
    }
    os << "]";
  };
  os << "{\"state\":";
  arr(state);
  os << ",\"action\":";
  arr(action);
  os << ",\"reward\":" << reward << ",\"next_state\":";
  arr(next_state);
  os << ",\"next_window\":";
  arr(next_window);
  os << ",\"context\":" << context << ",\"done\":" << (done ? "true" : "false") << "}";
  return os.str();
}

ReplayBuffer::ReplayBuffer(long capacity) : capacity_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("replay buffer: capacity must be > 0");
}

void ReplayBuffer::push(ReplayRecord rec) {
  ++total_inserted_;
  if (size() < capacity_) {
    ring_.push_back(std::move(rec));
    return;
  }
  ring_[static_cast<std::size_t>(next_)] = std::move(rec);
  next_ = (next_ + 1) % capacity_;
}

const ReplayRecord& ReplayBuffer::at(long logical) const {
  if (logical < 0 || logical >= size())
    throw std::out_of_range("replay buffer: index out of range");
  const long physical = size() < capacity_ ? logical : (next_ + logical) % capacity_;
  return ring_[static_cast<std::size_t>(physical)];
}

long ReplayBuffer::recency_slice_size(double gamma_rec) const {
  if (!(gamma_rec > 0.0 && gamma_rec <= 1.0))
    throw std::invalid_argument("recency ratio must be in (0,1]");
  return static_cast<long>(std::ceil(gamma_rec * static_cast<double>(size())));
}

}  // namespace bcpo::loop
