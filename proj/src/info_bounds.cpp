#include "bcpo/info_bounds.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bcpo::info {

double binary_entropy(double d) {
  if (!(d >= 0.0 && d <= 1.0))
    throw std::invalid_argument("binary_entropy: argument must be in [0,1]");
  double h = 0.0;
  if (d > 0.0) h -= d * std::log(d);
  if (d < 1.0) h -= (1.0 - d) * std::log(1.0 - d);
  return h;
}

double fano_processing_bound(double delta, long n_contexts) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("fano_processing_bound: delta must be in [0,1]");
  if (n_contexts < 2)
    throw std::invalid_argument("fano_processing_bound: need at least 2 contexts");
  return binary_entropy(delta) + delta * std::log(static_cast<double>(n_contexts - 1));
}

double fano_window_floor(double delta, long n_contexts) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("fano_window_floor: delta must be in [0,1]");
  if (n_contexts < 2)
    throw std::invalid_argument("fano_window_floor: need at least 2 contexts");
  const double v =
      (1.0 - delta) * std::log(static_cast<double>(n_contexts)) - std::log(2.0);
  return v > 0.0 ? v : 0.0;
}

double replay_gap_bound(double eps, long n_contexts) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("replay_gap_bound: eps must be in (0,1)");
  if (n_contexts <= 2)
    throw std::invalid_argument("replay_gap_bound: need more than 2 contexts");
  return 0.5 * eps * std::log(static_cast<double>(n_contexts - 1)) +
         binary_entropy(0.5 * eps);
}

std::string BoundReport::kind_name() const {
  switch (kind) {
    case Kind::FanoLower: return "FanoLower";
    case Kind::ProcessingUpper: return "ProcessingUpper";
    case Kind::ReplayUpper: return "ReplayUpper";
  }
  return "?";
}

std::string BoundReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"name\":\"" << kind_name() << "\",\"value_nats\":" << value
     << ",\"inputs\":{";
  bool first = true;
  for (const auto& [k, v] : inputs) {
    if (!first) os << ",";
    first = false;
    os << "\"" << k << "\":" << v;
  }
  os << "}}";
  return os.str();
}

BoundReport make_fano_lower(double delta, long n_contexts) {
  return {BoundReport::Kind::FanoLower, fano_window_floor(delta, n_contexts),
          {{"delta", delta}, {"n_contexts", static_cast<double>(n_contexts)}}};
}

BoundReport make_processing_upper(double delta, long n_contexts) {
  return {BoundReport::Kind::ProcessingUpper, fano_processing_bound(delta, n_contexts),
          {{"delta", delta}, {"n_contexts", static_cast<double>(n_contexts)}}};
}

BoundReport make_replay_upper(double eps, long n_contexts) {
  return {BoundReport::Kind::ReplayUpper, replay_gap_bound(eps, n_contexts),
          {{"eps", eps}, {"n_contexts", static_cast<double>(n_contexts)}}};
}

}  // namespace bcpo::info
