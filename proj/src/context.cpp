#include "bcpo/context.hpp"

namespace bcpo::env {

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "scaled_cartpole") return EnvKind::ScaledCartPole;
  if (s == "tabular_chain") return EnvKind::TabularChain;
  if (s == "two_context_bandit") return EnvKind::TwoContextBandit;
  throw std::invalid_argument("unknown environment kind: " + s);
}

std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::ScaledCartPole: return "scaled_cartpole";
    case EnvKind::TabularChain: return "tabular_chain";
    case EnvKind::TwoContextBandit: return "two_context_bandit";
  }
  return "?";
}

}  // namespace bcpo::env
