#pragma once

#include <random>

#include "bcpo/cmdp.hpp"

namespace bcpo::oracle {

// The hierarchy-lemma bandit as a one-step CMDP: the observation drawn
// through the p-channel is the initial state; discount 0 makes it one-step.
TabularCMDP bandit_cmdp(double p);

// The proof encoder Z = Pr[C = c1 | O] on the (s, a) window alphabet: merges
// window symbols by their state component.
DiscreteEncoder bandit_posterior_encoder();

// Lossless-window family: the context is revealed by the initial state
// (mu_c = delta_{s=c mod S}), the transition kernel is shared across
// contexts, and rewards alternate which action pays +/-d(s) between adjacent
// contexts. Windows of length 1 identify the context exactly.
TabularCMDP revealed_context_cmdp(std::mt19937_64& rng, long n_contexts,
                                  long n_states, long n_actions,
                                  double discount = 0.9);

// Encoder folding adjacent (sign-mirrored) start states together on the
// (s, a) window alphabet of a revealed-context instance.
DiscreteEncoder merge_adjacent_contexts_encoder(long n_states, long n_actions);

}  // namespace bcpo::oracle
