#pragma once

#include <cstddef>
#include <vector>

#include "v2l/lstm/cell.hpp"

namespace v2l::lstm {

template <class Real>
struct BeamHypothesis {
    std::vector<TokenId> ids;  ///< emitted tokens; ends with END iff finished
    double log_prob = 0;
    /// State after consuming the last non-END token: the state the END
    /// prediction was made from, or the state after a forced stop.
    LstmState<Real> state;
    bool finished = false;
};

/// Orders hypotheses by log-prob descending, then token ids lexicographically.
template <class Real>
bool beam_order(const BeamHypothesis<Real>& a, const BeamHypothesis<Real>& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.ids < b.ids;
}

/// Beam search from `start`, whose output distribution predicts the first token.
///
/// Each step expands every live hypothesis over the whole dictionary except
/// START and keeps the `beam_width` best candidates by summed log-prob (no
/// length normalisation). Candidates ending in END are frozen; hypotheses still
/// live after `max_len` tokens are force-terminated. Returns up to `beam_width`
/// hypotheses, best first.
template <class Real>
std::vector<BeamHypothesis<Real>> beam_search_from(const LanguageModelCore<Real>& core, const LstmState<Real>& start,
                                                   std::size_t beam_width, std::size_t max_len);

/// Content tokens of a hypothesis (END stripped).
template <class Real>
std::vector<TokenId> content_tokens(const BeamHypothesis<Real>& hyp);

}  // namespace v2l::lstm
