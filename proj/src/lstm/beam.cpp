#include "v2l/lstm/beam.hpp"

#include <algorithm>

#include "v2l/error.hpp"
#include "v2l/numeric/nonlinear.hpp"

namespace v2l::lstm {

using corpus::WordDictionary;

namespace {

struct Candidate {
    std::size_t parent;
    TokenId token;
    double log_prob;
};

}  // namespace

template <class Real>
std::vector<BeamHypothesis<Real>> beam_search_from(const LanguageModelCore<Real>& core, const LstmState<Real>& start,
                                                   std::size_t beam_width, std::size_t max_len) {
    V2L_REQUIRE(beam_width >= 1, PreconditionError, "beam width must be >= 1");
    V2L_REQUIRE(max_len >= 1, PreconditionError, "max_len must be >= 1");

    std::vector<BeamHypothesis<Real>> live{{{}, 0.0, start, false}};
    std::vector<BeamHypothesis<Real>> done;

    for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
        std::vector<Candidate> candidates;
        candidates.reserve(live.size() * core.dict_size());
        for (std::size_t p = 0; p < live.size(); ++p) {
            const auto logp = numeric::log_softmax<Real>(core.logits(live[p].state.h));
            for (TokenId tok = 0; tok < core.dict_size(); ++tok) {
                if (tok == WordDictionary::kStart) continue;
                candidates.push_back({p, tok, live[p].log_prob + static_cast<double>(logp[tok])});
            }
        }
        const auto better = [&](const Candidate& a, const Candidate& b) {
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            const auto& ia = live[a.parent].ids;
            const auto& ib = live[b.parent].ids;
            if (a.parent != b.parent && ia != ib) {
                // ids of different parents have equal length; compare prefixes, then the new token
                return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
            }
            return a.token < b.token;
        };
        const std::size_t keep = std::min(beam_width, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          better);

        std::vector<BeamHypothesis<Real>> next;
        for (std::size_t k = 0; k < keep; ++k) {
            const auto& cand = candidates[k];
            const auto& parent = live[cand.parent];
            BeamHypothesis<Real> hyp;
            hyp.ids = parent.ids;
            hyp.ids.push_back(cand.token);
            hyp.log_prob = cand.log_prob;
            if (cand.token == WordDictionary::kEnd) {
                hyp.state = parent.state;
                hyp.finished = true;
                done.push_back(std::move(hyp));
            } else {
                hyp.state = lstm_step(core.cell, std::span<const Real>(core.embed(cand.token)), parent.state);
                next.push_back(std::move(hyp));
            }
        }
        live = std::move(next);
    }
    for (auto& hyp : live) done.push_back(std::move(hyp));  // forced stop at max_len

    std::sort(done.begin(), done.end(), beam_order<Real>);
    if (done.size() > beam_width) done.resize(beam_width);
    return done;
}

template <class Real>
std::vector<TokenId> content_tokens(const BeamHypothesis<Real>& hyp) {
    std::vector<TokenId> out = hyp.ids;
    if (!out.empty() && out.back() == WordDictionary::kEnd) out.pop_back();
    return out;
}

template std::vector<BeamHypothesis<float>> beam_search_from(const LanguageModelCore<float>&,
                                                             const LstmState<float>&, std::size_t, std::size_t);
template std::vector<BeamHypothesis<double>> beam_search_from(const LanguageModelCore<double>&,
                                                              const LstmState<double>&, std::size_t, std::size_t);
template std::vector<TokenId> content_tokens(const BeamHypothesis<float>&);
template std::vector<TokenId> content_tokens(const BeamHypothesis<double>&);

}  // namespace v2l::lstm
