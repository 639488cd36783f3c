#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "v2l/corpus/dictionary.hpp"
#include "v2l/lstm/beam.hpp"
#include "v2l/lstm/cell.hpp"

namespace v2l::lstm {

/// Attribute-conditioned caption generator: x_{-1} = W_ea V_att, then x_t = W_es S_t.
template <class Real>
struct Captioner {
    LanguageModelCore<Real> core;
    basic_matrix<Real> W_ea;  ///< embed x c

    Captioner() = default;
    Captioner(std::size_t num_attributes, std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size);
    static Captioner xavier(std::size_t num_attributes, std::size_t dict_size, std::size_t embed_size,
                            std::size_t hidden_size, numeric::Rng& rng);

    std::size_t num_attributes() const noexcept { return W_ea.cols(); }

    std::vector<NamedTensor<Real>> tensors();
    Captioner zeros_like() const;
};

struct CaptionExample {
    std::vector<float> v_att;
    corpus::TokenSequence sentence;  ///< wrapped: START ... END
};

struct Dropout {
    double rate = 0;
    numeric::Rng* rng = nullptr;  ///< null disables dropout
};

/// Inputs [W_ea v_att, W_es START, W_es S_1 .. W_es S_L] with targets S_1 .. S_L, END.
template <class Real>
UnrolledSequence<Real> caption_sequence(const Captioner<Real>& model, std::span<const float> v_att,
                                        const corpus::TokenSequence& sentence, Dropout dropout = {});

/// Negative log-likelihood of a wrapped sentence, summed over its L+1 targets.
/// Gradients, when requested, are accumulated into `grads` scaled by `weight`.
template <class Real>
SequenceLoss caption_nll(const Captioner<Real>& model, std::span<const float> v_att,
                         const corpus::TokenSequence& sentence, Captioner<Real>* grads = nullptr, double weight = 1.0,
                         Dropout dropout = {});

struct TrainHistory {
    std::vector<double> epoch_loss;  ///< mean per-sentence nll over the epoch (regulariser excluded)
};

/// Mini-batch SGD on mean caption nll + lambda * ||W||^2.
template <class Real>
TrainHistory train_captioner(Captioner<Real>& model, std::span<const CaptionExample> dataset,
                             const numeric::OptimizerConfig& config, numeric::Rng& rng);

/// exp(total nll / total target count), natural log.
template <class Real>
double perplexity(const Captioner<Real>& model, std::span<const CaptionExample> corpus);

/// State after consuming W_ea v_att and START: its distribution predicts S_1.
template <class Real>
LstmState<Real> caption_start_state(const Captioner<Real>& model, std::span<const float> v_att);

template <class Real>
std::vector<BeamHypothesis<Real>> beam_search(const Captioner<Real>& model, std::span<const float> v_att,
                                              std::size_t beam_width = 5, std::size_t max_len = 20);

struct CaptionRepresentation {
    std::vector<float> v_cap;
    std::vector<std::vector<TokenId>> captions;  ///< the decoded captions that were pooled
    bool padded = false;  ///< fewer than `count` hypotheses came back; the best was duplicated
};

/// Mean of the final hidden states of the `count` best beam captions (beam width = count).
template <class Real>
CaptionRepresentation caption_representation(const Captioner<Real>& model, std::span<const float> v_att,
                                             std::size_t max_len = 20, std::size_t count = 5);

void save_captioner(const std::filesystem::path& stem, Captioner<float>& model);
Captioner<float> load_captioner(const std::filesystem::path& stem);

}  // namespace v2l::lstm
