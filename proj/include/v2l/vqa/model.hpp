#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "v2l/corpus/dictionary.hpp"
#include "v2l/lstm/beam.hpp"
#include "v2l/lstm/captioner.hpp"
#include "v2l/lstm/cell.hpp"

namespace v2l::vqa {

using corpus::TokenId;
using corpus::TokenSequence;
using lstm::Dropout;
using lstm::SequenceLoss;
using lstm::TrainHistory;
using numeric::basic_matrix;
using numeric::NamedTensor;
using numeric::Vec;

/// One LSTM shared by the question encoder and the answer decoder, fed
/// x_init = W_ea v_att + W_ec v_cap + W_ek v_know at the first step.
template <class Real>
struct VqaModel {
    lstm::LanguageModelCore<Real> core;
    basic_matrix<Real> W_ea;  ///< embed x c
    basic_matrix<Real> W_ec;  ///< embed x caption dim
    basic_matrix<Real> W_ek;  ///< embed x knowledge dim

    VqaModel() = default;
    VqaModel(std::size_t num_attributes, std::size_t caption_dim, std::size_t knowledge_dim, std::size_t dict_size,
             std::size_t embed_size, std::size_t hidden_size);
    static VqaModel xavier(std::size_t num_attributes, std::size_t caption_dim, std::size_t knowledge_dim,
                           std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size, numeric::Rng& rng);

    std::size_t num_attributes() const noexcept { return W_ea.cols(); }
    std::size_t caption_dim() const noexcept { return W_ec.cols(); }
    std::size_t knowledge_dim() const noexcept { return W_ek.cols(); }

    std::vector<NamedTensor<Real>> tensors();
    VqaModel zeros_like() const;
};

struct ImageContext {
    std::vector<float> v_att;
    std::vector<float> v_cap;
    std::vector<float> v_know;
};

struct VqaInstance {
    std::string image_id;
    ImageContext context;
    TokenSequence question;  ///< q_1 .. q_n, no sentinels
    TokenSequence answer;    ///< a_1 .. a_l, optionally followed by END (anything after END is ignored)
};

template <class Real>
Vec<Real> initial_input(const VqaModel<Real>& model, const ImageContext& context);

/// Answer tokens up to (excluding) the first END.
std::vector<TokenId> answer_body(const TokenSequence& answer);

/// Inputs [x_init, W_es q_1..q_n, W_es a_1..a_l]; targets a_1..a_l, END on the
/// steps after q_n, a_1, .., a_l. Question steps carry no target.
template <class Real>
lstm::UnrolledSequence<Real> answer_sequence(const VqaModel<Real>& model, const VqaInstance& instance,
                                             Dropout dropout = {});

template <class Real>
SequenceLoss answer_nll(const VqaModel<Real>& model, const VqaInstance& instance, VqaModel<Real>* grads = nullptr,
                        double weight = 1.0, Dropout dropout = {});

template <class Real>
TrainHistory train_vqa(VqaModel<Real>& model, std::span<const VqaInstance> dataset,
                       const numeric::OptimizerConfig& config, numeric::Rng& rng);

struct DecodeOptions {
    std::size_t max_len = 10;     ///< answer tokens including END
    std::size_t beam_width = 1;   ///< 1 is greedy
    bool zero_knowledge = false;  ///< ablation: replace v_know with zeros
};

struct GeneratedAnswer {
    std::vector<TokenId> tokens;  ///< no sentinels
    double log_prob = 0;
};

/// State after x_init and the question; its distribution predicts a_1.
template <class Real>
lstm::LstmState<Real> encode_question(const VqaModel<Real>& model, const ImageContext& context,
                                      std::span<const TokenId> question);

template <class Real>
GeneratedAnswer generate_answer(const VqaModel<Real>& model, const ImageContext& context,
                                std::span<const TokenId> question, const DecodeOptions& options = {});

void save_vqa(const std::filesystem::path& stem, VqaModel<float>& model);
VqaModel<float> load_vqa(const std::filesystem::path& stem);

}  // namespace v2l::vqa
