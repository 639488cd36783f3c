#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2l/corpus/dictionary.hpp"
#include "v2l/numeric/matrix.hpp"
#include "v2l/numeric/optim.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::lstm {

using corpus::TokenId;
using numeric::basic_matrix;
using numeric::NamedTensor;
using numeric::Vec;

/// Gate weights of one LSTM layer:
///   i = sigma(W_xi x + W_hi h + b_i)     f = sigma(W_xf x + W_hf h + b_f)
///   o = sigma(W_xo x + W_ho h + b_o)     g = tanh(W_xc x + W_hc h + b_c)
///   c' = f * c + i * g                   h' = o * tanh(c')
template <class Real>
struct LstmCell {
    basic_matrix<Real> W_xi, W_hi, W_xf, W_hf, W_xo, W_ho, W_xc, W_hc;
    basic_matrix<Real> b_i, b_f, b_o, b_c;

    LstmCell() = default;
    LstmCell(std::size_t input_size, std::size_t hidden_size);
    static LstmCell xavier(std::size_t input_size, std::size_t hidden_size, numeric::Rng& rng);

    std::size_t input_size() const noexcept { return W_xi.cols(); }
    std::size_t hidden_size() const noexcept { return W_xi.rows(); }

    void append_tensors(std::vector<NamedTensor<Real>>& out);
};

template <class Real>
struct LstmState {
    Vec<Real> h;
    Vec<Real> c;

    static LstmState zeros(std::size_t hidden) { return {Vec<Real>(hidden, Real(0)), Vec<Real>(hidden, Real(0))}; }
};

/// Everything the backward pass needs from one forward step.
template <class Real>
struct StepCache {
    Vec<Real> x;  ///< input after the dropout mask
    Vec<Real> mask;  ///< empty when no dropout was applied
    Vec<Real> h_prev, c_prev;
    Vec<Real> i, f, o, g;
    Vec<Real> c, tanh_c, h;

    LstmState<Real> state() const { return {h, c}; }
};

/// One forward step. `dropout_mask`, when non-empty, multiplies x elementwise.
template <class Real>
LstmState<Real> lstm_step(const LstmCell<Real>& cell, std::span<const Real> x, const LstmState<Real>& state,
                          std::span<const Real> dropout_mask = {});

template <class Real>
StepCache<Real> lstm_step_cached(const LstmCell<Real>& cell, std::span<const Real> x, const LstmState<Real>& state,
                                 std::span<const Real> dropout_mask = {});

/// Backward through one step given dL/dh' and dL/dc' (from the following step).
/// Accumulates parameter gradients into `grads`; writes dL/dx (pre-mask), dL/dh, dL/dc.
template <class Real>
void lstm_step_backward(const LstmCell<Real>& cell, const StepCache<Real>& cache, std::span<const Real> dh,
                        std::span<const Real> dc_next, LstmCell<Real>& grads, Vec<Real>& dx, Vec<Real>& dh_prev,
                        Vec<Real>& dc_prev);

/// The parts shared by the caption generator and the VQA model: the LSTM,
/// the word embedding W_es and the softmax output projection.
template <class Real>
struct LanguageModelCore {
    LstmCell<Real> cell;
    basic_matrix<Real> W_es;    ///< embed x |dict|
    basic_matrix<Real> W_out;   ///< |dict| x hidden
    basic_matrix<Real> b_out;   ///< |dict| x 1

    LanguageModelCore() = default;
    LanguageModelCore(std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size);
    static LanguageModelCore xavier(std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size,
                                    numeric::Rng& rng);

    std::size_t dict_size() const noexcept { return W_es.cols(); }
    std::size_t embed_size() const noexcept { return W_es.rows(); }
    std::size_t hidden_size() const noexcept { return cell.hidden_size(); }

    void append_tensors(std::vector<NamedTensor<Real>>& out);

    Vec<Real> embed(TokenId id) const;
    Vec<Real> logits(std::span<const Real> h) const;
};

/// softmax(W_out h + b_out).
template <class Real>
Vec<Real> output_distribution(const LanguageModelCore<Real>& core, const LstmState<Real>& state);

/// An unrolled sequence: one input vector per step, and optionally a target
/// token predicted from the hidden state after that step.
template <class Real>
struct UnrolledSequence {
    std::vector<Vec<Real>> inputs;
    std::vector<std::optional<TokenId>> targets;
    std::vector<Vec<Real>> dropout_masks;  ///< empty, or one mask per step
};

struct SequenceLoss {
    double nll = 0;
    std::size_t target_count = 0;
};

/// Forward from the zero state, summing -log p(target) over steps with a target.
/// With `grads` set, backpropagates through time, accumulating core gradients
/// scaled by `weight`, and writes dL/dx_t for every step into `input_grads`.
template <class Real>
SequenceLoss sequence_nll(const LanguageModelCore<Real>& core, const UnrolledSequence<Real>& seq,
                          LanguageModelCore<Real>* grads = nullptr, std::vector<Vec<Real>>* input_grads = nullptr,
                          double weight = 1.0);

/// Final state after feeding every input from the zero state (no dropout).
template <class Real>
LstmState<Real> run_inputs(const LstmCell<Real>& cell, std::span<const Vec<Real>> inputs);

}  // namespace v2l::lstm
