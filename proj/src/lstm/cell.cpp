#include "v2l/lstm/cell.hpp"

#include <cmath>

#include "v2l/error.hpp"
#include "v2l/numeric/nonlinear.hpp"

namespace v2l::lstm {

using numeric::gemv_add;
using numeric::gemv_t_add;
using numeric::outer_add;

template <class Real>
LstmCell<Real>::LstmCell(std::size_t input_size, std::size_t hidden_size)
    : W_xi(hidden_size, input_size), W_hi(hidden_size, hidden_size),
      W_xf(hidden_size, input_size), W_hf(hidden_size, hidden_size),
      W_xo(hidden_size, input_size), W_ho(hidden_size, hidden_size),
      W_xc(hidden_size, input_size), W_hc(hidden_size, hidden_size),
      b_i(hidden_size, 1), b_f(hidden_size, 1), b_o(hidden_size, 1), b_c(hidden_size, 1) {}

template <class Real>
LstmCell<Real> LstmCell<Real>::xavier(std::size_t input_size, std::size_t hidden_size, numeric::Rng& rng) {
    LstmCell cell(input_size, hidden_size);
    for (auto* w : {&cell.W_xi, &cell.W_hi, &cell.W_xf, &cell.W_hf, &cell.W_xo, &cell.W_ho, &cell.W_xc, &cell.W_hc})
        *w = numeric::xavier_init<Real>(w->rows(), w->cols(), rng);
    return cell;
}

template <class Real>
void LstmCell<Real>::append_tensors(std::vector<NamedTensor<Real>>& out) {
    out.push_back({"lstm.W_xi", &W_xi, true});
    out.push_back({"lstm.W_hi", &W_hi, true});
    out.push_back({"lstm.W_xf", &W_xf, true});
    out.push_back({"lstm.W_hf", &W_hf, true});
    out.push_back({"lstm.W_xo", &W_xo, true});
    out.push_back({"lstm.W_ho", &W_ho, true});
    out.push_back({"lstm.W_xc", &W_xc, true});
    out.push_back({"lstm.W_hc", &W_hc, true});
    out.push_back({"lstm.b_i", &b_i, false});
    out.push_back({"lstm.b_f", &b_f, false});
    out.push_back({"lstm.b_o", &b_o, false});
    out.push_back({"lstm.b_c", &b_c, false});
}

namespace {

template <class Real>
Vec<Real> preactivation(const basic_matrix<Real>& wx, const basic_matrix<Real>& wh, const basic_matrix<Real>& b,
                        std::span<const Real> x, std::span<const Real> h) {
    Vec<Real> a(b.flat().begin(), b.flat().end());
    gemv_add<Real>(wx, x, a);
    gemv_add<Real>(wh, h, a);
    return a;
}

}  // namespace

template <class Real>
StepCache<Real> lstm_step_cached(const LstmCell<Real>& cell, std::span<const Real> x, const LstmState<Real>& state,
                                 std::span<const Real> dropout_mask) {
    const std::size_t H = cell.hidden_size();
    if (x.size() != cell.input_size())
        throw ShapeError("lstm input has length " + std::to_string(x.size()) + ", cell expects " +
                         std::to_string(cell.input_size()));
    if (state.h.size() != H || state.c.size() != H)
        throw ShapeError("lstm state length does not match hidden size " + std::to_string(H));
    if (!dropout_mask.empty() && dropout_mask.size() != x.size())
        throw ShapeError("dropout mask length does not match lstm input");

    StepCache<Real> s;
    s.x.assign(x.begin(), x.end());
    if (!dropout_mask.empty()) {
        s.mask.assign(dropout_mask.begin(), dropout_mask.end());
        for (std::size_t k = 0; k < s.x.size(); ++k) s.x[k] *= s.mask[k];
    }
    s.h_prev = state.h;
    s.c_prev = state.c;
    s.i = preactivation(cell.W_xi, cell.W_hi, cell.b_i, std::span<const Real>(s.x), std::span<const Real>(s.h_prev));
    s.f = preactivation(cell.W_xf, cell.W_hf, cell.b_f, std::span<const Real>(s.x), std::span<const Real>(s.h_prev));
    s.o = preactivation(cell.W_xo, cell.W_ho, cell.b_o, std::span<const Real>(s.x), std::span<const Real>(s.h_prev));
    s.g = preactivation(cell.W_xc, cell.W_hc, cell.b_c, std::span<const Real>(s.x), std::span<const Real>(s.h_prev));
    numeric::sigmoid_inplace<Real>(s.i);
    numeric::sigmoid_inplace<Real>(s.f);
    numeric::sigmoid_inplace<Real>(s.o);
    numeric::tanh_inplace<Real>(s.g);
    s.c.resize(H);
    s.tanh_c.resize(H);
    s.h.resize(H);
    for (std::size_t k = 0; k < H; ++k) {
        s.c[k] = s.f[k] * s.c_prev[k] + s.i[k] * s.g[k];
        s.tanh_c[k] = std::tanh(s.c[k]);
        s.h[k] = s.o[k] * s.tanh_c[k];
    }
    return s;
}

template <class Real>
LstmState<Real> lstm_step(const LstmCell<Real>& cell, std::span<const Real> x, const LstmState<Real>& state,
                          std::span<const Real> dropout_mask) {
    auto s = lstm_step_cached(cell, x, state, dropout_mask);
    return {std::move(s.h), std::move(s.c)};
}

template <class Real>
void lstm_step_backward(const LstmCell<Real>& cell, const StepCache<Real>& s, std::span<const Real> dh,
                        std::span<const Real> dc_next, LstmCell<Real>& grads, Vec<Real>& dx, Vec<Real>& dh_prev,
                        Vec<Real>& dc_prev) {
    const std::size_t H = cell.hidden_size();
    Vec<Real> da_i(H), da_f(H), da_o(H), da_g(H);
    dc_prev.assign(H, Real(0));
    for (std::size_t k = 0; k < H; ++k) {
        const Real dc = dc_next[k] + dh[k] * s.o[k] * (Real(1) - s.tanh_c[k] * s.tanh_c[k]);
        const Real d_o = dh[k] * s.tanh_c[k];
        const Real d_i = dc * s.g[k];
        const Real d_g = dc * s.i[k];
        const Real d_f = dc * s.c_prev[k];
        dc_prev[k] = dc * s.f[k];
        da_i[k] = d_i * s.i[k] * (Real(1) - s.i[k]);
        da_f[k] = d_f * s.f[k] * (Real(1) - s.f[k]);
        da_o[k] = d_o * s.o[k] * (Real(1) - s.o[k]);
        da_g[k] = d_g * (Real(1) - s.g[k] * s.g[k]);
    }
    const std::span<const Real> x(s.x), h_prev(s.h_prev);
    const auto accumulate = [&](basic_matrix<Real>& gx, basic_matrix<Real>& gh, basic_matrix<Real>& gb,
                                const Vec<Real>& da) {
        outer_add<Real>(gx, da, x);
        outer_add<Real>(gh, da, h_prev);
        for (std::size_t k = 0; k < H; ++k) gb(k, 0) += da[k];
    };
    accumulate(grads.W_xi, grads.W_hi, grads.b_i, da_i);
    accumulate(grads.W_xf, grads.W_hf, grads.b_f, da_f);
    accumulate(grads.W_xo, grads.W_ho, grads.b_o, da_o);
    accumulate(grads.W_xc, grads.W_hc, grads.b_c, da_g);

    dx.assign(cell.input_size(), Real(0));
    dh_prev.assign(H, Real(0));
    gemv_t_add<Real>(cell.W_xi, da_i, dx);
    gemv_t_add<Real>(cell.W_xf, da_f, dx);
    gemv_t_add<Real>(cell.W_xo, da_o, dx);
    gemv_t_add<Real>(cell.W_xc, da_g, dx);
    gemv_t_add<Real>(cell.W_hi, da_i, dh_prev);
    gemv_t_add<Real>(cell.W_hf, da_f, dh_prev);
    gemv_t_add<Real>(cell.W_ho, da_o, dh_prev);
    gemv_t_add<Real>(cell.W_hc, da_g, dh_prev);
    if (!s.mask.empty())
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] *= s.mask[k];
}

template <class Real>
LanguageModelCore<Real>::LanguageModelCore(std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size)
    : cell(embed_size, hidden_size), W_es(embed_size, dict_size), W_out(dict_size, hidden_size), b_out(dict_size, 1) {}

template <class Real>
LanguageModelCore<Real> LanguageModelCore<Real>::xavier(std::size_t dict_size, std::size_t embed_size,
                                                        std::size_t hidden_size, numeric::Rng& rng) {
    LanguageModelCore core(dict_size, embed_size, hidden_size);
    core.cell = LstmCell<Real>::xavier(embed_size, hidden_size, rng);
    core.W_es = numeric::xavier_init<Real>(embed_size, dict_size, rng);
    core.W_out = numeric::xavier_init<Real>(dict_size, hidden_size, rng);
    return core;
}

template <class Real>
void LanguageModelCore<Real>::append_tensors(std::vector<NamedTensor<Real>>& out) {
    cell.append_tensors(out);
    out.push_back({"W_es", &W_es, true});
    out.push_back({"W_out", &W_out, true});
    out.push_back({"b_out", &b_out, false});
}

template <class Real>
Vec<Real> LanguageModelCore<Real>::embed(TokenId id) const {
    Vec<Real> x(embed_size(), Real(0));
    numeric::column_add<Real>(W_es, id, x);
    return x;
}

template <class Real>
Vec<Real> LanguageModelCore<Real>::logits(std::span<const Real> h) const {
    Vec<Real> z(b_out.flat().begin(), b_out.flat().end());
    gemv_add<Real>(W_out, h, z);
    return z;
}

template <class Real>
Vec<Real> output_distribution(const LanguageModelCore<Real>& core, const LstmState<Real>& state) {
    auto z = core.logits(state.h);
    numeric::softmax_inplace<Real>(z);
    return z;
}

template <class Real>
SequenceLoss sequence_nll(const LanguageModelCore<Real>& core, const UnrolledSequence<Real>& seq,
                          LanguageModelCore<Real>* grads, std::vector<Vec<Real>>* input_grads, double weight) {
    const std::size_t T = seq.inputs.size();
    V2L_REQUIRE(seq.targets.size() == T, ShapeError, "sequence targets and inputs differ in length");
    V2L_REQUIRE(seq.dropout_masks.empty() || seq.dropout_masks.size() == T, ShapeError,
                "sequence needs one dropout mask per step");
    const std::size_t H = core.hidden_size();

    std::vector<StepCache<Real>> caches;
    caches.reserve(T);
    std::vector<Vec<Real>> probs(T);
    SequenceLoss loss;
    auto state = LstmState<Real>::zeros(H);
    for (std::size_t t = 0; t < T; ++t) {
        std::span<const Real> mask;
        if (!seq.dropout_masks.empty()) mask = seq.dropout_masks[t];
        caches.push_back(lstm_step_cached(core.cell, std::span<const Real>(seq.inputs[t]), state, mask));
        state = {caches.back().h, caches.back().c};
        if (const auto& target = seq.targets[t]) {
            V2L_REQUIRE(*target < core.dict_size(), PreconditionError, "target token id out of range");
            const auto z = core.logits(state.h);
            const auto logp = numeric::log_softmax<Real>(z);
            loss.nll -= static_cast<double>(logp[*target]);
            ++loss.target_count;
            if (grads) {
                probs[t].resize(z.size());
                for (std::size_t v = 0; v < z.size(); ++v) probs[t][v] = std::exp(logp[v]);
            }
        }
    }
    if (!grads) return loss;

    if (input_grads) input_grads->assign(T, Vec<Real>());
    const Real w = static_cast<Real>(weight);
    Vec<Real> dh_next(H, Real(0)), dc_next(H, Real(0)), dx, dh_prev, dc_prev;
    for (std::size_t t = T; t-- > 0;) {
        Vec<Real> dh = dh_next;
        if (const auto& target = seq.targets[t]) {
            Vec<Real> dz = probs[t];
            dz[*target] -= Real(1);
            for (Real& v : dz) v *= w;
            outer_add<Real>(grads->W_out, dz, caches[t].h);
            for (std::size_t v = 0; v < dz.size(); ++v) grads->b_out(v, 0) += dz[v];
            gemv_t_add<Real>(core.W_out, dz, dh);
        }
        lstm_step_backward(core.cell, caches[t], std::span<const Real>(dh), std::span<const Real>(dc_next),
                           grads->cell, dx, dh_prev, dc_prev);
        if (input_grads) (*input_grads)[t] = dx;
        dh_next.swap(dh_prev);
        dc_next.swap(dc_prev);
    }
    return loss;
}

template <class Real>
LstmState<Real> run_inputs(const LstmCell<Real>& cell, std::span<const Vec<Real>> inputs) {
    auto state = LstmState<Real>::zeros(cell.hidden_size());
    for (const auto& x : inputs) state = lstm_step(cell, std::span<const Real>(x), state);
    return state;
}

#define V2L_INSTANTIATE(Real)                                                                                       \
    template struct LstmCell<Real>;                                                                                 \
    template struct LanguageModelCore<Real>;                                                                        \
    template StepCache<Real> lstm_step_cached(const LstmCell<Real>&, std::span<const Real>, const LstmState<Real>&, \
                                              std::span<const Real>);                                               \
    template LstmState<Real> lstm_step(const LstmCell<Real>&, std::span<const Real>, const LstmState<Real>&,        \
                                       std::span<const Real>);                                                      \
    template void lstm_step_backward(const LstmCell<Real>&, const StepCache<Real>&, std::span<const Real>,          \
                                     std::span<const Real>, LstmCell<Real>&, Vec<Real>&, Vec<Real>&, Vec<Real>&);   \
    template Vec<Real> output_distribution(const LanguageModelCore<Real>&, const LstmState<Real>&);                 \
    template SequenceLoss sequence_nll(const LanguageModelCore<Real>&, const UnrolledSequence<Real>&,               \
                                       LanguageModelCore<Real>*, std::vector<Vec<Real>>*, double);                  \
    template LstmState<Real> run_inputs(const LstmCell<Real>&, std::span<const Vec<Real>>);

V2L_INSTANTIATE(float)
V2L_INSTANTIATE(double)

}  // namespace v2l::lstm
