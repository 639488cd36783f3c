#include "v2l/lstm/captioner.hpp"

#include <cmath>

#include "v2l/error.hpp"
#include "v2l/lstm/training.hpp"
#include "v2l/numeric/checkpoint.hpp"

namespace v2l::lstm {

using corpus::WordDictionary;

template <class Real>
Captioner<Real>::Captioner(std::size_t num_attributes, std::size_t dict_size, std::size_t embed_size,
                           std::size_t hidden_size)
    : core(dict_size, embed_size, hidden_size), W_ea(embed_size, num_attributes) {}

template <class Real>
Captioner<Real> Captioner<Real>::xavier(std::size_t num_attributes, std::size_t dict_size, std::size_t embed_size,
                                        std::size_t hidden_size, numeric::Rng& rng) {
    Captioner m;
    m.core = LanguageModelCore<Real>::xavier(dict_size, embed_size, hidden_size, rng);
    m.W_ea = numeric::xavier_init<Real>(embed_size, num_attributes, rng);
    return m;
}

template <class Real>
std::vector<NamedTensor<Real>> Captioner<Real>::tensors() {
    std::vector<NamedTensor<Real>> out;
    core.append_tensors(out);
    out.push_back({"W_ea", &W_ea, true});
    return out;
}

template <class Real>
Captioner<Real> Captioner<Real>::zeros_like() const {
    return Captioner(num_attributes(), core.dict_size(), core.embed_size(), core.hidden_size());
}

namespace {

template <class Real>
Vec<Real> embed_attributes(const basic_matrix<Real>& W_ea, std::span<const float> v_att) {
    if (v_att.size() != W_ea.cols())
        throw ShapeError("attribute vector has length " + std::to_string(v_att.size()) + ", model expects " +
                         std::to_string(W_ea.cols()));
    Vec<Real> v(v_att.begin(), v_att.end());
    Vec<Real> x(W_ea.rows(), Real(0));
    numeric::gemv_add<Real>(W_ea, v, x);
    return x;
}

void check_wrapped(const corpus::TokenSequence& sentence, std::size_t dict_size) {
    const auto& ids = sentence.ids;
    if (ids.size() < 2) throw PreconditionError("caption sentence is empty; expected at least START and END");
    if (ids.front() != WordDictionary::kStart || ids.back() != WordDictionary::kEnd)
        throw PreconditionError("caption sentence must be wrapped with START and END");
    for (auto id : ids)
        if (id >= dict_size) throw PreconditionError("caption token id " + std::to_string(id) + " out of range");
}

}  // namespace

template <class Real>
UnrolledSequence<Real> caption_sequence(const Captioner<Real>& model, std::span<const float> v_att,
                                        const corpus::TokenSequence& sentence, Dropout dropout) {
    check_wrapped(sentence, model.core.dict_size());
    const auto& ids = sentence.ids;
    UnrolledSequence<Real> seq;
    seq.inputs.push_back(embed_attributes(model.W_ea, v_att));
    seq.targets.push_back(std::nullopt);
    for (std::size_t t = 0; t + 1 < ids.size(); ++t) {
        seq.inputs.push_back(model.core.embed(ids[t]));
        seq.targets.push_back(ids[t + 1]);
    }
    if (dropout.rng && dropout.rate > 0)
        for (std::size_t t = 0; t < seq.inputs.size(); ++t)
            seq.dropout_masks.push_back(numeric::dropout_mask<Real>(model.core.embed_size(), dropout.rate, *dropout.rng));
    return seq;
}

template <class Real>
SequenceLoss caption_nll(const Captioner<Real>& model, std::span<const float> v_att,
                         const corpus::TokenSequence& sentence, Captioner<Real>* grads, double weight,
                         Dropout dropout) {
    const auto seq = caption_sequence(model, v_att, sentence, dropout);
    if (!grads) return sequence_nll<Real>(model.core, seq);
    std::vector<Vec<Real>> dx;
    const auto loss = sequence_nll<Real>(model.core, seq, &grads->core, &dx, weight);
    Vec<Real> v(v_att.begin(), v_att.end());
    numeric::outer_add<Real>(grads->W_ea, dx[0], v);
    for (std::size_t t = 1; t < dx.size(); ++t) numeric::column_accumulate<Real>(grads->core.W_es, sentence.ids[t - 1], dx[t]);
    return loss;
}

template <class Real>
TrainHistory train_captioner(Captioner<Real>& model, std::span<const CaptionExample> dataset,
                             const numeric::OptimizerConfig& config, numeric::Rng& rng) {
    TrainHistory history;
    history.epoch_loss = detail::sgd_epochs(model, dataset.size(), config, rng,
                                            [&](std::size_t i, Captioner<Real>& grads, double weight) {
                                                const auto& ex = dataset[i];
                                                return caption_nll(model, ex.v_att, ex.sentence, &grads, weight,
                                                                   Dropout{config.dropout_rate, &rng})
                                                    .nll;
                                            });
    return history;
}

template <class Real>
double perplexity(const Captioner<Real>& model, std::span<const CaptionExample> corpus) {
    V2L_REQUIRE(!corpus.empty(), PreconditionError, "perplexity of an empty corpus");
    double nll = 0;
    std::size_t count = 0;
    for (const auto& ex : corpus) {
        const auto loss = caption_nll(model, ex.v_att, ex.sentence);
        nll += loss.nll;
        count += loss.target_count;
    }
    return std::exp(nll / static_cast<double>(count));
}

template <class Real>
LstmState<Real> caption_start_state(const Captioner<Real>& model, std::span<const float> v_att) {
    std::vector<Vec<Real>> inputs{embed_attributes(model.W_ea, v_att), model.core.embed(WordDictionary::kStart)};
    return run_inputs<Real>(model.core.cell, inputs);
}

template <class Real>
std::vector<BeamHypothesis<Real>> beam_search(const Captioner<Real>& model, std::span<const float> v_att,
                                              std::size_t beam_width, std::size_t max_len) {
    return beam_search_from(model.core, caption_start_state(model, v_att), beam_width, max_len);
}

template <class Real>
CaptionRepresentation caption_representation(const Captioner<Real>& model, std::span<const float> v_att,
                                             std::size_t max_len, std::size_t count) {
    V2L_REQUIRE(count >= 1, PreconditionError, "caption representation needs at least one caption");
    auto hyps = beam_search(model, v_att, count, max_len);
    CaptionRepresentation rep;
    if (hyps.size() < count) {
        rep.padded = true;
        warn("caption representation: beam returned " + std::to_string(hyps.size()) + " of " + std::to_string(count) +
             " captions; padding with the best one");
        const auto best = hyps.front();
        while (hyps.size() < count) hyps.push_back(best);
    }
    const std::size_t H = model.core.hidden_size();
    std::vector<double> mean(H, 0.0);
    for (const auto& hyp : hyps) {
        for (std::size_t k = 0; k < H; ++k) mean[k] += static_cast<double>(hyp.state.h[k]);
        rep.captions.push_back(content_tokens(hyp));
    }
    rep.v_cap.resize(H);
    for (std::size_t k = 0; k < H; ++k) rep.v_cap[k] = static_cast<float>(mean[k] / static_cast<double>(count));
    return rep;
}

void save_captioner(const std::filesystem::path& stem, Captioner<float>& model) {
    const auto tensors = model.tensors();
    numeric::save_checkpoint<float>(stem, "captioner", tensors,
                                    {{"num_attributes", model.num_attributes()},
                                     {"dict_size", model.core.dict_size()},
                                     {"embed_size", model.core.embed_size()},
                                     {"hidden_size", model.core.hidden_size()}});
}

Captioner<float> load_captioner(const std::filesystem::path& stem) {
    const auto ckpt = numeric::load_checkpoint(stem, "captioner");
    Captioner<float> model(ckpt.meta.at("num_attributes").get<std::size_t>(), ckpt.meta.at("dict_size").get<std::size_t>(),
                           ckpt.meta.at("embed_size").get<std::size_t>(), ckpt.meta.at("hidden_size").get<std::size_t>());
    const auto tensors = model.tensors();
    numeric::restore_tensors<float>(ckpt, tensors);
    return model;
}

#define V2L_INSTANTIATE(Real)                                                                                        \
    template struct Captioner<Real>;                                                                                 \
    template UnrolledSequence<Real> caption_sequence(const Captioner<Real>&, std::span<const float>,                 \
                                                     const corpus::TokenSequence&, Dropout);                         \
    template SequenceLoss caption_nll(const Captioner<Real>&, std::span<const float>, const corpus::TokenSequence&,  \
                                      Captioner<Real>*, double, Dropout);                                            \
    template TrainHistory train_captioner(Captioner<Real>&, std::span<const CaptionExample>,                         \
                                          const numeric::OptimizerConfig&, numeric::Rng&);                           \
    template double perplexity(const Captioner<Real>&, std::span<const CaptionExample>);                             \
    template LstmState<Real> caption_start_state(const Captioner<Real>&, std::span<const float>);                    \
    template std::vector<BeamHypothesis<Real>> beam_search(const Captioner<Real>&, std::span<const float>,           \
                                                           std::size_t, std::size_t);                                \
    template CaptionRepresentation caption_representation(const Captioner<Real>&, std::span<const float>,            \
                                                          std::size_t, std::size_t);

V2L_INSTANTIATE(float)
V2L_INSTANTIATE(double)

}  // namespace v2l::lstm
