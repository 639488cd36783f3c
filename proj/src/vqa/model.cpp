#include "v2l/vqa/model.hpp"

#include <algorithm>

#include "v2l/error.hpp"
#include "v2l/lstm/training.hpp"
#include "v2l/numeric/checkpoint.hpp"

namespace v2l::vqa {

using corpus::WordDictionary;

template <class Real>
VqaModel<Real>::VqaModel(std::size_t num_attributes, std::size_t caption_dim, std::size_t knowledge_dim,
                         std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size)
    : core(dict_size, embed_size, hidden_size),
      W_ea(embed_size, num_attributes),
      W_ec(embed_size, caption_dim),
      W_ek(embed_size, knowledge_dim) {}

template <class Real>
VqaModel<Real> VqaModel<Real>::xavier(std::size_t num_attributes, std::size_t caption_dim, std::size_t knowledge_dim,
                                      std::size_t dict_size, std::size_t embed_size, std::size_t hidden_size,
                                      numeric::Rng& rng) {
    VqaModel m;
    m.core = lstm::LanguageModelCore<Real>::xavier(dict_size, embed_size, hidden_size, rng);
    m.W_ea = numeric::xavier_init<Real>(embed_size, num_attributes, rng);
    m.W_ec = numeric::xavier_init<Real>(embed_size, caption_dim, rng);
    m.W_ek = numeric::xavier_init<Real>(embed_size, knowledge_dim, rng);
    return m;
}

template <class Real>
std::vector<NamedTensor<Real>> VqaModel<Real>::tensors() {
    std::vector<NamedTensor<Real>> out;
    core.append_tensors(out);
    out.push_back({"W_ea", &W_ea, true});
    out.push_back({"W_ec", &W_ec, true});
    out.push_back({"W_ek", &W_ek, true});
    return out;
}

template <class Real>
VqaModel<Real> VqaModel<Real>::zeros_like() const {
    return VqaModel(num_attributes(), caption_dim(), knowledge_dim(), core.dict_size(), core.embed_size(),
                    core.hidden_size());
}

namespace {

template <class Real>
void embed_into(const basic_matrix<Real>& W, std::span<const float> v, const char* what, Vec<Real>& out) {
    if (v.size() != W.cols())
        throw ShapeError(std::string(what) + " has length " + std::to_string(v.size()) + ", model expects " +
                         std::to_string(W.cols()));
    const Vec<Real> x(v.begin(), v.end());
    numeric::gemv_add<Real>(W, x, out);
}

void check_ids(std::span<const TokenId> ids, std::size_t dict_size, const char* what) {
    for (auto id : ids)
        if (id >= dict_size) throw PreconditionError(std::string(what) + " token id " + std::to_string(id) + " out of range");
}

}  // namespace

template <class Real>
Vec<Real> initial_input(const VqaModel<Real>& model, const ImageContext& context) {
    Vec<Real> x(model.core.embed_size(), Real(0));
    embed_into(model.W_ea, context.v_att, "attribute vector", x);
    embed_into(model.W_ec, context.v_cap, "caption representation", x);
    embed_into(model.W_ek, context.v_know, "knowledge vector", x);
    return x;
}

std::vector<TokenId> answer_body(const TokenSequence& answer) {
    const auto end = std::find(answer.ids.begin(), answer.ids.end(), WordDictionary::kEnd);
    return {answer.ids.begin(), end};
}

template <class Real>
lstm::UnrolledSequence<Real> answer_sequence(const VqaModel<Real>& model, const VqaInstance& instance,
                                             Dropout dropout) {
    const auto& q = instance.question.ids;
    const auto a = answer_body(instance.answer);
    V2L_REQUIRE(!q.empty(), PreconditionError, "question is empty");
    V2L_REQUIRE(!a.empty(), PreconditionError, "answer is empty");
    check_ids(q, model.core.dict_size(), "question");
    check_ids(a, model.core.dict_size(), "answer");

    lstm::UnrolledSequence<Real> seq;
    seq.inputs.push_back(initial_input(model, instance.context));
    seq.targets.push_back(std::nullopt);
    for (std::size_t t = 0; t < q.size(); ++t) {
        seq.inputs.push_back(model.core.embed(q[t]));
        seq.targets.push_back(t + 1 == q.size() ? std::optional<TokenId>(a[0]) : std::nullopt);
    }
    for (std::size_t j = 0; j < a.size(); ++j) {
        seq.inputs.push_back(model.core.embed(a[j]));
        seq.targets.push_back(j + 1 < a.size() ? a[j + 1] : WordDictionary::kEnd);
    }
    if (dropout.rng && dropout.rate > 0)
        for (std::size_t t = 0; t < seq.inputs.size(); ++t)
            seq.dropout_masks.push_back(numeric::dropout_mask<Real>(model.core.embed_size(), dropout.rate, *dropout.rng));
    return seq;
}

template <class Real>
SequenceLoss answer_nll(const VqaModel<Real>& model, const VqaInstance& instance, VqaModel<Real>* grads,
                        double weight, Dropout dropout) {
    const auto seq = answer_sequence(model, instance, dropout);
    if (!grads) return lstm::sequence_nll<Real>(model.core, seq);
    std::vector<Vec<Real>> dx;
    const auto loss = lstm::sequence_nll<Real>(model.core, seq, &grads->core, &dx, weight);

    const auto& ctx = instance.context;
    numeric::outer_add<Real>(grads->W_ea, dx[0], Vec<Real>(ctx.v_att.begin(), ctx.v_att.end()));
    numeric::outer_add<Real>(grads->W_ec, dx[0], Vec<Real>(ctx.v_cap.begin(), ctx.v_cap.end()));
    numeric::outer_add<Real>(grads->W_ek, dx[0], Vec<Real>(ctx.v_know.begin(), ctx.v_know.end()));

    const auto& q = instance.question.ids;
    const auto a = answer_body(instance.answer);
    std::size_t t = 1;
    for (auto id : q) numeric::column_accumulate<Real>(grads->core.W_es, id, dx[t++]);
    for (auto id : a) numeric::column_accumulate<Real>(grads->core.W_es, id, dx[t++]);
    return loss;
}

template <class Real>
TrainHistory train_vqa(VqaModel<Real>& model, std::span<const VqaInstance> dataset,
                       const numeric::OptimizerConfig& config, numeric::Rng& rng) {
    TrainHistory history;
    history.epoch_loss = lstm::detail::sgd_epochs(model, dataset.size(), config, rng,
                                                  [&](std::size_t i, VqaModel<Real>& grads, double weight) {
                                                      return answer_nll(model, dataset[i], &grads, weight,
                                                                        Dropout{config.dropout_rate, &rng})
                                                          .nll;
                                                  });
    return history;
}

template <class Real>
lstm::LstmState<Real> encode_question(const VqaModel<Real>& model, const ImageContext& context,
                                      std::span<const TokenId> question) {
    V2L_REQUIRE(!question.empty(), PreconditionError, "question is empty");
    check_ids(question, model.core.dict_size(), "question");
    std::vector<Vec<Real>> inputs{initial_input(model, context)};
    for (auto id : question) inputs.push_back(model.core.embed(id));
    return lstm::run_inputs<Real>(model.core.cell, inputs);
}

template <class Real>
GeneratedAnswer generate_answer(const VqaModel<Real>& model, const ImageContext& context,
                                std::span<const TokenId> question, const DecodeOptions& options) {
    ImageContext ctx = context;
    if (options.zero_knowledge) std::fill(ctx.v_know.begin(), ctx.v_know.end(), 0.0f);
    const auto start = encode_question(model, ctx, question);
    const auto hyps = lstm::beam_search_from(model.core, start, options.beam_width, options.max_len);
    GeneratedAnswer out;
    out.tokens = lstm::content_tokens(hyps.front());
    out.log_prob = hyps.front().log_prob;
    return out;
}

void save_vqa(const std::filesystem::path& stem, VqaModel<float>& model) {
    const auto tensors = model.tensors();
    numeric::save_checkpoint<float>(stem, "vqa", tensors,
                                    {{"num_attributes", model.num_attributes()},
                                     {"caption_dim", model.caption_dim()},
                                     {"knowledge_dim", model.knowledge_dim()},
                                     {"dict_size", model.core.dict_size()},
                                     {"embed_size", model.core.embed_size()},
                                     {"hidden_size", model.core.hidden_size()}});
}

VqaModel<float> load_vqa(const std::filesystem::path& stem) {
    const auto ckpt = numeric::load_checkpoint(stem, "vqa");
    const auto dim = [&](const char* key) { return ckpt.meta.at(key).get<std::size_t>(); };
    VqaModel<float> model(dim("num_attributes"), dim("caption_dim"), dim("knowledge_dim"), dim("dict_size"),
                          dim("embed_size"), dim("hidden_size"));
    const auto tensors = model.tensors();
    numeric::restore_tensors<float>(ckpt, tensors);
    return model;
}

#define V2L_INSTANTIATE(Real)                                                                                        \
    template struct VqaModel<Real>;                                                                                  \
    template Vec<Real> initial_input(const VqaModel<Real>&, const ImageContext&);                                    \
    template lstm::UnrolledSequence<Real> answer_sequence(const VqaModel<Real>&, const VqaInstance&, Dropout);       \
    template SequenceLoss answer_nll(const VqaModel<Real>&, const VqaInstance&, VqaModel<Real>*, double, Dropout);   \
    template TrainHistory train_vqa(VqaModel<Real>&, std::span<const VqaInstance>, const numeric::OptimizerConfig&,  \
                                    numeric::Rng&);                                                                  \
    template lstm::LstmState<Real> encode_question(const VqaModel<Real>&, const ImageContext&,                       \
                                                   std::span<const TokenId>);                                        \
    template GeneratedAnswer generate_answer(const VqaModel<Real>&, const ImageContext&, std::span<const TokenId>,   \
                                             const DecodeOptions&);

V2L_INSTANTIATE(float)
V2L_INSTANTIATE(double)

}  // namespace v2l::vqa
