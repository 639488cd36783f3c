#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "v2l/attributes/model.hpp"
#include "v2l/corpus/dictionary.hpp"
#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/knowledge/paravec.hpp"
#include "v2l/knowledge/selection.hpp"
#include "v2l/knowledge/sparql.hpp"
#include "v2l/lstm/captioner.hpp"
#include "v2l/metrics/metrics.hpp"
#include "v2l/vqa/model.hpp"

namespace py = pybind11;
using namespace v2l;

namespace {

using Vector = std::vector<float>;

py::list hypotheses(const std::vector<lstm::BeamHypothesis<float>>& hyps) {
    py::list out;
    for (const auto& h : hyps) out.append(py::make_tuple(h.ids, h.log_prob, h.finished));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Attribute-based vision-to-language models and metrics";
    m.attr("__version__") = V2L_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<NetworkError>(m, "NetworkError", base.ptr());

    // corpus
    m.def("tokenize", [](std::string_view s) { return corpus::tokenize(s); }, py::arg("text"));
    py::class_<corpus::WordDictionary>(m, "WordDictionary")
        .def(py::init<std::vector<std::string>>(), py::arg("words"))
        .def_static("load", &corpus::WordDictionary::load, py::arg("path"))
        .def("save", &corpus::WordDictionary::save, py::arg("path"))
        .def("__len__", &corpus::WordDictionary::size)
        .def_property_readonly("tokens", &corpus::WordDictionary::tokens)
        .def("id", [](const corpus::WordDictionary& d, std::string_view t) { return d.id(t); }, py::arg("token"))
        .def(
            "encode",
            [](const corpus::WordDictionary& d, const std::vector<std::string>& tokens, bool wrap) {
                return corpus::encode(tokens, d, wrap).ids;
            },
            py::arg("tokens"), py::arg("wrap") = false)
        .def(
            "decode",
            [](const corpus::WordDictionary& d, const std::vector<corpus::TokenId>& ids) {
                return corpus::decode(ids, d);
            },
            py::arg("ids"));

    // attributes
    py::class_<attributes::AttributeModel<float>>(m, "AttributeModel")
        .def_static("load", &attributes::load_model, py::arg("stem"))
        .def_property_readonly("num_attributes", &attributes::AttributeModel<float>::num_attributes)
        .def_property_readonly("feature_dim", &attributes::AttributeModel<float>::feature_dim)
        .def(
            "predict",
            [](const attributes::AttributeModel<float>& model, std::vector<std::vector<float>> regions) {
                attributes::RegionFeatureSet set{"", std::move(regions)};
                return attributes::predict(model, set).scores;
            },
            py::arg("regions"), "sigmoid of the region-max-pooled logits");

    // captioning
    py::class_<lstm::Captioner<float>>(m, "Captioner")
        .def_static("load", &lstm::load_captioner, py::arg("stem"))
        .def_property_readonly("num_attributes", &lstm::Captioner<float>::num_attributes)
        .def_property_readonly("dict_size", [](const lstm::Captioner<float>& c) { return c.core.dict_size(); })
        .def_property_readonly("hidden_size", [](const lstm::Captioner<float>& c) { return c.core.hidden_size(); })
        .def(
            "beam_search",
            [](const lstm::Captioner<float>& c, const Vector& v_att, std::size_t beam, std::size_t max_len) {
                return hypotheses(lstm::beam_search(c, std::span<const float>(v_att), beam, max_len));
            },
            py::arg("v_att"), py::arg("beam_width") = 5, py::arg("max_len") = 20,
            "list of (token ids, log prob, finished), best first")
        .def(
            "representation",
            [](const lstm::Captioner<float>& c, const Vector& v_att, std::size_t max_len, std::size_t count) {
                const auto r = lstm::caption_representation(c, std::span<const float>(v_att), max_len, count);
                return py::make_tuple(r.v_cap, r.captions, r.padded);
            },
            py::arg("v_att"), py::arg("max_len") = 20, py::arg("count") = 5,
            "(v_cap, pooled captions, padded)");

    // vqa
    py::class_<vqa::VqaModel<float>>(m, "VqaModel")
        .def_static("load", &vqa::load_vqa, py::arg("stem"))
        .def_property_readonly("num_attributes", &vqa::VqaModel<float>::num_attributes)
        .def_property_readonly("caption_dim", &vqa::VqaModel<float>::caption_dim)
        .def_property_readonly("knowledge_dim", &vqa::VqaModel<float>::knowledge_dim)
        .def(
            "answer",
            [](const vqa::VqaModel<float>& model, Vector v_att, Vector v_cap, Vector v_know,
               const std::vector<corpus::TokenId>& question, std::size_t max_len, std::size_t beam,
               bool zero_knowledge) {
                const vqa::ImageContext ctx{std::move(v_att), std::move(v_cap), std::move(v_know)};
                const auto a = vqa::generate_answer(model, ctx, std::span<const corpus::TokenId>(question),
                                                    {max_len, beam, zero_knowledge});
                return py::make_tuple(a.tokens, a.log_prob);
            },
            py::arg("v_att"), py::arg("v_cap"), py::arg("v_know"), py::arg("question"), py::arg("max_len") = 10,
            py::arg("beam_width") = 1, py::arg("zero_knowledge") = false, "(answer token ids, log prob)");

    // knowledge
    m.def("build_sparql_query", [](std::string_view a) { return knowledge::build_sparql_query(a); },
          py::arg("attribute"));
    m.def(
        "cosine", [](const Vector& a, const Vector& b) { return knowledge::cosine(a, b); }, py::arg("a"),
        py::arg("b"));
    m.def(
        "select_top_k",
        [](const Vector& q, const std::vector<Vector>& c, std::size_t k) { return knowledge::select_top_k(q, c, k); },
        py::arg("query"), py::arg("candidates"), py::arg("k"));

    py::class_<knowledge::ParagraphModel>(m, "ParagraphModel")
        .def_static(
            "train",
            [](const std::vector<std::string>& docs, std::size_t dim, std::size_t window, std::size_t negative,
               std::size_t epochs, double lr, std::uint64_t seed) {
                knowledge::ParagraphConfig cfg;
                cfg.dim = dim;
                cfg.window = window;
                cfg.negative = negative;
                cfg.epochs = epochs;
                cfg.learning_rate = lr;
                numeric::Rng rng(seed);
                py::gil_scoped_release release;
                return knowledge::train_paragraph_model(docs, cfg, rng);
            },
            py::arg("documents"), py::arg("dim") = 500, py::arg("window") = 5, py::arg("negative") = 5,
            py::arg("epochs") = 20, py::arg("lr") = 0.025, py::arg("seed") = 1)
        .def_static("load", &knowledge::ParagraphModel::load, py::arg("stem"))
        .def("save", &knowledge::ParagraphModel::save, py::arg("stem"))
        .def_property_readonly("dim", &knowledge::ParagraphModel::dim)
        .def_readonly("words", &knowledge::ParagraphModel::words)
        .def_readonly("epoch_loss", &knowledge::ParagraphModel::epoch_loss)
        .def(
            "infer", [](const knowledge::ParagraphModel& pm, std::string_view text) {
                return knowledge::infer_vector(pm, text);
            },
            py::arg("text"));

    // metrics
    m.def(
        "bleu",
        [](const std::vector<std::string>& cand, const std::vector<metrics::Tokens>& refs, std::size_t n) {
            return metrics::bleu_n(cand, refs, n);
        },
        py::arg("candidate"), py::arg("references"), py::arg("max_n") = 4, "BLEU-1..max_n of tokenized text");
    m.def("corpus_bleu", &metrics::corpus_bleu, py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4);
    py::class_<metrics::Taxonomy>(m, "Taxonomy")
        .def_static("parse", &metrics::Taxonomy::parse, py::arg("text"))
        .def_static("load", &metrics::Taxonomy::load, py::arg("path"))
        .def_property_readonly("root", &metrics::Taxonomy::root)
        .def("__len__", &metrics::Taxonomy::size)
        .def("__contains__", [](const metrics::Taxonomy& t, std::string_view n) { return t.contains(n); })
        .def("depth", [](const metrics::Taxonomy& t, std::string_view n) { return t.depth(n); })
        .def("lowest_common_ancestor", [](const metrics::Taxonomy& t, std::string_view a, std::string_view b) {
            return t.lowest_common_ancestor(a, b);
        });
    m.def(
        "wup", [](std::string_view a, std::string_view b, const metrics::Taxonomy& t) {
            return metrics::wup_similarity(a, b, t);
        },
        py::arg("a"), py::arg("b"), py::arg("taxonomy"));
    m.def(
        "wups",
        [](const std::vector<std::string>& pred, const std::vector<std::string>& truth, const metrics::Taxonomy& t,
           double threshold, bool down_weight) {
            return metrics::wups(pred, truth, t, threshold, {down_weight, 0.1});
        },
        py::arg("prediction"), py::arg("truth"), py::arg("taxonomy"), py::arg("threshold"),
        py::arg("down_weight") = true);
    m.def(
        "vqa_accuracy",
        [](std::string_view pred, const std::vector<std::string>& humans) {
            return metrics::vqa_accuracy(pred, humans);
        },
        py::arg("prediction"), py::arg("human_answers"));
    m.def(
        "question_category",
        [](std::string_view q) { return metrics::question_category(q, metrics::default_question_prefixes()); },
        py::arg("question"));
}
