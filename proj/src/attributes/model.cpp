#include "v2l/attributes/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2l/error.hpp"
#include "v2l/io.hpp"
#include "v2l/numeric/checkpoint.hpp"
#include "v2l/numeric/nonlinear.hpp"

namespace v2l::attributes {

using numeric::sigmoid;
using numeric::softplus;

void RegionFeatureSet::validate() const {
    if (regions.empty()) throw DataError("image '" + image_id + "' has no regions");
    const std::size_t d = regions.front().size();
    if (d == 0) throw DataError("image '" + image_id + "' has empty feature vectors");
    for (const auto& r : regions) {
        if (r.size() != d) throw DataError("image '" + image_id + "' has regions of differing dimension");
        if (!numeric::all_finite<float>(r)) throw DataError("image '" + image_id + "' has non-finite features");
    }
}

template <class Real>
AttributeModel<Real> AttributeModel<Real>::xavier(std::size_t num_attributes, std::size_t feature_dim,
                                                  numeric::Rng& rng) {
    AttributeModel m(num_attributes, feature_dim);
    m.weight = numeric::xavier_init<Real>(num_attributes, feature_dim, rng);
    return m;
}

template <class Real>
std::vector<numeric::NamedTensor<Real>> AttributeModel<Real>::tensors() {
    return {{"attr.W", &weight, true}, {"attr.b", &bias, false}};
}

template <class Real>
Vec<Real> score_region(const AttributeModel<Real>& model, std::span<const float> features) {
    if (features.size() != model.feature_dim())
        throw ShapeError("feature dimension " + std::to_string(features.size()) + " does not match model dimension " +
                         std::to_string(model.feature_dim()));
    Vec<Real> x(features.begin(), features.end());
    Vec<Real> logits(model.bias.flat().begin(), model.bias.flat().end());
    numeric::gemv_add<Real>(model.weight, x, logits);
    return logits;
}

template <class Real>
PooledLogits aggregate_max_pool(std::span<const Vec<Real>> region_logits) {
    V2L_REQUIRE(!region_logits.empty(), PreconditionError, "max pooling needs at least one region");
    const std::size_t c = region_logits.front().size();
    PooledLogits out;
    out.values.assign(region_logits.front().begin(), region_logits.front().end());
    out.argmax.assign(c, 0);
    for (std::size_t r = 1; r < region_logits.size(); ++r) {
        V2L_REQUIRE(region_logits[r].size() == c, PreconditionError, "max pooling over regions of unequal length");
        for (std::size_t j = 0; j < c; ++j)
            if (static_cast<double>(region_logits[r][j]) > out.values[j]) {
                out.values[j] = static_cast<double>(region_logits[r][j]);
                out.argmax[j] = r;
            }
    }
    return out;
}

LossAndGradient multilabel_loss(std::span<const float> labels, std::span<const double> logits) {
    V2L_REQUIRE(labels.size() == logits.size(), ShapeError, "labels and logits differ in length");
    V2L_REQUIRE(!labels.empty(), PreconditionError, "multilabel loss of an empty vector");
    LossAndGradient out;
    out.gradient.resize(logits.size());
    const double inv_c = 1.0 / static_cast<double>(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (!std::isfinite(logits[j])) throw Error("multilabel loss: non-finite logit at index " + std::to_string(j));
        V2L_REQUIRE(labels[j] == 0.0f || labels[j] == 1.0f, PreconditionError, "labels must be 0 or 1");
        const double s = labels[j] == 1.0f ? 1.0 : -1.0;
        const double margin = -s * logits[j];
        out.loss += softplus(margin);
        out.gradient[j] = -s * sigmoid(margin) * inv_c;
    }
    out.loss *= inv_c;
    return out;
}

namespace {

template <class Real>
std::vector<Vec<Real>> region_logits(const AttributeModel<Real>& model, const RegionFeatureSet& features) {
    features.validate();
    std::vector<Vec<Real>> out;
    out.reserve(features.regions.size());
    for (const auto& r : features.regions) out.push_back(score_region(model, r));
    return out;
}

}  // namespace

template <class Real>
AttributeVector predict(const AttributeModel<Real>& model, const RegionFeatureSet& features) {
    const auto logits = region_logits(model, features);
    const auto pooled = aggregate_max_pool<Real>(logits);
    AttributeVector v;
    v.scores.reserve(pooled.values.size());
    for (double z : pooled.values) v.scores.push_back(static_cast<float>(sigmoid(z)));
    return v;
}

template <class Real>
double image_loss(const AttributeModel<Real>& model, const RegionFeatureSet& features, std::span<const float> labels,
                  AttributeModel<Real>* grads, double weight) {
    const auto logits = region_logits(model, features);
    const auto pooled = aggregate_max_pool<Real>(logits);
    const auto lg = multilabel_loss(labels, pooled.values);
    if (grads) {
        for (std::size_t j = 0; j < lg.gradient.size(); ++j) {
            const double g = weight * lg.gradient[j];
            const auto& f = features.regions[pooled.argmax[j]];
            auto row = grads->weight.row(j);
            for (std::size_t k = 0; k < f.size(); ++k) row[k] += static_cast<Real>(g * f[k]);
            grads->bias(j, 0) += static_cast<Real>(g);
        }
    }
    return lg.loss;
}

template <class Real>
TrainHistory train(AttributeModel<Real>& model, std::span<const LabeledImage> dataset,
                   const numeric::OptimizerConfig& config, numeric::Rng& rng) {
    config.validate();
    V2L_REQUIRE(!dataset.empty(), PreconditionError, "attribute training needs a non-empty dataset");
    for (const auto& ex : dataset) {
        ex.features.validate();
        if (ex.features.dim() != model.feature_dim())
            throw ShapeError("image '" + ex.features.image_id + "' has feature dimension " +
                             std::to_string(ex.features.dim()) + ", model expects " +
                             std::to_string(model.feature_dim()));
        if (ex.labels.size() != model.num_attributes())
            throw ShapeError("image '" + ex.features.image_id + "' has " + std::to_string(ex.labels.size()) +
                             " labels, model expects " + std::to_string(model.num_attributes()));
    }

    TrainHistory history;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    auto grads = model.zeros_like();
    auto params = model.tensors();
    auto grad_tensors = grads.tensors();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle<std::size_t>(order);
        double epoch_loss = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double w = 1.0 / static_cast<double>(end - start);
            for (auto& t : grad_tensors) t.value->fill(Real(0));
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = dataset[order[i]];
                epoch_loss += image_loss(model, ex.features, ex.labels, &grads, w);
            }
            numeric::sgd_step<Real>(params, grad_tensors, config);
        }
        history.epoch_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
    }
    return history;
}

template <class Real>
double subset_accuracy(const AttributeModel<Real>& model, std::span<const LabeledImage> dataset, double threshold) {
    if (dataset.empty()) return 0.0;
    std::size_t exact = 0;
    for (const auto& ex : dataset) {
        const auto v = predict(model, ex.features);
        bool all = true;
        for (std::size_t j = 0; j < v.scores.size(); ++j)
            all = all && ((v.scores[j] >= threshold) == (ex.labels[j] == 1.0f));
        exact += all;
    }
    return static_cast<double>(exact) / static_cast<double>(dataset.size());
}

std::vector<std::pair<std::string, float>> top_k_attributes(const AttributeVector& v,
                                                            std::span<const std::string> terms, std::size_t k) {
    V2L_REQUIRE(terms.size() == v.scores.size(), ShapeError, "attribute scores and vocabulary differ in length");
    if (k < 1 || k > v.scores.size())
        throw PreconditionError("top-k requested " + std::to_string(k) + " of " + std::to_string(v.scores.size()) +
                                " attributes");
    std::vector<std::size_t> idx(v.scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v.scores[a] > v.scores[b]; });
    std::vector<std::pair<std::string, float>> out;
    for (std::size_t i = 0; i < k; ++i) out.emplace_back(terms[idx[i]], v.scores[idx[i]]);
    return out;
}

FeatureFile load_features(const std::filesystem::path& path) {
    FeatureFile file;
    bool header = false;
    io::read_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
        if (!header) {
            if (rec.value("version", "") != "v1")
                throw DataError(path.string() + ": features file must start with a v1 header line");
            file.dim = rec.at("dim").get<std::size_t>();
            header = true;
            return;
        }
        RegionFeatureSet set;
        set.image_id = rec.at("image_id").get<std::string>();
        set.regions = rec.at("regions").get<std::vector<std::vector<float>>>();
        set.validate();
        if (set.dim() != file.dim)
            throw DataError(path.string() + ":" + std::to_string(line) + ": region dimension " +
                            std::to_string(set.dim()) + " differs from header dimension " + std::to_string(file.dim));
        file.images.push_back(std::move(set));
    });
    if (!header) throw DataError(path.string() + ": empty features file");
    return file;
}

void save_features(const std::filesystem::path& path, const FeatureFile& file) {
    std::string out = nlohmann::json{{"version", "v1"}, {"dim", file.dim}}.dump() + "\n";
    for (const auto& img : file.images)
        out += nlohmann::json{{"image_id", img.image_id}, {"regions", img.regions}}.dump() + "\n";
    io::write_file_atomic(path, out);
}

PredictionFile load_predictions(const std::filesystem::path& path) {
    PredictionFile file;
    bool header = false;
    io::read_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
        if (!header) {
            if (rec.value("version", "") != "v1")
                throw DataError(path.string() + ": predictions file must start with a v1 header line");
            file.terms = rec.at("terms").get<std::vector<std::string>>();
            header = true;
            return;
        }
        AttributeVector v{rec.at("scores").get<std::vector<float>>()};
        if (v.scores.size() != file.terms.size())
            throw DataError(path.string() + ":" + std::to_string(line) + ": score vector length differs from terms");
        file.images.emplace_back(rec.at("image_id").get<std::string>(), std::move(v));
    });
    if (!header) throw DataError(path.string() + ": empty predictions file");
    return file;
}

void save_predictions(const std::filesystem::path& path, const PredictionFile& file) {
    std::string out = nlohmann::json{{"version", "v1"}, {"terms", file.terms}}.dump() + "\n";
    for (const auto& [id, v] : file.images) out += nlohmann::json{{"image_id", id}, {"scores", v.scores}}.dump() + "\n";
    io::write_file_atomic(path, out);
}

void save_model(const std::filesystem::path& stem, AttributeModel<float>& model) {
    const auto tensors = model.tensors();
    numeric::save_checkpoint<float>(stem, "attributes", tensors,
                                    {{"num_attributes", model.num_attributes()}, {"feature_dim", model.feature_dim()}});
}

AttributeModel<float> load_model(const std::filesystem::path& stem) {
    const auto ckpt = numeric::load_checkpoint(stem, "attributes");
    AttributeModel<float> model(ckpt.meta.at("num_attributes").get<std::size_t>(),
                                ckpt.meta.at("feature_dim").get<std::size_t>());
    const auto tensors = model.tensors();
    numeric::restore_tensors<float>(ckpt, tensors);
    return model;
}

#define V2L_INSTANTIATE(Real)                                                                                         \
    template struct AttributeModel<Real>;                                                                             \
    template Vec<Real> score_region(const AttributeModel<Real>&, std::span<const float>);                             \
    template PooledLogits aggregate_max_pool<Real>(std::span<const Vec<Real>>);                                       \
    template AttributeVector predict(const AttributeModel<Real>&, const RegionFeatureSet&);                           \
    template double image_loss(const AttributeModel<Real>&, const RegionFeatureSet&, std::span<const float>,          \
                               AttributeModel<Real>*, double);                                                        \
    template TrainHistory train(AttributeModel<Real>&, std::span<const LabeledImage>, const numeric::OptimizerConfig&, \
                                numeric::Rng&);                                                                       \
    template double subset_accuracy(const AttributeModel<Real>&, std::span<const LabeledImage>, double);

V2L_INSTANTIATE(float)
V2L_INSTANTIATE(double)

}  // namespace v2l::attributes
