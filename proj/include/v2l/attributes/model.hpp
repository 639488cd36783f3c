#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v2l/numeric/matrix.hpp"
#include "v2l/numeric/optim.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::attributes {

using numeric::basic_matrix;
using numeric::Vec;

/// Precomputed feature vectors for one image; region 0 is the whole image.
struct RegionFeatureSet {
    std::string image_id;
    std::vector<std::vector<float>> regions;

    std::size_t dim() const noexcept { return regions.empty() ? 0 : regions.front().size(); }
    /// Throws DataError unless there is at least one region, all of equal finite dimension.
    void validate() const;
};

/// Per-image attribute scores V_att(I), each in [0, 1].
struct AttributeVector {
    std::vector<float> scores;
};

/// Linear scoring head shared across regions: logits = W f + b.
template <class Real>
struct AttributeModel {
    basic_matrix<Real> weight;  ///< c x d
    basic_matrix<Real> bias;    ///< c x 1

    AttributeModel() = default;
    AttributeModel(std::size_t num_attributes, std::size_t feature_dim)
        : weight(num_attributes, feature_dim), bias(num_attributes, 1) {}

    static AttributeModel xavier(std::size_t num_attributes, std::size_t feature_dim, numeric::Rng& rng);

    std::size_t num_attributes() const noexcept { return weight.rows(); }
    std::size_t feature_dim() const noexcept { return weight.cols(); }

    std::vector<numeric::NamedTensor<Real>> tensors();
    AttributeModel zeros_like() const { return AttributeModel(num_attributes(), feature_dim()); }
};

template <class Real>
Vec<Real> score_region(const AttributeModel<Real>& model, std::span<const float> features);

struct PooledLogits {
    std::vector<double> values;
    std::vector<std::size_t> argmax;  ///< winning region per attribute, first index on ties
};

/// Elementwise maximum across regions. Throws PreconditionError on an empty list or ragged lengths.
template <class Real>
PooledLogits aggregate_max_pool(std::span<const Vec<Real>> region_logits);

struct LossAndGradient {
    double loss = 0;                ///< mean over elements
    std::vector<double> gradient;   ///< d loss / d logits
};

/// Element-wise logistic loss with labels mapped to s = 2y - 1:
/// mean_j log(1 + exp(-s_j p_j)), gradient -s_j sigmoid(-s_j p_j) / c.
LossAndGradient multilabel_loss(std::span<const float> labels, std::span<const double> logits);

template <class Real>
AttributeVector predict(const AttributeModel<Real>& model, const RegionFeatureSet& features);

/// Loss of one image and its gradient, accumulated into `grads` scaled by `weight`.
template <class Real>
double image_loss(const AttributeModel<Real>& model, const RegionFeatureSet& features, std::span<const float> labels,
                  AttributeModel<Real>* grads = nullptr, double weight = 1.0);

struct LabeledImage {
    RegionFeatureSet features;
    std::vector<float> labels;
};

struct TrainHistory {
    std::vector<double> epoch_loss;  ///< mean training loss over each epoch's batches
};

/// Mini-batch SGD on the mean image loss, routing max-pool gradients to the argmax region.
template <class Real>
TrainHistory train(AttributeModel<Real>& model, std::span<const LabeledImage> dataset,
                   const numeric::OptimizerConfig& config, numeric::Rng& rng);

/// Fraction of images whose thresholded prediction equals the label vector exactly.
template <class Real>
double subset_accuracy(const AttributeModel<Real>& model, std::span<const LabeledImage> dataset,
                       double threshold = 0.5);

/// k highest scores, descending, ties broken by vocabulary index.
std::vector<std::pair<std::string, float>> top_k_attributes(const AttributeVector& v,
                                                            std::span<const std::string> terms, std::size_t k);

// Feature and prediction files.

struct FeatureFile {
    std::size_t dim = 0;
    std::vector<RegionFeatureSet> images;
};

/// Header line {"version": "v1", "dim": d} followed by {"image_id", "regions": [[...], ...]} lines.
FeatureFile load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureFile& file);

struct PredictionFile {
    std::vector<std::string> terms;
    std::vector<std::pair<std::string, AttributeVector>> images;  ///< image_id -> scores
};

PredictionFile load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, const PredictionFile& file);

void save_model(const std::filesystem::path& stem, AttributeModel<float>& model);
AttributeModel<float> load_model(const std::filesystem::path& stem);

}  // namespace v2l::attributes
