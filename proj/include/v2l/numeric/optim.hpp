#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "v2l/numeric/matrix.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::numeric {

/// A model tensor exposed for optimisation, gradient checking and checkpointing.
/// `decay` marks weight matrices that receive the L2 penalty (biases do not).
template <class Real>
struct NamedTensor {
    std::string name;
    basic_matrix<Real>* value = nullptr;
    bool decay = true;
};

struct OptimizerConfig {
    double learning_rate = 0.001;
    double clip_norm = 5.0;
    std::size_t batch_size = 100;
    double l2_lambda = 0.5e-8;
    double dropout_rate = 0.5;
    std::size_t epochs = 10;

    /// Throws PreconditionError when a field is out of range.
    void validate() const;
};

struct StepStats {
    double grad_norm = 0;  ///< global L2 norm before clipping
    double scale = 1;      ///< factor applied to the gradients
};

template <class Real>
basic_matrix<Real> xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
    V2L_REQUIRE(rows >= 1 && cols >= 1, PreconditionError, "xavier_init needs rows, cols >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    basic_matrix<Real> m(rows, cols);
    for (Real& x : m.flat()) x = static_cast<Real>(rng.uniform(-bound, bound));
    return m;
}

/// Global-norm clipping followed by p <- p - lr * (g + 2 * lambda * p) for decayed tensors.
template <class Real>
StepStats sgd_step(std::span<const NamedTensor<Real>> params, std::span<const NamedTensor<Real>> grads,
                   const OptimizerConfig& config) {
    config.validate();
    if (params.size() != grads.size())
        throw ShapeError("sgd_step: " + std::to_string(params.size()) + " parameter tensors but " +
                         std::to_string(grads.size()) + " gradient tensors");
    double total = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].value->same_shape(*grads[i].value))
            throw ShapeError("sgd_step: shape mismatch for tensor '" + params[i].name + "'");
        for (Real g : grads[i].value->flat()) total += static_cast<double>(g) * static_cast<double>(g);
    }
    StepStats stats;
    stats.grad_norm = std::sqrt(total);
    if (stats.grad_norm > config.clip_norm) stats.scale = config.clip_norm / stats.grad_norm;

    const double lr = config.learning_rate;
    const double two_lambda = 2.0 * config.l2_lambda;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].value->flat();
        auto g = grads[i].value->flat();
        const bool decay = params[i].decay && two_lambda != 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            double step = stats.scale * static_cast<double>(g[j]);
            if (decay) step += two_lambda * static_cast<double>(p[j]);
            p[j] = static_cast<Real>(static_cast<double>(p[j]) - lr * step);
        }
    }
    return stats;
}

/// Inverted-dropout mask: 0 with probability `rate`, otherwise 1/(1-rate).
/// Outside training the mask is all ones.
template <class Real>
std::vector<Real> dropout_mask(std::size_t length, double rate, Rng& rng, bool training = true) {
    V2L_REQUIRE(rate >= 0.0 && rate < 1.0, PreconditionError, "dropout rate must be in [0, 1)");
    std::vector<Real> mask(length, Real(1));
    if (!training || rate == 0.0) return mask;
    const Real keep = static_cast<Real>(1.0 / (1.0 - rate));
    for (Real& m : mask) m = rng.bernoulli(rate) ? Real(0) : keep;
    return mask;
}

/// Central-difference gradient of `loss` at `params`, in double precision.
std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                               std::span<const double> params, double eps = 1e-5);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6);

template <class Real>
std::size_t total_size(std::span<const NamedTensor<Real>> tensors) {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.value->size();
    return n;
}

template <class Real>
std::vector<double> flatten(std::span<const NamedTensor<Real>> tensors) {
    std::vector<double> out;
    out.reserve(total_size(tensors));
    for (const auto& t : tensors)
        for (Real x : t.value->flat()) out.push_back(static_cast<double>(x));
    return out;
}

template <class Real>
void unflatten(std::span<const double> flat, std::span<const NamedTensor<Real>> tensors) {
    V2L_REQUIRE(flat.size() == total_size(tensors), ShapeError, "unflatten: length mismatch");
    std::size_t k = 0;
    for (const auto& t : tensors)
        for (Real& x : t.value->flat()) x = static_cast<Real>(flat[k++]);
}

}  // namespace v2l::numeric
