#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "v2l/error.hpp"
#include "v2l/numeric/optim.hpp"
#include "v2l/numeric/rng.hpp"

namespace v2l::lstm::detail {

/// Shared mini-batch SGD loop. `example_loss(index, grads, weight)` returns the
/// example's nll and accumulates its gradient scaled by `weight` into `grads`.
/// Returns the mean per-example loss of each epoch.
template <class Model, class ExampleLoss>
std::vector<double> sgd_epochs(Model& model, std::size_t num_examples, const numeric::OptimizerConfig& config,
                               numeric::Rng& rng, ExampleLoss&& example_loss) {
    config.validate();
    V2L_REQUIRE(num_examples > 0, PreconditionError, "training needs a non-empty dataset");
    std::vector<double> history;
    std::vector<std::size_t> order(num_examples);
    std::iota(order.begin(), order.end(), 0);
    auto grads = model.zeros_like();
    auto params = model.tensors();
    auto grad_tensors = grads.tensors();
    using Real = typename std::remove_pointer_t<decltype(params[0].value)>::value_type;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle<std::size_t>(order);
        double total = 0;
        for (std::size_t start = 0; start < num_examples; start += config.batch_size) {
            const std::size_t end = std::min(num_examples, start + config.batch_size);
            const double weight = 1.0 / static_cast<double>(end - start);
            for (auto& t : grad_tensors) t.value->fill(Real(0));
            for (std::size_t i = start; i < end; ++i) total += example_loss(order[i], grads, weight);
            numeric::sgd_step<Real>(params, grad_tensors, config);
        }
        history.push_back(total / static_cast<double>(num_examples));
    }
    return history;
}

}  // namespace v2l::lstm::detail
