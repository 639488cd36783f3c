#include "v2l/numeric/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace v2l::numeric {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw PreconditionError("learning_rate must be > 0");
    if (!(clip_norm > 0.0)) throw PreconditionError("clip_norm must be > 0");
    if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
    if (!(l2_lambda >= 0.0)) throw PreconditionError("l2_lambda must be >= 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw PreconditionError("dropout_rate must be in [0, 1)");
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                               std::span<const double> params, double eps) {
    V2L_REQUIRE(eps > 0.0, PreconditionError, "finite difference step must be > 0");
    std::vector<double> point(params.begin(), params.end());
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + eps;
        const double up = loss(point);
        point[i] = saved - eps;
        const double down = loss(point);
        point[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw Error("finite difference: non-finite loss at coordinate " + std::to_string(i));
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
    V2L_REQUIRE(a.size() == b.size(), ShapeError, "max_relative_error: length mismatch");
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace v2l::numeric
