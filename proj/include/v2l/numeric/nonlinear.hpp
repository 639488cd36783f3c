#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "v2l/error.hpp"

namespace v2l::numeric {

template <class Real>
Real sigmoid(Real x) {
    // Split on sign so exp never overflows.
    if (x >= Real(0)) {
        const Real z = std::exp(-x);
        return Real(1) / (Real(1) + z);
    }
    const Real z = std::exp(x);
    return z / (Real(1) + z);
}

template <class Real>
Real softplus(Real x) {
    // log(1 + e^x)
    if (x > Real(0)) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

template <class Real>
void sigmoid_inplace(std::span<Real> v) {
    for (Real& x : v) x = sigmoid(x);
}

template <class Real>
void tanh_inplace(std::span<Real> v) {
    for (Real& x : v) x = std::tanh(x);
}

/// Shift-stabilised softmax in place. Output sums to 1.
template <class Real>
void softmax_inplace(std::span<Real> v) {
    V2L_REQUIRE(!v.empty(), PreconditionError, "softmax of an empty vector");
    const Real peak = *std::max_element(v.begin(), v.end());
    Real total = 0;
    for (Real& x : v) {
        x = std::exp(x - peak);
        total += x;
    }
    for (Real& x : v) x /= total;
}

template <class Real>
std::vector<Real> softmax(std::span<const Real> v) {
    std::vector<Real> out(v.begin(), v.end());
    softmax_inplace<Real>(out);
    return out;
}

/// log(softmax(v)) computed without forming tiny probabilities.
template <class Real>
std::vector<Real> log_softmax(std::span<const Real> v) {
    V2L_REQUIRE(!v.empty(), PreconditionError, "log_softmax of an empty vector");
    const Real peak = *std::max_element(v.begin(), v.end());
    Real total = 0;
    for (Real x : v) total += std::exp(x - peak);
    const Real log_norm = peak + std::log(total);
    std::vector<Real> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - log_norm;
    return out;
}

}  // namespace v2l::numeric
