#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "v2l/error.hpp"

namespace v2l::numeric {

/// Dense row-major matrix. Column vectors (biases) are stored as n x 1.
template <class Real>
class basic_matrix {
public:
    using value_type = Real;

    basic_matrix() = default;
    basic_matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    basic_matrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        V2L_REQUIRE(data_.size() == rows_ * cols_, ShapeError, "matrix data length does not match rows*cols");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    Real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    Real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<Real> flat() noexcept { return data_; }
    std::span<const Real> flat() const noexcept { return data_; }
    std::span<Real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const Real> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    bool same_shape(const basic_matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

    template <class Other>
    basic_matrix<Other> cast() const {
        basic_matrix<Other> out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.flat()[i] = static_cast<Other>(data_[i]);
        return out;
    }

    bool operator==(const basic_matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

using Matrix = basic_matrix<float>;
using MatrixD = basic_matrix<double>;

template <class Real>
using Vec = std::vector<Real>;

inline std::string shape_string(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

/// y += M x, summed sequentially in row-major order.
template <class Real>
void gemv_add(const basic_matrix<Real>& m, std::span<const Real> x, std::span<Real> y) {
    if (x.size() != m.cols() || y.size() != m.rows())
        throw ShapeError("gemv: matrix " + shape_string(m.rows(), m.cols()) + " with x of length " +
                         std::to_string(x.size()) + " and y of length " + std::to_string(y.size()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const Real* row = m.row(r).data();
        Real acc = 0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

/// y += M^T x.
template <class Real>
void gemv_t_add(const basic_matrix<Real>& m, std::span<const Real> x, std::span<Real> y) {
    if (x.size() != m.rows() || y.size() != m.cols())
        throw ShapeError("gemv_t: matrix " + shape_string(m.rows(), m.cols()) + " with x of length " +
                         std::to_string(x.size()) + " and y of length " + std::to_string(y.size()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const Real* row = m.row(r).data();
        const Real xr = x[r];
        if (xr == Real(0)) continue;
        for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
    }
}

/// M += a b^T.
template <class Real>
void outer_add(basic_matrix<Real>& m, std::span<const Real> a, std::span<const Real> b) {
    if (a.size() != m.rows() || b.size() != m.cols())
        throw ShapeError("outer: matrix " + shape_string(m.rows(), m.cols()) + " with a of length " +
                         std::to_string(a.size()) + " and b of length " + std::to_string(b.size()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const Real ar = a[r];
        if (ar == Real(0)) continue;
        Real* row = m.row(r).data();
        for (std::size_t c = 0; c < m.cols(); ++c) row[c] += ar * b[c];
    }
}

/// out = column `col` of M (the embedding of a one-hot input).
template <class Real>
void column_add(const basic_matrix<Real>& m, std::size_t col, std::span<Real> out) {
    if (col >= m.cols() || out.size() != m.rows())
        throw ShapeError("column index " + std::to_string(col) + " out of range for " +
                         shape_string(m.rows(), m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] += m(r, col);
}

/// M[:, col] += v.
template <class Real>
void column_accumulate(basic_matrix<Real>& m, std::size_t col, std::span<const Real> v) {
    if (col >= m.cols() || v.size() != m.rows())
        throw ShapeError("column index " + std::to_string(col) + " out of range for " +
                         shape_string(m.rows(), m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, col) += v[r];
}

template <class Real>
Real squared_norm(std::span<const Real> v) {
    Real acc = 0;
    for (Real x : v) acc += x * x;
    return acc;
}

template <class Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
    V2L_REQUIRE(a.size() == b.size(), ShapeError, "dot: length mismatch");
    Real acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

template <class Real>
bool all_finite(std::span<const Real> v) {
    for (Real x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace v2l::numeric
