#pragma once

#include <cstdint>
#include <vector>

#include "advi/error.hpp"

namespace advi {

using Shape = std::vector<int64_t>;

// Validates that every extent is >= 1 and returns the element count.
int64_t shape_numel(const Shape& shape);

std::string shape_str(const Shape& shape);

// Dense row-major n-dimensional array. The last axis varies fastest.
// float is the experiment precision; TensorT<double> is the verification mode
// used by the finite-difference oracles.
template <typename T>
struct TensorT {
    Shape shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(Shape s)
        : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), T(0)) {}

    TensorT(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (shape_numel(shape) != static_cast<int64_t>(data.size()))
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& at2(int64_t r, int64_t c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
    T at2(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }

    T& at4(int64_t b, int64_t c, int64_t h, int64_t w) {
        return data[static_cast<size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    T at4(int64_t b, int64_t c, int64_t h, int64_t w) const {
        return data[static_cast<size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }

    // Same storage reinterpreted under a new shape with equal element count.
    TensorT reshaped(Shape s) const {
        if (shape_numel(s) != numel())
            throw ShapeError("reshape " + shape_str(shape) + " -> " + shape_str(s) +
                             " changes element count");
        return TensorT(std::move(s), data);
    }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.assign(data.begin(), data.end());
        return out;
    }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace advi
