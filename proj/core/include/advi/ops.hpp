#pragma once

#include <vector>

#include "advi/tensor.hpp"

// Forward/backward passes for the layer vocabulary used by the models and the
// white-box attacks. Every function is pure: no shared state, identical
// inputs give identical bits. Frozen conventions:
//   - convolution is cross-correlation (no kernel flip), zero padding
//   - relu subgradient at exactly 0 is 0
//   - maxpool ties route the gradient to the first (row-major) occurrence
namespace advi::ops {

// (extent + 2*pad - k) / stride + 1; throws GeometryError unless it is a
// positive integer.
int64_t conv_out_extent(int64_t extent, int64_t k, int stride, int pad);

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& kernel,
                          const TensorT<T>& bias, int stride, int pad);

template <typename T>
struct Conv2dGrads {
    TensorT<T> input;
    TensorT<T> kernel;
    TensorT<T> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const TensorT<T>& input, const TensorT<T>& kernel,
                               const TensorT<T>& grad_out, int stride, int pad);

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& input);

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& input, const TensorT<T>& grad_out);

template <typename T>
TensorT<T> dense_forward(const TensorT<T>& input, const TensorT<T>& weight,
                         const TensorT<T>& bias);

template <typename T>
struct DenseGrads {
    TensorT<T> input;
    TensorT<T> weight;
    TensorT<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const TensorT<T>& input, const TensorT<T>& weight,
                             const TensorT<T>& grad_out);

// Requires the window to tile the input exactly: (extent - window) % stride == 0.
template <typename T>
TensorT<T> maxpool2d_forward(const TensorT<T>& input, int window, int stride);

template <typename T>
TensorT<T> maxpool2d_backward(const TensorT<T>& input, int window, int stride,
                              const TensorT<T>& grad_out);

template <typename T>
struct SoftmaxXentResult {
    double loss = 0.0;       // mean over the batch
    TensorT<T> grad_logits;  // (softmax - onehot) / batch
};

template <typename T>
SoftmaxXentResult<T> softmax_cross_entropy(const TensorT<T>& logits,
                                           const std::vector<int>& labels);

}  // namespace advi::ops
