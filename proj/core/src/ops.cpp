#include "advi/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace advi::ops {

int64_t conv_out_extent(int64_t extent, int64_t k, int stride, int pad) {
    if (stride < 1) throw GeometryError("stride must be >= 1");
    if (pad < 0) throw GeometryError("pad must be >= 0");
    if (k < 1 || k > extent + 2 * pad)
        throw GeometryError("kernel extent " + std::to_string(k) + " does not fit input " +
                            std::to_string(extent) + " with pad " + std::to_string(pad));
    const int64_t span = extent + 2 * pad - k;
    if (span % stride != 0)
        throw GeometryError("conv output extent (" + std::to_string(extent) + "+2*" +
                            std::to_string(pad) + "-" + std::to_string(k) + ")/" +
                            std::to_string(stride) + "+1 is not an integer");
    return span / stride + 1;
}

namespace {

template <typename T>
void check_conv_args(const TensorT<T>& input, const TensorT<T>& kernel, const TensorT<T>* bias) {
    if (input.rank() != 4) throw ShapeError("conv2d input must be 4-D, got " + shape_str(input.shape));
    if (kernel.rank() != 4)
        throw ShapeError("conv2d kernel must be 4-D, got " + shape_str(kernel.shape));
    if (input.dim(1) != kernel.dim(1))
        throw ShapeError("conv2d channel mismatch: input Cin=" + std::to_string(input.dim(1)) +
                         ", kernel Cin=" + std::to_string(kernel.dim(1)));
    if (bias && (bias->rank() != 1 || bias->dim(0) != kernel.dim(0)))
        throw ShapeError("conv2d bias must have shape [" + std::to_string(kernel.dim(0)) + "]");
}

}  // namespace

// Loop order keeps each output element's accumulation sequence fixed at
// (ci, kh, kw) ascending while the innermost loop runs over output columns,
// which vectorizes without reassociation. The split-replay paths rely on this
// exact sequence for bit equality.
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& kernel,
                          const TensorT<T>& bias, int stride, int pad) {
    check_conv_args(input, kernel, &bias);
    const int64_t B = input.dim(0), Cin = input.dim(1), Hi = input.dim(2), Wi = input.dim(3);
    const int64_t Cout = kernel.dim(0), Kh = kernel.dim(2), Kw = kernel.dim(3);
    const int64_t Ho = conv_out_extent(Hi, Kh, stride, pad);
    const int64_t Wo = conv_out_extent(Wi, Kw, stride, pad);

    TensorT<T> out({B, Cout, Ho, Wo});
    const T* in = input.ptr();
    const T* ker = kernel.ptr();
    T* o = out.ptr();

    for (int64_t b = 0; b < B; ++b) {
        for (int64_t co = 0; co < Cout; ++co) {
            T* oc = o + (b * Cout + co) * Ho * Wo;
            const T bv = bias.data[static_cast<size_t>(co)];
            for (int64_t i = 0; i < Ho * Wo; ++i) oc[i] = bv;
            for (int64_t ci = 0; ci < Cin; ++ci) {
                const T* ic = in + (b * Cin + ci) * Hi * Wi;
                for (int64_t kh = 0; kh < Kh; ++kh) {
                    for (int64_t kw = 0; kw < Kw; ++kw) {
                        const T w = ker[((co * Cin + ci) * Kh + kh) * Kw + kw];
                        // output rows/cols whose sampled input position is in bounds
                        const int64_t wi0 = kw - pad;
                        const int64_t wo_lo = wi0 < 0 ? (-wi0 + stride - 1) / stride : 0;
                        const int64_t wo_hi =
                            Wi - 1 - wi0 >= 0 ? std::min(Wo - 1, (Wi - 1 - wi0) / stride) : -1;
                        if (wo_lo > wo_hi) continue;
                        for (int64_t ho = 0; ho < Ho; ++ho) {
                            const int64_t hi = ho * stride + kh - pad;
                            if (hi < 0 || hi >= Hi) continue;
                            T* orow = oc + ho * Wo;
                            const T* irow = ic + hi * Wi + wi0;
                            for (int64_t wo = wo_lo; wo <= wo_hi; ++wo)
                                orow[wo] += w * irow[wo * stride];
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const TensorT<T>& input, const TensorT<T>& kernel,
                               const TensorT<T>& grad_out, int stride, int pad) {
    check_conv_args<T>(input, kernel, nullptr);
    const int64_t B = input.dim(0), Cin = input.dim(1), Hi = input.dim(2), Wi = input.dim(3);
    const int64_t Cout = kernel.dim(0), Kh = kernel.dim(2), Kw = kernel.dim(3);
    const int64_t Ho = conv_out_extent(Hi, Kh, stride, pad);
    const int64_t Wo = conv_out_extent(Wi, Kw, stride, pad);
    if (grad_out.shape != Shape{B, Cout, Ho, Wo})
        throw ShapeError("conv2d grad_out shape " + shape_str(grad_out.shape) +
                         " does not match forward output [" + std::to_string(B) + "," +
                         std::to_string(Cout) + "," + std::to_string(Ho) + "," +
                         std::to_string(Wo) + "]");

    Conv2dGrads<T> g{TensorT<T>(input.shape), TensorT<T>(kernel.shape), TensorT<T>({Cout})};
    const T* in = input.ptr();
    const T* ker = kernel.ptr();
    const T* go = grad_out.ptr();

    for (int64_t b = 0; b < B; ++b) {
        for (int64_t co = 0; co < Cout; ++co) {
            const T* gc = go + (b * Cout + co) * Ho * Wo;
            T bias_acc = 0;
            for (int64_t i = 0; i < Ho * Wo; ++i) bias_acc += gc[i];
            g.bias.data[static_cast<size_t>(co)] += bias_acc;
            for (int64_t ci = 0; ci < Cin; ++ci) {
                const T* ic = in + (b * Cin + ci) * Hi * Wi;
                T* gic = g.input.ptr() + (b * Cin + ci) * Hi * Wi;
                for (int64_t kh = 0; kh < Kh; ++kh) {
                    for (int64_t kw = 0; kw < Kw; ++kw) {
                        const int64_t kidx = ((co * Cin + ci) * Kh + kh) * Kw + kw;
                        const T w = ker[kidx];
                        const int64_t wi0 = kw - pad;
                        const int64_t wo_lo = wi0 < 0 ? (-wi0 + stride - 1) / stride : 0;
                        const int64_t wo_hi =
                            Wi - 1 - wi0 >= 0 ? std::min(Wo - 1, (Wi - 1 - wi0) / stride) : -1;
                        if (wo_lo > wo_hi) continue;
                        T kacc = 0;
                        for (int64_t ho = 0; ho < Ho; ++ho) {
                            const int64_t hi = ho * stride + kh - pad;
                            if (hi < 0 || hi >= Hi) continue;
                            const T* grow = gc + ho * Wo;
                            const T* irow = ic + hi * Wi + wi0;
                            T* girow = gic + hi * Wi + wi0;
                            for (int64_t wo = wo_lo; wo <= wo_hi; ++wo) {
                                kacc += grow[wo] * irow[wo * stride];
                                girow[wo * stride] += w * grow[wo];
                            }
                        }
                        g.kernel.data[static_cast<size_t>(kidx)] += kacc;
                    }
                }
            }
        }
    }
    return g;
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& input) {
    TensorT<T> out = input;
    for (T& v : out.data) v = v > T(0) ? v : T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& input, const TensorT<T>& grad_out) {
    if (!input.same_shape(grad_out))
        throw ShapeError("relu grad_out shape " + shape_str(grad_out.shape) +
                         " != input shape " + shape_str(input.shape));
    TensorT<T> g(input.shape);
    for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = input.data[i] > T(0) ? grad_out.data[i] : T(0);
    return g;
}

template <typename T>
TensorT<T> dense_forward(const TensorT<T>& input, const TensorT<T>& weight,
                         const TensorT<T>& bias) {
    if (input.rank() != 2 || weight.rank() != 2)
        throw ShapeError("dense expects 2-D input and weight");
    const int64_t B = input.dim(0), F = input.dim(1), O = weight.dim(0);
    if (weight.dim(1) != F)
        throw ShapeError("dense feature mismatch: input F=" + std::to_string(F) +
                         ", weight F=" + std::to_string(weight.dim(1)));
    if (bias.rank() != 1 || bias.dim(0) != O)
        throw ShapeError("dense bias must have shape [" + std::to_string(O) + "]");

    TensorT<T> out({B, O});
    for (int64_t b = 0; b < B; ++b) {
        const T* ib = input.ptr() + b * F;
        for (int64_t o = 0; o < O; ++o) {
            const T* wrow = weight.ptr() + o * F;
            T acc = bias.data[static_cast<size_t>(o)];
            for (int64_t f = 0; f < F; ++f) acc += ib[f] * wrow[f];
            out.data[static_cast<size_t>(b * O + o)] = acc;
        }
    }
    return out;
}

template <typename T>
DenseGrads<T> dense_backward(const TensorT<T>& input, const TensorT<T>& weight,
                             const TensorT<T>& grad_out) {
    const int64_t B = input.dim(0), F = input.dim(1), O = weight.dim(0);
    if (grad_out.shape != Shape{B, O})
        throw ShapeError("dense grad_out shape " + shape_str(grad_out.shape) + " != [" +
                         std::to_string(B) + "," + std::to_string(O) + "]");

    DenseGrads<T> g{TensorT<T>(input.shape), TensorT<T>(weight.shape), TensorT<T>({O})};
    for (int64_t b = 0; b < B; ++b) {
        const T* ib = input.ptr() + b * F;
        const T* gb = grad_out.ptr() + b * O;
        T* gib = g.input.ptr() + b * F;
        for (int64_t o = 0; o < O; ++o) {
            const T go = gb[o];
            const T* wrow = weight.ptr() + o * F;
            T* gwrow = g.weight.ptr() + o * F;
            g.bias.data[static_cast<size_t>(o)] += go;
            for (int64_t f = 0; f < F; ++f) {
                gib[f] += go * wrow[f];
                gwrow[f] += go * ib[f];
            }
        }
    }
    return g;
}

template <typename T>
TensorT<T> maxpool2d_forward(const TensorT<T>& input, int window, int stride) {
    if (input.rank() != 4) throw ShapeError("maxpool2d input must be 4-D");
    const int64_t B = input.dim(0), C = input.dim(1), Hi = input.dim(2), Wi = input.dim(3);
    if (window < 1 || stride < 1) throw GeometryError("maxpool window and stride must be >= 1");
    if (window > Hi || window > Wi || (Hi - window) % stride != 0 || (Wi - window) % stride != 0)
        throw GeometryError("maxpool window " + std::to_string(window) + "/stride " +
                            std::to_string(stride) + " does not tile input " +
                            shape_str(input.shape));
    const int64_t Ho = (Hi - window) / stride + 1;
    const int64_t Wo = (Wi - window) / stride + 1;

    TensorT<T> out({B, C, Ho, Wo});
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const T* ic = input.ptr() + bc * Hi * Wi;
        T* oc = out.ptr() + bc * Ho * Wo;
        for (int64_t ho = 0; ho < Ho; ++ho)
            for (int64_t wo = 0; wo < Wo; ++wo) {
                T best = ic[(ho * stride) * Wi + wo * stride];
                for (int64_t kh = 0; kh < window; ++kh)
                    for (int64_t kw = 0; kw < window; ++kw) {
                        const T v = ic[(ho * stride + kh) * Wi + wo * stride + kw];
                        if (v > best) best = v;
                    }
                oc[ho * Wo + wo] = best;
            }
    }
    return out;
}

template <typename T>
TensorT<T> maxpool2d_backward(const TensorT<T>& input, int window, int stride,
                              const TensorT<T>& grad_out) {
    const int64_t B = input.dim(0), C = input.dim(1), Hi = input.dim(2), Wi = input.dim(3);
    const int64_t Ho = (Hi - window) / stride + 1;
    const int64_t Wo = (Wi - window) / stride + 1;
    if (grad_out.shape != Shape{B, C, Ho, Wo})
        throw ShapeError("maxpool grad_out shape " + shape_str(grad_out.shape) +
                         " does not match forward output");

    TensorT<T> g(input.shape);
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const T* ic = input.ptr() + bc * Hi * Wi;
        const T* gc = grad_out.ptr() + bc * Ho * Wo;
        T* gi = g.ptr() + bc * Hi * Wi;
        for (int64_t ho = 0; ho < Ho; ++ho)
            for (int64_t wo = 0; wo < Wo; ++wo) {
                // first occurrence in row-major window order wins on ties
                int64_t bh = ho * stride, bw = wo * stride;
                T best = ic[bh * Wi + bw];
                for (int64_t kh = 0; kh < window; ++kh)
                    for (int64_t kw = 0; kw < window; ++kw) {
                        const T v = ic[(ho * stride + kh) * Wi + wo * stride + kw];
                        if (v > best) {
                            best = v;
                            bh = ho * stride + kh;
                            bw = wo * stride + kw;
                        }
                    }
                gi[bh * Wi + bw] += gc[ho * Wo + wo];
            }
    }
    return g;
}

template <typename T>
SoftmaxXentResult<T> softmax_cross_entropy(const TensorT<T>& logits,
                                           const std::vector<int>& labels) {
    if (logits.rank() != 2) throw ShapeError("softmax_cross_entropy expects 2-D logits");
    const int64_t B = logits.dim(0), N = logits.dim(1);
    if (static_cast<int64_t>(labels.size()) != B)
        throw ShapeError("label count " + std::to_string(labels.size()) + " != batch " +
                         std::to_string(B));
    for (int y : labels)
        if (y < 0 || y >= N)
            throw ValueError("label " + std::to_string(y) + " out of range [0," +
                             std::to_string(N) + ")");

    SoftmaxXentResult<T> res;
    res.grad_logits = TensorT<T>({B, N});
    double loss_sum = 0.0;
    const T inv_b = T(1) / static_cast<T>(B);
    for (int64_t b = 0; b < B; ++b) {
        const T* z = logits.ptr() + b * N;
        T* g = res.grad_logits.ptr() + b * N;
        T m = z[0];
        for (int64_t i = 1; i < N; ++i) m = std::max(m, z[i]);
        double sum = 0.0;
        for (int64_t i = 0; i < N; ++i) sum += std::exp(static_cast<double>(z[i] - m));
        const int y = labels[static_cast<size_t>(b)];
        loss_sum += std::log(sum) - static_cast<double>(z[y] - m);
        for (int64_t i = 0; i < N; ++i) {
            const double p = std::exp(static_cast<double>(z[i] - m)) / sum;
            g[i] = static_cast<T>(p) * inv_b;
        }
        g[y] -= inv_b;
    }
    res.loss = loss_sum / static_cast<double>(B);
    return res;
}

#define ADVI_INSTANTIATE_OPS(T)                                                              \
    template TensorT<T> conv2d_forward<T>(const TensorT<T>&, const TensorT<T>&,             \
                                          const TensorT<T>&, int, int);                     \
    template Conv2dGrads<T> conv2d_backward<T>(const TensorT<T>&, const TensorT<T>&,        \
                                               const TensorT<T>&, int, int);                \
    template TensorT<T> relu_forward<T>(const TensorT<T>&);                                 \
    template TensorT<T> relu_backward<T>(const TensorT<T>&, const TensorT<T>&);             \
    template TensorT<T> dense_forward<T>(const TensorT<T>&, const TensorT<T>&,              \
                                         const TensorT<T>&);                                \
    template DenseGrads<T> dense_backward<T>(const TensorT<T>&, const TensorT<T>&,          \
                                             const TensorT<T>&);                            \
    template TensorT<T> maxpool2d_forward<T>(const TensorT<T>&, int, int);                  \
    template TensorT<T> maxpool2d_backward<T>(const TensorT<T>&, int, int,                  \
                                              const TensorT<T>&);                           \
    template SoftmaxXentResult<T> softmax_cross_entropy<T>(const TensorT<T>&,               \
                                                           const std::vector<int>&);

ADVI_INSTANTIATE_OPS(float)
ADVI_INSTANTIATE_OPS(double)

#undef ADVI_INSTANTIATE_OPS

}  // namespace advi::ops
