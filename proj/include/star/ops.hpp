#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "star/tensor.hpp"

namespace star {

namespace detail {

// C[m x n] += A[m x kk] * B[kk x n], row-major contiguous.
template <typename T>
void gemm_acc(const T* a, const T* b, T* c, std::int64_t m, std::int64_t kk,
              std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const T* arow = a + i * kk;
        T* crow = c + i * n;
        for (std::int64_t p = 0; p < kk; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m x kk] += A[m x n] * B[kk x n]^T (row-dot form).
template <typename T>
void gemm_abt_acc(const T* a, const T* b, T* c, std::int64_t m, std::int64_t n,
                  std::int64_t kk) {
    for (std::int64_t i = 0; i < m; ++i) {
        const T* arow = a + i * n;
        T* crow = c + i * kk;
        for (std::int64_t p = 0; p < kk; ++p) {
            const T* brow = b + p * n;
            T s = 0;
            for (std::int64_t j = 0; j < n; ++j) s += arow[j] * brow[j];
            crow[p] += s;
        }
    }
}

// C[kk x n] += A[m x kk]^T * B[m x n].
template <typename T>
void gemm_atb_acc(const T* a, const T* b, T* c, std::int64_t m, std::int64_t kk,
                  std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const T* arow = a + i * kk;
        const T* brow = b + i * n;
        for (std::int64_t p = 0; p < kk; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            T* crow = c + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// Unfold one C x H x W image into a (C*kh*kw) x (H*W) patch matrix for a
// stride-1 convolution with zero same-padding.
template <typename T>
void im2col_same(const T* x, std::int64_t c_in, std::int64_t h, std::int64_t w,
                 std::int64_t kh, std::int64_t kw, T* col) {
    const std::int64_t ph = (kh - 1) / 2;
    const std::int64_t pw = (kw - 1) / 2;
    std::int64_t row = 0;
    for (std::int64_t c = 0; c < c_in; ++c) {
        for (std::int64_t dh = 0; dh < kh; ++dh) {
            for (std::int64_t dw = 0; dw < kw; ++dw, ++row) {
                T* dst = col + row * h * w;
                const std::int64_t hoff = dh - ph;
                const std::int64_t woff = dw - pw;
                const std::int64_t w0 = std::max<std::int64_t>(0, -woff);
                const std::int64_t w1 = std::max(w0, std::min(w, w - woff));
                for (std::int64_t hi = 0; hi < h; ++hi) {
                    T* drow = dst + hi * w;
                    const std::int64_t hs = hi + hoff;
                    if (hs < 0 || hs >= h) {
                        std::fill(drow, drow + w, T(0));
                        continue;
                    }
                    const T* srow = x + (c * h + hs) * w;
                    std::fill(drow, drow + w0, T(0));
                    for (std::int64_t wi = w0; wi < w1; ++wi) drow[wi] = srow[wi + woff];
                    std::fill(drow + w1, drow + w, T(0));
                }
            }
        }
    }
}

// Fold a patch-matrix gradient back onto the C x H x W image (adds in place).
template <typename T>
void col2im_add_same(const T* col, std::int64_t c_in, std::int64_t h,
                     std::int64_t w, std::int64_t kh, std::int64_t kw, T* x) {
    const std::int64_t ph = (kh - 1) / 2;
    const std::int64_t pw = (kw - 1) / 2;
    std::int64_t row = 0;
    for (std::int64_t c = 0; c < c_in; ++c) {
        for (std::int64_t dh = 0; dh < kh; ++dh) {
            for (std::int64_t dw = 0; dw < kw; ++dw, ++row) {
                const T* src = col + row * h * w;
                const std::int64_t hoff = dh - ph;
                const std::int64_t woff = dw - pw;
                const std::int64_t w0 = std::max<std::int64_t>(0, -woff);
                const std::int64_t w1 = std::max(w0, std::min(w, w - woff));
                for (std::int64_t hi = 0; hi < h; ++hi) {
                    const std::int64_t hs = hi + hoff;
                    if (hs < 0 || hs >= h) continue;
                    const T* srow = src + hi * w;
                    T* drow = x + (c * h + hs) * w;
                    for (std::int64_t wi = w0; wi < w1; ++wi) drow[wi + woff] += srow[wi];
                }
            }
        }
    }
}

} // namespace detail

/// Kernel + bias of one convolution layer. k_h and k_w must be odd so the
/// zero padding of (k-1)/2 per side keeps spatial dimensions.
template <typename T>
struct ConvParams {
    TensorPtr<T> kernel; // out_channels x in_channels x k_h x k_w
    TensorPtr<T> bias;   // out_channels
    T l2_coeff = T(0);

    ConvParams() = default;
    ConvParams(TensorPtr<T> k, TensorPtr<T> b, T l2 = T(0))
        : kernel(std::move(k)), bias(std::move(b)), l2_coeff(l2) {
        if (kernel->shape.size() != 4) {
            throw ShapeError("conv kernel must be rank 4, got " + shape_str(kernel->shape));
        }
        if (kernel->shape[2] % 2 == 0 || kernel->shape[3] % 2 == 0) {
            throw ConfigError("conv kernel spatial axes must be odd for same padding, got " +
                              shape_str(kernel->shape));
        }
        if (bias->shape.size() != 1 || bias->shape[0] != kernel->shape[0]) {
            throw ShapeError("conv bias axis (" + shape_str(bias->shape) +
                             ") must match kernel out_channels axis (" +
                             std::to_string(kernel->shape[0]) + ")");
        }
        if (l2_coeff < T(0)) throw ConfigError("l2_coeff must be non-negative");
    }
};

/// Channel-summed 2D convolution with zero same-padding, stride 1.
/// Output spatial dims equal input spatial dims.
template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const TensorPtr<T>& kernel,
                    const TensorPtr<T>& bias) {
    if (input->shape.size() != 4) {
        throw ShapeError("conv2d input must be rank 4 (B x C x H x W), got " +
                         shape_str(input->shape));
    }
    if (kernel->shape.size() != 4) {
        throw ShapeError("conv2d kernel must be rank 4 (O x C x kh x kw), got " +
                         shape_str(kernel->shape));
    }
    const std::int64_t b = input->shape[0], c_in = input->shape[1];
    const std::int64_t h = input->shape[2], w = input->shape[3];
    const std::int64_t c_out = kernel->shape[0];
    const std::int64_t kh = kernel->shape[2], kw = kernel->shape[3];
    if (kernel->shape[1] != c_in) {
        throw ShapeError("conv2d: input channel axis (C=" + std::to_string(c_in) +
                         ") does not match kernel in_channels axis (" +
                         std::to_string(kernel->shape[1]) + ")");
    }
    if (kh % 2 == 0 || kw % 2 == 0) {
        throw ConfigError("conv2d requires odd kernel sizes, got " + shape_str(kernel->shape));
    }
    if (bias->shape.size() != 1 || bias->shape[0] != c_out) {
        throw ShapeError("conv2d: bias axis (" + shape_str(bias->shape) +
                         ") does not match kernel out_channels axis (" +
                         std::to_string(c_out) + ")");
    }

    const std::int64_t hw = h * w;
    const std::int64_t kk = c_in * kh * kw;
    const bool rg = input->requires_grad || kernel->requires_grad || bias->requires_grad;
    auto out = zeros<T>({b, c_out, h, w}, rg);
    out->op = "conv2d";
    out->parents = {input, kernel, bias};

    std::vector<T> col(static_cast<std::size_t>(kk * hw));
    for (std::int64_t n = 0; n < b; ++n) {
        detail::im2col_same(input->data.data() + n * c_in * hw, c_in, h, w, kh, kw,
                            col.data());
        T* y = out->data.data() + n * c_out * hw;
        for (std::int64_t co = 0; co < c_out; ++co) {
            std::fill(y + co * hw, y + (co + 1) * hw, bias->data[static_cast<std::size_t>(co)]);
        }
        detail::gemm_acc(kernel->data.data(), col.data(), y, c_out, kk, hw);
    }

    out->backprop = [input, kernel, bias, b, c_in, h, w, c_out, kh, kw](Tensor<T>& self) {
        const std::int64_t hw = h * w;
        const std::int64_t kk = c_in * kh * kw;
        if (bias->requires_grad) {
            for (std::int64_t n = 0; n < b; ++n) {
                const T* fl = self.flow.data() + n * c_out * hw;
                for (std::int64_t co = 0; co < c_out; ++co) {
                    T s = 0;
                    for (std::int64_t j = 0; j < hw; ++j) s += fl[co * hw + j];
                    bias->flow[static_cast<std::size_t>(co)] += s;
                }
            }
        }
        if (!kernel->requires_grad && !input->requires_grad) return;
        std::vector<T> col(static_cast<std::size_t>(kk * hw));
        std::vector<T> dcol;
        if (input->requires_grad) dcol.resize(static_cast<std::size_t>(kk * hw));
        for (std::int64_t n = 0; n < b; ++n) {
            const T* fl = self.flow.data() + n * c_out * hw;
            if (kernel->requires_grad) {
                detail::im2col_same(input->data.data() + n * c_in * hw, c_in, h, w, kh,
                                    kw, col.data());
                detail::gemm_abt_acc(fl, col.data(), kernel->flow.data(), c_out, hw, kk);
            }
            if (input->requires_grad) {
                std::fill(dcol.begin(), dcol.end(), T(0));
                detail::gemm_atb_acc(kernel->data.data(), fl, dcol.data(), c_out, kk, hw);
                detail::col2im_add_same(dcol.data(), c_in, h, w, kh, kw,
                                        input->flow.data() + n * c_in * hw);
            }
        }
    };
    return out;
}

template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const ConvParams<T>& params) {
    return conv2d(input, params.kernel, params.bias);
}

/// Affine map: input (B x D_in) * weight (D_out x D_in)^T + bias (D_out).
template <typename T>
TensorPtr<T> fully_connected(const TensorPtr<T>& input, const TensorPtr<T>& weight,
                             const TensorPtr<T>& bias) {
    if (input->shape.size() != 2 || weight->shape.size() != 2) {
        throw ShapeError("fully_connected expects input B x D_in and weight D_out x D_in, got " +
                         shape_str(input->shape) + " and " + shape_str(weight->shape));
    }
    const std::int64_t b = input->shape[0], d_in = input->shape[1];
    const std::int64_t d_out = weight->shape[0];
    if (weight->shape[1] != d_in) {
        throw ShapeError("fully_connected: input feature axis (D_in=" + std::to_string(d_in) +
                         ") does not match weight axis (" + std::to_string(weight->shape[1]) + ")");
    }
    if (bias->shape.size() != 1 || bias->shape[0] != d_out) {
        throw ShapeError("fully_connected: bias axis (" + shape_str(bias->shape) +
                         ") does not match weight D_out axis (" + std::to_string(d_out) + ")");
    }
    const bool rg = input->requires_grad || weight->requires_grad || bias->requires_grad;
    auto out = zeros<T>({b, d_out}, rg);
    out->op = "fc";
    out->parents = {input, weight, bias};
    for (std::int64_t n = 0; n < b; ++n) {
        const T* x = input->data.data() + n * d_in;
        T* y = out->data.data() + n * d_out;
        for (std::int64_t o = 0; o < d_out; ++o) {
            const T* wr = weight->data.data() + o * d_in;
            T s = bias->data[static_cast<std::size_t>(o)];
            for (std::int64_t i = 0; i < d_in; ++i) s += wr[i] * x[i];
            y[o] = s;
        }
    }
    out->backprop = [input, weight, bias, b, d_in, d_out](Tensor<T>& self) {
        for (std::int64_t n = 0; n < b; ++n) {
            const T* fl = self.flow.data() + n * d_out;
            if (bias->requires_grad) {
                for (std::int64_t o = 0; o < d_out; ++o) bias->flow[static_cast<std::size_t>(o)] += fl[o];
            }
            if (weight->requires_grad) {
                const T* x = input->data.data() + n * d_in;
                for (std::int64_t o = 0; o < d_out; ++o) {
                    T* wf = weight->flow.data() + o * d_in;
                    const T g = fl[o];
                    if (g == T(0)) continue;
                    for (std::int64_t i = 0; i < d_in; ++i) wf[i] += g * x[i];
                }
            }
            if (input->requires_grad) {
                T* xf = input->flow.data() + n * d_in;
                for (std::int64_t o = 0; o < d_out; ++o) {
                    const T g = fl[o];
                    if (g == T(0)) continue;
                    const T* wr = weight->data.data() + o * d_in;
                    for (std::int64_t i = 0; i < d_in; ++i) xf[i] += g * wr[i];
                }
            }
        }
    };
    return out;
}

enum class Activation { Relu, Tanh };

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& input) {
    auto out = zeros<T>(input->shape, input->requires_grad);
    out->op = "relu";
    out->parents = {input};
    for (std::size_t i = 0; i < input->data.size(); ++i) {
        out->data[i] = input->data[i] > T(0) ? input->data[i] : T(0);
    }
    out->backprop = [input](Tensor<T>& self) {
        if (!input->requires_grad) return;
        // subgradient at 0 is 0
        for (std::size_t i = 0; i < self.flow.size(); ++i) {
            if (input->data[i] > T(0)) input->flow[i] += self.flow[i];
        }
    };
    return out;
}

template <typename T>
TensorPtr<T> tanh_act(const TensorPtr<T>& input) {
    // Clamped into the open interval so saturated values stay strictly
    // inside (-1, 1) even after rounding.
    const T hi = std::nextafter(T(1), T(0));
    auto out = zeros<T>(input->shape, input->requires_grad);
    out->op = "tanh";
    out->parents = {input};
    for (std::size_t i = 0; i < input->data.size(); ++i) {
        out->data[i] = std::clamp(std::tanh(input->data[i]), -hi, hi);
    }
    out->backprop = [input](Tensor<T>& self) {
        if (!input->requires_grad) return;
        for (std::size_t i = 0; i < self.flow.size(); ++i) {
            const T y = self.data[i];
            input->flow[i] += (T(1) - y * y) * self.flow[i];
        }
    };
    return out;
}

template <typename T>
TensorPtr<T> activation(const TensorPtr<T>& input, Activation kind) {
    return kind == Activation::Relu ? relu(input) : tanh_act(input);
}

/// Concatenate along the channel axis: (B x C1 x H x W, B x C2 x H x W)
/// -> B x (C1+C2) x H x W, first input's channels first.
template <typename T>
TensorPtr<T> concat_channels(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    if (a->shape.size() != 4 || b->shape.size() != 4) {
        throw ShapeError("concat_channels expects rank-4 tensors, got " +
                         shape_str(a->shape) + " and " + shape_str(b->shape));
    }
    if (a->shape[0] != b->shape[0] || a->shape[2] != b->shape[2] ||
        a->shape[3] != b->shape[3]) {
        throw ShapeError("concat_channels: batch/spatial axes differ: " +
                         shape_str(a->shape) + " vs " + shape_str(b->shape));
    }
    const std::int64_t bsz = a->shape[0], c1 = a->shape[1], c2 = b->shape[1];
    const std::int64_t hw = a->shape[2] * a->shape[3];
    auto out = zeros<T>({bsz, c1 + c2, a->shape[2], a->shape[3]},
                        a->requires_grad || b->requires_grad);
    out->op = "concat";
    out->parents = {a, b};
    for (std::int64_t n = 0; n < bsz; ++n) {
        std::copy_n(a->data.data() + n * c1 * hw, c1 * hw,
                    out->data.data() + n * (c1 + c2) * hw);
        std::copy_n(b->data.data() + n * c2 * hw, c2 * hw,
                    out->data.data() + (n * (c1 + c2) + c1) * hw);
    }
    out->backprop = [a, b, bsz, c1, c2, hw](Tensor<T>& self) {
        for (std::int64_t n = 0; n < bsz; ++n) {
            const T* fl = self.flow.data() + n * (c1 + c2) * hw;
            if (a->requires_grad) {
                T* af = a->flow.data() + n * c1 * hw;
                for (std::int64_t i = 0; i < c1 * hw; ++i) af[i] += fl[i];
            }
            if (b->requires_grad) {
                T* bf = b->flow.data() + n * c2 * hw;
                for (std::int64_t i = 0; i < c2 * hw; ++i) bf[i] += fl[c1 * hw + i];
            }
        }
    };
    return out;
}

/// Elementwise sum of two same-shape tensors; gradient passes to both.
template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    if (a->shape != b->shape) {
        throw ShapeError("add: shapes differ: " + shape_str(a->shape) + " vs " +
                         shape_str(b->shape));
    }
    auto out = zeros<T>(a->shape, a->requires_grad || b->requires_grad);
    out->op = "add";
    out->parents = {a, b};
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
    out->backprop = [a, b](Tensor<T>& self) {
        for (std::size_t i = 0; i < self.flow.size(); ++i) {
            if (a->requires_grad) a->flow[i] += self.flow[i];
            if (b->requires_grad) b->flow[i] += self.flow[i];
        }
    };
    return out;
}

/// Shortcut connection: x + F(x).
template <typename T>
TensorPtr<T> residual_add(const TensorPtr<T>& x, const TensorPtr<T>& fx) {
    return add(x, fx);
}

/// Multiply by a compile-time constant (no gradient w.r.t. the constant).
template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& x, T factor) {
    auto out = zeros<T>(x->shape, x->requires_grad);
    out->op = "scale";
    out->parents = {x};
    for (std::size_t i = 0; i < x->data.size(); ++i) out->data[i] = x->data[i] * factor;
    out->backprop = [x, factor](Tensor<T>& self) {
        if (!x->requires_grad) return;
        for (std::size_t i = 0; i < self.flow.size(); ++i) x->flow[i] += factor * self.flow[i];
    };
    return out;
}

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& x) {
    T s = 0;
    for (const T v : x->data) s += v;
    auto out = make_tensor<T>({1}, {s}, x->requires_grad);
    out->op = "sum";
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
        if (!x->requires_grad) return;
        const T g = self.flow[0];
        for (std::size_t i = 0; i < x->flow.size(); ++i) x->flow[i] += g;
    };
    return out;
}

template <typename T>
TensorPtr<T> sum_squares(const TensorPtr<T>& x) {
    T s = 0;
    for (const T v : x->data) s += v * v;
    auto out = make_tensor<T>({1}, {s}, x->requires_grad);
    out->op = "sum_squares";
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
        if (!x->requires_grad) return;
        const T g = self.flow[0];
        for (std::size_t i = 0; i < x->flow.size(); ++i) {
            x->flow[i] += T(2) * x->data[i] * g;
        }
    };
    return out;
}

/// Mean of squared differences over all elements.
template <typename T>
TensorPtr<T> mse_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target) {
    if (pred->shape != target->shape) {
        throw ShapeError("mse_loss: shapes differ: " + shape_str(pred->shape) + " vs " +
                         shape_str(target->shape));
    }
    const T inv_n = T(1) / static_cast<T>(pred->data.size());
    T s = 0;
    for (std::size_t i = 0; i < pred->data.size(); ++i) {
        const T d = pred->data[i] - target->data[i];
        s += d * d;
    }
    auto out = make_tensor<T>({1}, {s * inv_n}, pred->requires_grad || target->requires_grad);
    out->op = "mse";
    out->parents = {pred, target};
    out->backprop = [pred, target, inv_n](Tensor<T>& self) {
        const T g = self.flow[0];
        for (std::size_t i = 0; i < pred->data.size(); ++i) {
            const T d = T(2) * (pred->data[i] - target->data[i]) * inv_n * g;
            if (pred->requires_grad) pred->flow[i] += d;
            if (target->requires_grad) target->flow[i] -= d;
        }
    };
    return out;
}

/// Same data, new shape (element count preserved).
template <typename T>
TensorPtr<T> reshape(const TensorPtr<T>& x, Shape new_shape) {
    if (numel(new_shape) != x->size()) {
        throw ShapeError("reshape: cannot view " + shape_str(x->shape) + " as " +
                         shape_str(new_shape));
    }
    auto out = make_tensor<T>(std::move(new_shape), x->data, x->requires_grad);
    out->op = "reshape";
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
        if (!x->requires_grad) return;
        for (std::size_t i = 0; i < self.flow.size(); ++i) x->flow[i] += self.flow[i];
    };
    return out;
}

} // namespace star
