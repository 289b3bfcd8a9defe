#ifndef DOCBIN_NN_KERNELS_HPP
#define DOCBIN_NN_KERNELS_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "docbin/core/image.hpp"
#include "docbin/nn/tensor.hpp"

// Raw tensor kernels behind the differentiable ops. All loops run in a fixed
// order so results are bit-reproducible on a given build. Matrix products are
// delegated to Eigen.
namespace docbin::nn::kernels {

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// C[MxN] += A[MxK] * B[KxN], all row-major.
inline void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c) {
    Eigen::Map<RowMatrix>(c, m, n).noalias() +=
        Eigen::Map<const RowMatrix>(a, m, k) * Eigen::Map<const RowMatrix>(b, k, n);
}

/// C[MxN] += A^T * B with A stored as [KxM].
inline void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c) {
    Eigen::Map<RowMatrix>(c, m, n).noalias() +=
        Eigen::Map<const RowMatrix>(a, k, m).transpose() * Eigen::Map<const RowMatrix>(b, k, n);
}

struct ConvGeometry {
    int c, h, w;      // input sample extents
    int k, stride;    // square kernel
    int ho, wo;       // output extents
    int rows() const { return c * k * k; }
    int cols() const { return ho * wo; }
};

inline ConvGeometry geometry(const Shape& x, int k, int stride) {
    if (x.h < k || x.w < k) {
        throw Error(ErrorCode::shape_mismatch, "conv input " + x.str() + " smaller than kernel " + std::to_string(k));
    }
    return {x.c, x.h, x.w, k, stride, (x.h - k) / stride + 1, (x.w - k) / stride + 1};
}

/// cols[(c*k+ki)*k+kj][oy*wo+ox] = x[c][oy*s+ki][ox*s+kj]
inline void im2col(const ConvGeometry& g, const double* x, double* cols) {
    for (int c = 0; c < g.c; ++c) {
        for (int ki = 0; ki < g.k; ++ki) {
            for (int kj = 0; kj < g.k; ++kj) {
                double* out = cols + static_cast<std::size_t>((c * g.k + ki) * g.k + kj) * g.cols();
                for (int oy = 0; oy < g.ho; ++oy) {
                    const double* src = x + (static_cast<std::size_t>(c) * g.h + oy * g.stride + ki) * g.w + kj;
                    if (g.stride == 1) {
                        std::copy(src, src + g.wo, out + static_cast<std::size_t>(oy) * g.wo);
                    } else {
                        for (int ox = 0; ox < g.wo; ++ox) out[oy * g.wo + ox] = src[ox * g.stride];
                    }
                }
            }
        }
    }
}

/// Transposed layout: colsT[oy*wo+ox][(c*k+ki)*k+kj].
inline void im2col_t(const ConvGeometry& g, const double* x, double* cols_t) {
    const int rows = g.rows();
    for (int oy = 0; oy < g.ho; ++oy) {
        for (int ox = 0; ox < g.wo; ++ox) {
            double* out = cols_t + static_cast<std::size_t>(oy * g.wo + ox) * rows;
            for (int c = 0; c < g.c; ++c) {
                for (int ki = 0; ki < g.k; ++ki) {
                    const double* src =
                        x + (static_cast<std::size_t>(c) * g.h + oy * g.stride + ki) * g.w + ox * g.stride;
                    for (int kj = 0; kj < g.k; ++kj) *out++ = src[kj];
                }
            }
        }
    }
}

inline void col2im(const ConvGeometry& g, const double* cols, double* x) {
    for (int c = 0; c < g.c; ++c) {
        for (int ki = 0; ki < g.k; ++ki) {
            for (int kj = 0; kj < g.k; ++kj) {
                const double* in = cols + static_cast<std::size_t>((c * g.k + ki) * g.k + kj) * g.cols();
                for (int oy = 0; oy < g.ho; ++oy) {
                    double* dst = x + (static_cast<std::size_t>(c) * g.h + oy * g.stride + ki) * g.w + kj;
                    for (int ox = 0; ox < g.wo; ++ox) dst[ox * g.stride] += in[oy * g.wo + ox];
                }
            }
        }
    }
}

}  // namespace detail

/// Valid (unpadded) strided cross-correlation. x: (N,C,H,W), w: (O,C,k,k).
inline Tensor conv_valid(const Tensor& x, const Tensor& w, int stride) {
    if (w.shape.c != x.shape.c || w.shape.h != w.shape.w) {
        throw Error(ErrorCode::shape_mismatch, "conv weight " + w.shape.str() + " incompatible with input " +
                                                   x.shape.str());
    }
    const auto g = detail::geometry(x.shape, w.shape.h, stride);
    const int o = w.shape.n;
    Tensor y(Shape{x.shape.n, o, g.ho, g.wo});
    std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
    for (int n = 0; n < x.shape.n; ++n) {
        const double* xs = x.data.data() + n * x.shape.sample_size();
        double* ys = y.data.data() + n * y.shape.sample_size();
        const double* b = xs;
        if (!(g.k == 1 && stride == 1)) {
            detail::im2col(g, xs, cols.data());
            b = cols.data();
        }
        detail::gemm_nn(o, g.cols(), g.rows(), w.data.data(), b, ys);
    }
    return y;
}

/// Adjoint of conv_valid in its input argument. grad: (N,O,Ho,Wo).
inline Tensor conv_input_grad(const Tensor& grad, const Tensor& w, int stride, const Shape& x_shape) {
    const auto g = detail::geometry(x_shape, w.shape.h, stride);
    require_shape(grad.shape, Shape{x_shape.n, w.shape.n, g.ho, g.wo}, "conv_input_grad");
    Tensor dx(x_shape);
    std::vector<double> cols(static_cast<std::size_t>(g.rows()) * g.cols());
    for (int n = 0; n < x_shape.n; ++n) {
        std::fill(cols.begin(), cols.end(), 0.0);
        detail::gemm_tn(g.rows(), g.cols(), w.shape.n, w.data.data(), grad.data.data() + n * grad.shape.sample_size(),
                        cols.data());
        detail::col2im(g, cols.data(), dx.data.data() + n * x_shape.sample_size());
    }
    return dx;
}

/// Adjoint of conv_valid in its weight argument.
inline Tensor conv_weight_grad(const Tensor& x, const Tensor& grad, int stride, const Shape& w_shape) {
    const auto g = detail::geometry(x.shape, w_shape.h, stride);
    require_shape(grad.shape, Shape{x.shape.n, w_shape.n, g.ho, g.wo}, "conv_weight_grad");
    Tensor dw(w_shape);
    std::vector<double> cols_t(static_cast<std::size_t>(g.rows()) * g.cols());
    for (int n = 0; n < x.shape.n; ++n) {
        detail::im2col_t(g, x.data.data() + n * x.shape.sample_size(), cols_t.data());
        detail::gemm_nn(w_shape.n, g.rows(), g.cols(), grad.data.data() + n * grad.shape.sample_size(), cols_t.data(),
                        dw.data.data());
    }
    return dw;
}

/// Symmetric (edge-repeating) padding of `p` pixels on all four sides.
inline Tensor reflect_pad(const Tensor& x, int p) {
    const Shape s = x.shape;
    Tensor y(Shape{s.n, s.c, s.h + 2 * p, s.w + 2 * p});
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int yy = 0; yy < y.shape.h; ++yy) {
                const int sy = reflect_index(yy - p, s.h);
                for (int xx = 0; xx < y.shape.w; ++xx) y.at(n, c, yy, xx) = x.at(n, c, sy, reflect_index(xx - p, s.w));
            }
        }
    }
    return y;
}

inline Tensor reflect_pad_adjoint(const Tensor& g, int p, const Shape& s) {
    require_shape(g.shape, Shape{s.n, s.c, s.h + 2 * p, s.w + 2 * p}, "reflect_pad_adjoint");
    Tensor x(s);
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int yy = 0; yy < g.shape.h; ++yy) {
                const int sy = reflect_index(yy - p, s.h);
                for (int xx = 0; xx < g.shape.w; ++xx) x.at(n, c, sy, reflect_index(xx - p, s.w)) += g.at(n, c, yy, xx);
            }
        }
    }
    return x;
}

inline Tensor upsample2(const Tensor& x) {
    const Shape s = x.shape;
    Tensor y(Shape{s.n, s.c, 2 * s.h, 2 * s.w});
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int yy = 0; yy < y.shape.h; ++yy) {
                for (int xx = 0; xx < y.shape.w; ++xx) y.at(n, c, yy, xx) = x.at(n, c, yy / 2, xx / 2);
            }
        }
    }
    return y;
}

inline Tensor sum_pool2(const Tensor& x) {
    const Shape s = x.shape;
    if (s.h % 2 || s.w % 2) throw Error(ErrorCode::shape_mismatch, "sum_pool2 needs even extents, got " + s.str());
    Tensor y(Shape{s.n, s.c, s.h / 2, s.w / 2});
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int yy = 0; yy < s.h; ++yy) {
                for (int xx = 0; xx < s.w; ++xx) y.at(n, c, yy / 2, xx / 2) += x.at(n, c, yy, xx);
            }
        }
    }
    return y;
}

}  // namespace docbin::nn::kernels

#endif  // DOCBIN_NN_KERNELS_HPP
