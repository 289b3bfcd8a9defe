#ifndef DOCBIN_NN_AUTOGRAD_HPP
#define DOCBIN_NN_AUTOGRAD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "docbin/nn/kernels.hpp"
#include "docbin/nn/tensor.hpp"

namespace docbin::nn {

class Tape;

/// Handle to a node on a Tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape; }
    bool requires_grad() const;
};

/// Computes the gradients flowing into a node's inputs. `self` is the node,
/// `grad` the gradient of the result with respect to it, `need[i]` whether
/// input i needs a gradient at all. Entries left invalid are treated as zero.
using BackwardFn = std::function<std::vector<Var>(Tape&, Var self, Var grad, const std::vector<bool>& need)>;

/// Ordered record of primitive operations. Nodes are appended in
/// evaluation order, so the node list is always topologically sorted.
/// Backward passes are themselves built out of recorded primitives; with
/// `create_graph` the gradient graph lands on the same tape and can be
/// differentiated again.
class Tape {
public:
    struct Node {
        std::string op;
        Tensor value;
        bool requires_grad = false;
        std::vector<int> inputs;
        BackwardFn backward;
    };

    Var leaf(Tensor value, bool requires_grad = false, std::string name = "leaf") {
        if (!value.all_finite()) throw Error(ErrorCode::invalid_argument, "non-finite value in " + name);
        nodes_.push_back(Node{std::move(name), std::move(value), requires_grad, {}, {}});
        return Var{this, static_cast<int>(nodes_.size()) - 1};
    }

    Var constant(Tensor value) { return leaf(std::move(value), false, "const"); }

    /// Appends an operation result. The backward function is kept only if
    /// recording is on and some input carries a gradient.
    Var record(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
        bool rg = false;
        std::vector<int> ids;
        ids.reserve(inputs.size());
        for (const Var& v : inputs) {
            if (v.tape != this) throw Error(ErrorCode::invalid_argument, op + ": input from another tape");
            ids.push_back(v.id);
            rg = rg || nodes_[v.id].requires_grad;
        }
        rg = rg && recording_;
        nodes_.push_back(Node{std::move(op), std::move(value), rg, rg ? std::move(ids) : std::vector<int>{},
                              rg ? std::move(backward) : BackwardFn{}});
        return Var{this, static_cast<int>(nodes_.size()) - 1};
    }

    const Tensor& value(int id) const { return nodes_.at(id).value; }
    const Node& node(int id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }
    bool recording() const { return recording_; }

    /// Reverse-mode gradients of scalar `result` with respect to `wrt`.
    /// With `create_graph` the returned gradients are themselves recorded
    /// and differentiable; otherwise they are constants.
    std::vector<Var> grad(Var result, std::span<const Var> wrt, bool create_graph = false) {
        if (result.tape != this) throw Error(ErrorCode::invalid_argument, "grad: result from another tape");
        if (nodes_[result.id].value.numel() != 1) {
            throw Error(ErrorCode::shape_mismatch,
                        "grad needs a scalar result, got " + nodes_[result.id].value.shape.str());
        }
        const int top = result.id;
        // A node needs a gradient if it is a target or depends on one.
        std::vector<bool> need(static_cast<std::size_t>(top) + 1, false);
        for (const Var& w : wrt) {
            if (w.tape != this) throw Error(ErrorCode::invalid_argument, "grad: target from another tape");
            if (w.id <= top && nodes_[w.id].requires_grad) need[w.id] = true;
        }
        for (int i = 0; i <= top; ++i) {
            if (need[i] || !nodes_[i].requires_grad) continue;
            for (int in : nodes_[i].inputs) {
                if (need[in]) {
                    need[i] = true;
                    break;
                }
            }
        }

        const bool saved = recording_;
        recording_ = create_graph;
        std::vector<Var> grads(static_cast<std::size_t>(top) + 1);
        if (need[top]) grads[top] = constant(Tensor(nodes_[top].value.shape, 1.0));
        for (int i = top; i >= 0; --i) {
            if (!need[i] || !grads[i].valid() || !nodes_[i].backward) continue;
            // Copies: the node list may grow (and reallocate) while the
            // backward function records new operations.
            const std::vector<int> inputs = nodes_[i].inputs;
            const BackwardFn fn = nodes_[i].backward;
            std::vector<bool> in_need(inputs.size());
            bool any = false;
            for (std::size_t j = 0; j < inputs.size(); ++j) {
                in_need[j] = need[inputs[j]];
                any = any || in_need[j];
            }
            if (!any) continue;
            std::vector<Var> in_grads = fn(*this, Var{this, i}, grads[i], in_need);
            for (std::size_t j = 0; j < inputs.size(); ++j) {
                if (!in_need[j] || j >= in_grads.size() || !in_grads[j].valid()) continue;
                Var& acc = grads[inputs[j]];
                acc = acc.valid() ? accumulate(acc, in_grads[j]) : in_grads[j];
            }
        }
        recording_ = saved;

        std::vector<Var> out;
        out.reserve(wrt.size());
        for (const Var& w : wrt) {
            if (w.id <= top && grads[w.id].valid()) {
                out.push_back(grads[w.id]);
            } else {
                out.push_back(constant(Tensor(nodes_[w.id].value.shape, 0.0)));
            }
        }
        return out;
    }

private:
    Var accumulate(Var a, Var b);

    std::vector<Node> nodes_;
    bool recording_ = true;
};

inline const Tensor& Var::value() const { return tape->value(id); }
inline bool Var::requires_grad() const { return tape->node(id).requires_grad; }

// ---------------------------------------------------------------------------
// Differentiable primitives. Every backward is expressed with these same
// primitives, which is what makes double backward work.

namespace ops {

inline Var add(Var a, Var b);
inline Var scale(Var a, double s);
inline Var mul(Var a, Var b);
inline Var mul_const(Var a, std::shared_ptr<const Tensor> m);
inline Var conv_valid(Var x, Var w, int stride);
inline Var conv_input_grad(Var g, Var w, int stride, Shape x_shape);
inline Var conv_weight_grad(Var x, Var g, int stride, Shape w_shape);
inline Var reflect_pad(Var x, int p);
inline Var reflect_pad_adjoint(Var g, int p, Shape x_shape);
inline Var broadcast_channel(Var b, Shape shape);
inline Var channel_sum(Var a);
inline Var upsample2(Var a);
inline Var sum_pool2(Var a);
inline Var slice_channels(Var a, int start, int count);
inline Var embed_channels(Var a, int start, int total);
inline Var sample_sum(Var a);
inline Var broadcast_sample(Var a, Shape shape);
inline Var sum_all(Var a);
inline Var broadcast_all(Var a, Shape shape);
inline Var reciprocal(Var a);

namespace detail {
template <class F>
Tensor map(const Tensor& a, F f) {
    Tensor y(a.shape);
    for (std::size_t i = 0; i < a.numel(); ++i) y.data[i] = f(a.data[i]);
    return y;
}
template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F f, const char* op) {
    require_shape(b.shape, a.shape, op);
    Tensor y(a.shape);
    for (std::size_t i = 0; i < a.numel(); ++i) y.data[i] = f(a.data[i], b.data[i]);
    return y;
}
}  // namespace detail

inline Var add(Var a, Var b) {
    Tensor y = detail::zip(a.value(), b.value(), [](double u, double v) { return u + v; }, "add");
    return a.tape->record("add", std::move(y), {a, b},
                          [](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{g, g}; });
}

inline Var scale(Var a, double s) {
    Tensor y = detail::map(a.value(), [s](double u) { return u * s; });
    return a.tape->record("scale", std::move(y), {a},
                          [s](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{scale(g, s)}; });
}

inline Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

inline Var add_scalar(Var a, double s) {
    Tensor y = detail::map(a.value(), [s](double u) { return u + s; });
    return a.tape->record("add_scalar", std::move(y), {a},
                          [](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{g}; });
}

inline Var mul(Var a, Var b) {
    Tensor y = detail::zip(a.value(), b.value(), [](double u, double v) { return u * v; }, "mul");
    return a.tape->record("mul", std::move(y), {a, b}, [a, b](Tape&, Var, Var g, const std::vector<bool>& need) {
        return std::vector<Var>{need[0] ? mul(g, b) : Var{}, need[1] ? mul(g, a) : Var{}};
    });
}

/// Multiplication by a constant tensor of the same shape.
inline Var mul_const(Var a, std::shared_ptr<const Tensor> m) {
    Tensor y = detail::zip(a.value(), *m, [](double u, double v) { return u * v; }, "mul_const");
    return a.tape->record("mul_const", std::move(y), {a}, [m](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{mul_const(g, m)};
    });
}

inline Var mul_const(Var a, const Tensor& m) { return mul_const(a, std::make_shared<const Tensor>(m)); }

/// max(x, 0) + slope * min(x, 0). The local slope is treated as constant,
/// so second derivatives through the activation vanish (as they do a.e.).
inline Var leaky_relu(Var a, double slope = 0.2) {
    auto mask = std::make_shared<Tensor>(a.shape());
    Tensor y(a.shape());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < x.numel(); ++i) {
        mask->data[i] = x.data[i] > 0.0 ? 1.0 : slope;
        y.data[i] = x.data[i] * mask->data[i];
    }
    std::shared_ptr<const Tensor> m = mask;
    return a.tape->record("leaky_relu", std::move(y), {a}, [m](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{mul_const(g, m)};
    });
}

inline Var sigmoid(Var a) {
    Tensor y = detail::map(a.value(), [](double u) {
        return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    });
    return a.tape->record("sigmoid", std::move(y), {a}, [](Tape&, Var self, Var g, const std::vector<bool>&) {
        // dy/dx = y - y^2
        return std::vector<Var>{mul(g, sub(self, mul(self, self)))};
    });
}

/// 1/x with 1/0 defined as 0.
inline Var reciprocal(Var a) {
    Tensor y = detail::map(a.value(), [](double u) { return u == 0.0 ? 0.0 : 1.0 / u; });
    return a.tape->record("reciprocal", std::move(y), {a}, [](Tape&, Var self, Var g, const std::vector<bool>&) {
        return std::vector<Var>{scale(mul(g, mul(self, self)), -1.0)};
    });
}

inline Var log(Var a) {
    const Tensor& x = a.value();
    for (double u : x.data) {
        if (!(u > 0.0)) throw Error(ErrorCode::invalid_argument, "log of non-positive value");
    }
    Tensor y = detail::map(x, [](double u) { return std::log(u); });
    return a.tape->record("log", std::move(y), {a}, [a](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{mul(g, reciprocal(a))};
    });
}

/// Square root; the derivative at 0 is taken as 0.
inline Var sqrt(Var a) {
    const Tensor& x = a.value();
    for (double u : x.data) {
        if (u < 0.0) throw Error(ErrorCode::invalid_argument, "sqrt of negative value");
    }
    Tensor y = detail::map(x, [](double u) { return std::sqrt(u); });
    return a.tape->record("sqrt", std::move(y), {a}, [](Tape&, Var self, Var g, const std::vector<bool>&) {
        return std::vector<Var>{scale(mul(g, reciprocal(self)), 0.5)};
    });
}

inline Var clamp(Var a, double lo, double hi) {
    auto mask = std::make_shared<Tensor>(a.shape());
    Tensor y(a.shape());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < x.numel(); ++i) {
        y.data[i] = std::clamp(x.data[i], lo, hi);
        mask->data[i] = (x.data[i] >= lo && x.data[i] <= hi) ? 1.0 : 0.0;
    }
    std::shared_ptr<const Tensor> m = mask;
    return a.tape->record("clamp", std::move(y), {a}, [m](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{mul_const(g, m)};
    });
}

// Convolution: conv_valid and its two adjoints are closed under differentiation.

inline Var conv_valid(Var x, Var w, int stride) {
    Tensor y = kernels::conv_valid(x.value(), w.value(), stride);
    return x.tape->record("conv", std::move(y), {x, w}, [x, w, stride](Tape&, Var, Var g, const std::vector<bool>& need) {
        return std::vector<Var>{need[0] ? conv_input_grad(g, w, stride, x.shape()) : Var{},
                                need[1] ? conv_weight_grad(x, g, stride, w.shape()) : Var{}};
    });
}

inline Var conv_input_grad(Var g0, Var w, int stride, Shape x_shape) {
    Tensor y = kernels::conv_input_grad(g0.value(), w.value(), stride, x_shape);
    return g0.tape->record("conv_input_grad", std::move(y), {g0, w},
                           [g0, w, stride](Tape&, Var, Var h, const std::vector<bool>& need) {
                               return std::vector<Var>{need[0] ? conv_valid(h, w, stride) : Var{},
                                                       need[1] ? conv_weight_grad(h, g0, stride, w.shape()) : Var{}};
                           });
}

inline Var conv_weight_grad(Var x, Var g0, int stride, Shape w_shape) {
    Tensor y = kernels::conv_weight_grad(x.value(), g0.value(), stride, w_shape);
    return x.tape->record("conv_weight_grad", std::move(y), {x, g0},
                          [x, g0, stride](Tape&, Var, Var k, const std::vector<bool>& need) {
                              return std::vector<Var>{need[0] ? conv_input_grad(g0, k, stride, x.shape()) : Var{},
                                                      need[1] ? conv_valid(x, k, stride) : Var{}};
                          });
}

inline Var reflect_pad(Var x, int p) {
    if (p == 0) return x;
    Tensor y = kernels::reflect_pad(x.value(), p);
    const Shape s = x.shape();
    return x.tape->record("reflect_pad", std::move(y), {x}, [p, s](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{reflect_pad_adjoint(g, p, s)};
    });
}

inline Var reflect_pad_adjoint(Var g0, int p, Shape x_shape) {
    Tensor y = kernels::reflect_pad_adjoint(g0.value(), p, x_shape);
    return g0.tape->record("reflect_pad_adjoint", std::move(y), {g0}, [p](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{reflect_pad(g, p)};
    });
}

/// (1,C,1,1) -> shape, repeating each channel value.
inline Var broadcast_channel(Var b, Shape shape) {
    require_shape(b.shape(), Shape{1, shape.c, 1, 1}, "broadcast_channel");
    Tensor y(shape);
    const std::size_t plane = shape.plane_size();
    for (int n = 0; n < shape.n; ++n) {
        for (int c = 0; c < shape.c; ++c) {
            double* dst = y.data.data() + (static_cast<std::size_t>(n) * shape.c + c) * plane;
            std::fill(dst, dst + plane, b.value().data[c]);
        }
    }
    return b.tape->record("broadcast_channel", std::move(y), {b}, [](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{channel_sum(g)};
    });
}

inline Var channel_sum(Var a) {
    const Shape s = a.shape();
    Tensor y(Shape{1, s.c, 1, 1});
    const std::size_t plane = s.plane_size();
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const double* src = a.value().data.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += src[i];
            y.data[c] += acc;
        }
    }
    return a.tape->record("channel_sum", std::move(y), {a}, [s](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{broadcast_channel(g, s)};
    });
}

inline Var upsample2(Var a) {
    return a.tape->record("upsample2", kernels::upsample2(a.value()), {a},
                          [](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{sum_pool2(g)}; });
}

inline Var sum_pool2(Var a) {
    return a.tape->record("sum_pool2", kernels::sum_pool2(a.value()), {a},
                          [](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{upsample2(g)}; });
}

inline Var slice_channels(Var a, int start, int count) {
    const Shape s = a.shape();
    if (start < 0 || count < 1 || start + count > s.c) {
        throw Error(ErrorCode::shape_mismatch, "slice_channels out of range for " + s.str());
    }
    Tensor y(Shape{s.n, count, s.h, s.w});
    const std::size_t plane = s.plane_size();
    for (int n = 0; n < s.n; ++n) {
        const double* src = a.value().data.data() + (static_cast<std::size_t>(n) * s.c + start) * plane;
        std::copy(src, src + count * plane, y.data.data() + static_cast<std::size_t>(n) * count * plane);
    }
    return a.tape->record("slice_channels", std::move(y), {a}, [start, s](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{embed_channels(g, start, s.c)};
    });
}

/// Places `a` at channel offset `start` of a zero tensor with `total` channels.
inline Var embed_channels(Var a, int start, int total) {
    const Shape s = a.shape();
    if (start < 0 || start + s.c > total) throw Error(ErrorCode::shape_mismatch, "embed_channels out of range");
    Tensor y(Shape{s.n, total, s.h, s.w});
    const std::size_t plane = s.plane_size();
    for (int n = 0; n < s.n; ++n) {
        const double* src = a.value().data.data() + static_cast<std::size_t>(n) * s.c * plane;
        std::copy(src, src + s.c * plane, y.data.data() + (static_cast<std::size_t>(n) * total + start) * plane);
    }
    const int count = s.c;
    return a.tape->record("embed_channels", std::move(y), {a}, [start, count](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{slice_channels(g, start, count)};
    });
}

inline Var concat_channels(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error(ErrorCode::shape_mismatch, "concat of nothing");
    const Shape s0 = parts[0].shape();
    int total = 0;
    for (const Var& p : parts) {
        const Shape s = p.shape();
        if (s.n != s0.n || s.h != s0.h || s.w != s0.w) {
            throw Error(ErrorCode::shape_mismatch, "concat_channels: " + s.str() + " vs " + s0.str());
        }
        total += s.c;
    }
    Tensor y(Shape{s0.n, total, s0.h, s0.w});
    const std::size_t plane = s0.plane_size();
    std::vector<int> offsets;
    int off = 0;
    for (const Var& p : parts) {
        offsets.push_back(off);
        const int c = p.shape().c;
        for (int n = 0; n < s0.n; ++n) {
            const double* src = p.value().data.data() + static_cast<std::size_t>(n) * c * plane;
            std::copy(src, src + c * plane, y.data.data() + (static_cast<std::size_t>(n) * total + off) * plane);
        }
        off += c;
    }
    std::vector<int> counts;
    for (const Var& p : parts) counts.push_back(p.shape().c);
    return parts[0].tape->record("concat_channels", std::move(y), parts,
                                 [offsets, counts](Tape&, Var, Var g, const std::vector<bool>& need) {
                                     std::vector<Var> out(offsets.size());
                                     for (std::size_t i = 0; i < offsets.size(); ++i) {
                                         if (need[i]) out[i] = slice_channels(g, offsets[i], counts[i]);
                                     }
                                     return out;
                                 });
}

/// Per-sample sum: (N,C,H,W) -> (N,1,1,1).
inline Var sample_sum(Var a) {
    const Shape s = a.shape();
    Tensor y(Shape{s.n, 1, 1, 1});
    const std::size_t m = s.sample_size();
    for (int n = 0; n < s.n; ++n) {
        const double* src = a.value().data.data() + n * m;
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += src[i];
        y.data[n] = acc;
    }
    return a.tape->record("sample_sum", std::move(y), {a}, [s](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{broadcast_sample(g, s)};
    });
}

inline Var broadcast_sample(Var a, Shape shape) {
    require_shape(a.shape(), Shape{shape.n, 1, 1, 1}, "broadcast_sample");
    Tensor y(shape);
    const std::size_t m = shape.sample_size();
    for (int n = 0; n < shape.n; ++n) std::fill(y.data.begin() + n * m, y.data.begin() + (n + 1) * m, a.value().data[n]);
    return a.tape->record("broadcast_sample", std::move(y), {a}, [](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{sample_sum(g)};
    });
}

inline Var sum_all(Var a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    const Shape s = a.shape();
    return a.tape->record("sum_all", Tensor::scalar(acc), {a}, [s](Tape&, Var, Var g, const std::vector<bool>&) {
        return std::vector<Var>{broadcast_all(g, s)};
    });
}

inline Var broadcast_all(Var a, Shape shape) {
    require_shape(a.shape(), Shape{}, "broadcast_all");
    return a.tape->record("broadcast_all", Tensor(shape, a.value().item()), {a},
                          [](Tape&, Var, Var g, const std::vector<bool>&) { return std::vector<Var>{sum_all(g)}; });
}

// Composites.

inline Var mean_all(Var a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().numel())); }

/// Per-sample mean over channels and pixels: (N,C,H,W) -> (N,1,1,1).
inline Var global_mean(Var a) { return scale(sample_sum(a), 1.0 / static_cast<double>(a.shape().sample_size())); }

inline Var square(Var a) { return mul(a, a); }

/// Reflect-padded strided convolution with per-channel bias.
inline Var conv2d(Var x, Var w, Var b, int stride, int pad) {
    Var y = conv_valid(reflect_pad(x, pad), w, stride);
    return add(y, broadcast_channel(b, y.shape()));
}

inline Var replicate_channels(Var a, int times) { return concat_channels(std::vector<Var>(times, a)); }

}  // namespace ops

inline Var Tape::accumulate(Var a, Var b) { return ops::add(a, b); }

}  // namespace docbin::nn

#endif  // DOCBIN_NN_AUTOGRAD_HPP
