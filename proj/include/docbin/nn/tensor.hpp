#ifndef DOCBIN_NN_TENSOR_HPP
#define DOCBIN_NN_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "docbin/core/error.hpp"

namespace docbin::nn {

/// NCHW extents. Scalars are 1x1x1x1, per-sample values Nx1x1x1.
struct Shape {
    int n = 1;
    int c = 1;
    int h = 1;
    int w = 1;

    std::size_t numel() const { return static_cast<std::size_t>(n) * c * h * w; }
    std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
    std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }

    std::string str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + ")";
    }

    friend bool operator==(const Shape&, const Shape&) = default;
};

struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.numel(), fill) {
        if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
            throw Error(ErrorCode::shape_mismatch, "tensor extents must be positive, got " + s.str());
        }
    }
    Tensor(Shape s, std::vector<double> values) : shape(s), data(std::move(values)) {
        if (data.size() != s.numel()) {
            throw Error(ErrorCode::shape_mismatch, "tensor " + s.str() + " needs " + std::to_string(s.numel()) +
                                                       " values, got " + std::to_string(data.size()));
        }
    }

    static Tensor scalar(double v) { return Tensor(Shape{}, v); }

    std::size_t numel() const { return data.size(); }
    double item() const {
        if (data.size() != 1) throw Error(ErrorCode::shape_mismatch, "item() on tensor " + shape.str());
        return data[0];
    }

    double& at(int n, int c, int y, int x) {
        return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
    }
    double at(int n, int c, int y, int x) const {
        return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
    }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline void require_shape(const Shape& actual, const Shape& expected, const char* op) {
    if (!(actual == expected)) {
        throw Error(ErrorCode::shape_mismatch,
                    std::string(op) + ": expected " + expected.str() + ", got " + actual.str());
    }
}

}  // namespace docbin::nn

#endif  // DOCBIN_NN_TENSOR_HPP
