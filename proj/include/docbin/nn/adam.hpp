#ifndef DOCBIN_NN_ADAM_HPP
#define DOCBIN_NN_ADAM_HPP

#include <cmath>
#include <vector>

#include "docbin/nn/networks.hpp"

namespace docbin::nn {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;
};

/// One bias-corrected Adam update of every tensor in `params`.
inline void adam_step(NetParams& params, const std::vector<Tensor>& grads, AdamState& state, const AdamConfig& cfg = {}) {
    if (grads.size() != params.tensors.size()) {
        throw Error(ErrorCode::shape_mismatch, "adam_step: " + std::to_string(grads.size()) + " gradients for " +
                                                   std::to_string(params.tensors.size()) + " parameters");
    }
    if (state.m.empty()) {
        for (const auto& t : params.tensors) {
            state.m.emplace_back(t.shape, 0.0);
            state.v.emplace_back(t.shape, 0.0);
        }
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        Tensor& p = params.tensors[i];
        require_shape(grads[i].shape, p.shape, "adam_step");
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            const double g = grads[i].data[j];
            m.data[j] = cfg.beta1 * m.data[j] + (1.0 - cfg.beta1) * g;
            v.data[j] = cfg.beta2 * v.data[j] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m.data[j] / c1;
            const double vhat = v.data[j] / c2;
            p.data[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace docbin::nn

#endif  // DOCBIN_NN_ADAM_HPP
