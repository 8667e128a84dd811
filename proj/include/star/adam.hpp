#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "star/tensor.hpp"

namespace star {

/// Adam moment buffers for one fixed parameter list. The learning rate stays
/// constant across steps; step_count is incremented before bias correction.
template <typename T>
struct AdamState {
    T learning_rate = T(1e-3);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T epsilon = T(1e-8);
    std::int64_t step_count = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;

    static AdamState init(const std::vector<TensorPtr<T>>& params, T lr = T(1e-3),
                          T b1 = T(0.9), T b2 = T(0.999), T eps = T(1e-8)) {
        if (lr <= T(0)) throw ConfigError("adam: learning_rate must be > 0");
        if (b1 < T(0) || b1 >= T(1) || b2 < T(0) || b2 >= T(1)) {
            throw ConfigError("adam: betas must lie in [0, 1)");
        }
        AdamState st;
        st.learning_rate = lr;
        st.beta1 = b1;
        st.beta2 = b2;
        st.epsilon = eps;
        st.m.reserve(params.size());
        st.v.reserve(params.size());
        for (const auto& p : params) {
            st.m.emplace_back(p->data.size(), T(0));
            st.v.emplace_back(p->data.size(), T(0));
        }
        return st;
    }
};

/// One Adam update over `params` using the gradients in their grad slots.
/// Gradients are left untouched; callers reset them explicitly.
template <typename T>
void adam_step(const std::vector<TensorPtr<T>>& params, AdamState<T>& state) {
    if (params.size() != state.m.size()) {
        throw ContractError("adam_step: state initialized for " +
                            std::to_string(state.m.size()) + " parameters, got " +
                            std::to_string(params.size()));
    }
    ++state.step_count;
    const T corr1 = T(1) - std::pow(state.beta1, static_cast<T>(state.step_count));
    const T corr2 = T(1) - std::pow(state.beta2, static_cast<T>(state.step_count));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        p.ensure_grad();
        if (state.m[k].size() != p.data.size()) {
            throw ShapeError("adam_step: parameter " + std::to_string(k) +
                             " changed size since init");
        }
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const T g = p.grad[i];
            m[i] = state.beta1 * m[i] + (T(1) - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (T(1) - state.beta2) * g * g;
            const T m_hat = m[i] / corr1;
            const T v_hat = v[i] / corr2;
            p.data[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace star
