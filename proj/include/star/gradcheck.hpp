#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "star/tensor.hpp"

namespace star {

/// Compare reverse-mode gradients against central finite differences.
///
/// `f` rebuilds the forward graph from the current parameter values and
/// returns the scalar loss node. Returns the worst per-element error
/// |g_ad - g_fd| / max(1, |g_ad|, |g_fd|). Meant to run in 64-bit mode:
/// float32 has no headroom for an h small enough to be meaningful.
template <typename F>
double finite_diff_check(F&& f, const std::vector<TensorPtr<double>>& params,
                         double h = 1e-5) {
    reset_grads(params);
    auto loss = f();
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p->grad);

    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double saved = p.data[i];
            p.data[i] = saved + h;
            const double up = f()->value();
            p.data[i] = saved - h;
            const double down = f()->value();
            p.data[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double ad = analytic[k][i];
            const double denom = std::max({1.0, std::abs(ad), std::abs(fd)});
            worst = std::max(worst, std::abs(ad - fd) / denom);
        }
    }
    return worst;
}

} // namespace star
