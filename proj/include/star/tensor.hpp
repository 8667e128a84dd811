#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "star/errors.hpp"

namespace star {

using Shape = std::vector<std::int64_t>;

inline std::int64_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                           std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

template <typename T>
struct Tensor;

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

/// Dense row-major tensor and reverse-mode graph node in one.
///
/// `data` is the value; `grad` is the persistent gradient slot, filled by
/// backward() for leaf tensors with requires_grad set. `flow` is a scratch
/// buffer that exists only while a backward pass runs. Ops never mutate their
/// inputs; parameters are updated in place by the optimizer between passes.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    std::vector<T> flow;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<TensorPtr<T>> parents;
    std::function<void(Tensor<T>&)> backprop;

    Tensor(Shape s, std::vector<T> d, bool rg)
        : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
        if (numel(shape) != static_cast<std::int64_t>(data.size())) {
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
        }
        for (auto dim : shape) {
            if (dim <= 0) {
                throw ShapeError("tensor dimensions must be positive, got " +
                                 shape_str(shape));
            }
        }
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    bool is_leaf() const { return parents.empty(); }

    /// Scalar value; valid only for single-element tensors.
    T value() const {
        if (data.size() != 1) {
            throw ContractError("value() requires a scalar tensor, got shape " +
                                shape_str(shape));
        }
        return data[0];
    }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }

    void reset_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }

    /// Debug-only finiteness check (NDEBUG disables it).
    void assert_finite() const {
#ifndef NDEBUG
        for (const T v : data) assert(std::isfinite(static_cast<double>(v)));
#endif
    }
};

template <typename T>
TensorPtr<T> make_tensor(Shape shape, std::vector<T> data, bool requires_grad = false) {
    return std::make_shared<Tensor<T>>(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
TensorPtr<T> zeros(Shape shape, bool requires_grad = false) {
    const auto n = numel(shape);
    return make_tensor<T>(std::move(shape), std::vector<T>(static_cast<std::size_t>(n), T(0)),
                          requires_grad);
}

template <typename T>
TensorPtr<T> full(Shape shape, T fill, bool requires_grad = false) {
    const auto n = numel(shape);
    return make_tensor<T>(std::move(shape), std::vector<T>(static_cast<std::size_t>(n), fill),
                          requires_grad);
}

template <typename T>
TensorPtr<T> scalar(T v, bool requires_grad = false) {
    return make_tensor<T>({1}, {v}, requires_grad);
}

namespace detail {

template <typename T>
void topo_order(const TensorPtr<T>& root, std::vector<Tensor<T>*>& order) {
    std::unordered_set<Tensor<T>*> visited;
    std::function<void(Tensor<T>*)> visit = [&](Tensor<T>* node) {
        if (!visited.insert(node).second) return;
        for (const auto& p : node->parents) visit(p.get());
        order.push_back(node);
    };
    visit(root.get());
}

} // namespace detail

/// Reverse-mode sweep from a scalar loss. Each call propagates a fresh seed
/// of 1 through the graph and adds d(loss)/d(leaf) into every grad-requiring
/// leaf's grad slot, so repeated calls accumulate. Grads are only ever
/// cleared explicitly via reset_grads().
template <typename T>
void backward(const TensorPtr<T>& loss) {
    if (!loss) throw ContractError("backward: null loss tensor");
    if (loss->size() != 1) {
        throw ContractError("backward requires a scalar loss, got shape " +
                            shape_str(loss->shape));
    }
    std::vector<Tensor<T>*> order;
    detail::topo_order(loss, order);

    for (auto* node : order) node->flow.assign(node->data.size(), T(0));
    loss->flow[0] = T(1);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backprop) (*it)->backprop(**it);
    }
    for (auto* node : order) {
        if (node->requires_grad && node->is_leaf()) {
            node->ensure_grad();
            for (std::size_t i = 0; i < node->flow.size(); ++i) {
                node->grad[i] += node->flow[i];
            }
        }
        node->flow.clear();
        node->flow.shrink_to_fit();
    }
}

template <typename T>
void reset_grads(const std::vector<TensorPtr<T>>& params) {
    for (const auto& p : params) {
        p->ensure_grad();
        p->reset_grad();
    }
}

} // namespace star
