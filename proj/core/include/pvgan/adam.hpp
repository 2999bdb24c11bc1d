#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pvgan/errors.hpp"
#include "pvgan/model.hpp"
#include "pvgan/tensor.hpp"

namespace pvgan {

// ADAM with bias correction; one (m, v) pair per trainable tensor in the
// net's canonical order (for_each_trainable), shared step counter t.
template <typename T>
struct AdamState {
    std::vector<Tensor<T>> m, v;
    std::uint64_t t = 0;

    static AdamState make_like(ConvNet<T>& net) {
        AdamState s;
        net.for_each_trainable([&s](const std::string&, Tensor<T>& p) {
            s.m.emplace_back(p.shape);
            s.v.emplace_back(p.shape);
        });
        return s;
    }

    void step(ConvNet<T>& net, const std::vector<LayerParams<T>>& grads, T lr, T beta1, T beta2,
              T eps) {
        require(grads.size() == net.layers.size(), "adam: gradient layer count mismatch");
        ++t;
        const T c1 = T(1) - std::pow(beta1, static_cast<T>(t));
        const T c2 = T(1) - std::pow(beta2, static_cast<T>(t));
        std::size_t idx = 0;
        const auto update = [&](Tensor<T>& p, const Tensor<T>& g) {
            require(idx < m.size() && g.shape == p.shape, "adam: state/gradient shape mismatch");
            Tensor<T>& mi = m[idx];
            Tensor<T>& vi = v[idx];
            for (std::size_t i = 0; i < p.data.size(); ++i) {
                const T gv = g.data[i];
                mi.data[i] = beta1 * mi.data[i] + (T(1) - beta1) * gv;
                vi.data[i] = beta2 * vi.data[i] + (T(1) - beta2) * gv * gv;
                p.data[i] -= lr * (mi.data[i] / c1) / (std::sqrt(vi.data[i] / c2) + eps);
            }
            ++idx;
        };
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            update(net.layers[i].weight, grads[i].weight);
            update(net.layers[i].bias, grads[i].bias);
            if (net.plan[i].batch_norm) {
                update(net.layers[i].gamma, grads[i].gamma);
                update(net.layers[i].beta, grads[i].beta);
            }
        }
        require(idx == m.size(), "adam: unused optimizer state");
    }
};

// Elementwise sum of two gradient collections with matching structure.
template <typename T>
void add_grads(std::vector<LayerParams<T>>& acc, const std::vector<LayerParams<T>>& other) {
    require(acc.size() == other.size(), "add_grads: layer count mismatch");
    const auto add = [](Tensor<T>& a, const Tensor<T>& b) {
        require(a.shape == b.shape, "add_grads: tensor shape mismatch");
        for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    };
    for (std::size_t i = 0; i < acc.size(); ++i) {
        add(acc[i].weight, other[i].weight);
        add(acc[i].bias, other[i].bias);
        if (!acc[i].gamma.data.empty()) {
            add(acc[i].gamma, other[i].gamma);
            add(acc[i].beta, other[i].beta);
        }
    }
}

}  // namespace pvgan
