#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pvgan/errors.hpp"
#include "pvgan/nn_ops.hpp"
#include "pvgan/rng.hpp"
#include "pvgan/tensor.hpp"
#include "pvgan/voxel_grid.hpp"

namespace pvgan {

enum class ConditionEncoding { kScalar, kOneHot };
enum class LatentPrior { kNormal, kUniform01 };

std::string to_string(ConditionEncoding e);
ConditionEncoding condition_encoding_from_string(const std::string& s);
std::string to_string(LatentPrior p);
LatentPrior latent_prior_from_string(const std::string& s);

struct ModelConfig {
    int resolution = 32;
    int latent_dim = 200;
    int base_channels = 256;
    int n_conditions = 4;
    ConditionEncoding condition_encoding = ConditionEncoding::kScalar;
    LatentPrior latent_prior = LatentPrior::kNormal;
    double leaky_slope = 0.2;
    double init_std = 0.02;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;

    // Layers double the spatial extent from 4³ up to R³ (first layer 1³→4³),
    // so the count is log2(R/4) + 1.
    int n_layers() const;
    int condition_channels() const;
    int generator_in_channels() const;  // latent_dim + condition_channels
    void validate() const;              // ConfigError on violation
};

struct LayerSpec {
    enum class Act { kReLU, kLeakyReLU, kSigmoid };
    bool transposed = false;
    int in_channels = 0, out_channels = 0;
    int kernel = 4, stride = 2, pad = 1;
    int in_size = 0, out_size = 0;  // spatial extent per axis
    bool batch_norm = false;
    Act act = Act::kReLU;
};

std::vector<LayerSpec> generator_plan(const ModelConfig& config);
std::vector<LayerSpec> discriminator_plan(const ModelConfig& config);

template <typename T>
struct LayerParams {
    Tensor<T> weight, bias;
    // Empty tensors when the layer has no batch norm.
    Tensor<T> gamma, beta, running_mean, running_var;
};

template <typename T>
struct LayerCache {
    Tensor<T> input;   // layer input, for weight gradients
    Tensor<T> output;  // post-activation, for activation gradients
    nn::BnCache<T> bn;
};

// One convolutional stack covering both networks; `name` ("g"/"d") prefixes
// tensor names used by init seeding and checkpoints.
template <typename T>
struct ConvNet {
    std::string name;
    ModelConfig config;
    std::vector<LayerSpec> plan;
    std::vector<LayerParams<T>> layers;

    static ConvNet make(std::string name, const ModelConfig& config, std::vector<LayerSpec> plan_in) {
        ConvNet net;
        net.name = std::move(name);
        net.config = config;
        net.plan = std::move(plan_in);
        net.layers.resize(net.plan.size());
        for (std::size_t i = 0; i < net.plan.size(); ++i) {
            const LayerSpec& s = net.plan[i];
            const int k = s.kernel;
            if (s.transposed)
                net.layers[i].weight = Tensor<T>({s.in_channels, s.out_channels, k, k, k});
            else
                net.layers[i].weight = Tensor<T>({s.out_channels, s.in_channels, k, k, k});
            net.layers[i].bias = Tensor<T>({s.out_channels});
            if (s.batch_norm) {
                net.layers[i].gamma = Tensor<T>({s.out_channels});
                net.layers[i].beta = Tensor<T>({s.out_channels});
                net.layers[i].running_mean = Tensor<T>({s.out_channels});
                net.layers[i].running_var = Tensor<T>({s.out_channels});
            }
        }
        return net;
    }

    // Weights ~ N(0, init_std²) from a per-tensor counter-derived stream;
    // biases and batch-norm shifts start at 0, scales at 1.
    void init_params(std::uint64_t seed) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            LayerParams<T>& lp = layers[i];
            Rng rng(derive_seed(seed, tensor_name(i, "weight")));
            for (auto& v : lp.weight.data) v = static_cast<T>(rng.normal() * config.init_std);
            lp.bias.zero();
            if (plan[i].batch_norm) {
                lp.gamma.fill(T(1));
                lp.beta.zero();
                lp.running_mean.zero();
                lp.running_var.fill(T(1));
            }
        }
    }

    std::string tensor_name(std::size_t layer, const char* part) const {
        return name + ".layer" + std::to_string(layer) + "." + part;
    }

    // Trainable tensors in checkpoint/optimizer order.
    void for_each_trainable(const std::function<void(const std::string&, Tensor<T>&)>& fn) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            fn(tensor_name(i, "weight"), layers[i].weight);
            fn(tensor_name(i, "bias"), layers[i].bias);
            if (plan[i].batch_norm) {
                fn(tensor_name(i, "bn_gamma"), layers[i].gamma);
                fn(tensor_name(i, "bn_beta"), layers[i].beta);
            }
        }
    }

    // Trainables plus running statistics — the full persistent state.
    void for_each_tensor(const std::function<void(const std::string&, Tensor<T>&)>& fn) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            fn(tensor_name(i, "weight"), layers[i].weight);
            fn(tensor_name(i, "bias"), layers[i].bias);
            if (plan[i].batch_norm) {
                fn(tensor_name(i, "bn_gamma"), layers[i].gamma);
                fn(tensor_name(i, "bn_beta"), layers[i].beta);
                fn(tensor_name(i, "bn_mean"), layers[i].running_mean);
                fn(tensor_name(i, "bn_var"), layers[i].running_var);
            }
        }
    }

    std::uint64_t params_checksum() {
        std::uint64_t h = 14695981039346656037ULL;
        for_each_tensor([&h](const std::string&, Tensor<T>& t) {
            const auto* bytes = reinterpret_cast<const unsigned char*>(t.data.data());
            const std::size_t n = t.data.size() * sizeof(T);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= bytes[i];
                h *= 1099511628211ULL;
            }
        });
        return h;
    }

    Tensor<T> forward(const Tensor<T>& in, nn::BnMode mode, std::vector<LayerCache<T>>* caches) {
        require(in.shape.size() == 5, "net input must be rank 5");
        require(in.shape[1] == plan.front().in_channels && in.shape[2] == plan.front().in_size,
                "net input does not match layer plan");
        if (caches != nullptr) caches->assign(plan.size(), LayerCache<T>{});
        Tensor<T> cur = in;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const LayerSpec& s = plan[i];
            LayerParams<T>& lp = layers[i];
            Tensor<T> conv = s.transposed ? nn::tconv3d_forward(cur, lp.weight, lp.bias, s.stride, s.pad)
                                          : nn::conv3d_forward(cur, lp.weight, lp.bias, s.stride, s.pad);
            if (caches != nullptr) (*caches)[i].input = std::move(cur);
            Tensor<T> act = s.batch_norm
                                ? nn::batchnorm_forward(conv, lp.gamma, lp.beta, lp.running_mean,
                                                        lp.running_var, static_cast<T>(config.bn_eps),
                                                        static_cast<T>(config.bn_momentum), mode,
                                                        caches != nullptr ? &(*caches)[i].bn : nullptr)
                                : std::move(conv);
            switch (s.act) {
                case LayerSpec::Act::kReLU: nn::relu_(act); break;
                case LayerSpec::Act::kLeakyReLU: nn::leaky_relu_(act, static_cast<T>(config.leaky_slope)); break;
                case LayerSpec::Act::kSigmoid: nn::sigmoid_(act); break;
            }
            if (caches != nullptr) {
                (*caches)[i].output = act;
                cur = std::move(act);
            } else {
                cur = std::move(act);
            }
        }
        return cur;
    }

    // Reverse pass from dL/d(output). `grads` may be null when only the input
    // gradient is wanted (generator updates through a frozen discriminator).
    Tensor<T> backward(const Tensor<T>& dout, const std::vector<LayerCache<T>>& caches,
                       std::vector<LayerParams<T>>* grads, bool need_dinput) const {
        require(caches.size() == plan.size(), "backward: caches missing");
        Tensor<T> g = dout;
        for (std::size_t ri = plan.size(); ri-- > 0;) {
            const LayerSpec& s = plan[ri];
            const LayerParams<T>& lp = layers[ri];
            switch (s.act) {
                case LayerSpec::Act::kReLU: nn::relu_backward_(g, caches[ri].output); break;
                case LayerSpec::Act::kLeakyReLU:
                    nn::leaky_relu_backward_(g, caches[ri].output, static_cast<T>(config.leaky_slope));
                    break;
                case LayerSpec::Act::kSigmoid: nn::sigmoid_backward_(g, caches[ri].output); break;
            }
            if (s.batch_norm) {
                Tensor<T>* dgamma = grads != nullptr ? &(*grads)[ri].gamma : nullptr;
                Tensor<T>* dbeta = grads != nullptr ? &(*grads)[ri].beta : nullptr;
                g = nn::batchnorm_backward(g, lp.gamma, caches[ri].bn, dgamma, dbeta);
            }
            const bool want_din = ri > 0 || need_dinput;
            Tensor<T>* dweight = grads != nullptr ? &(*grads)[ri].weight : nullptr;
            Tensor<T>* dbias = grads != nullptr ? &(*grads)[ri].bias : nullptr;
            Tensor<T> din;
            if (s.transposed)
                nn::tconv3d_backward(caches[ri].input, lp.weight, g, s.stride, s.pad, dweight, dbias,
                                     want_din ? &din : nullptr);
            else
                nn::conv3d_backward(caches[ri].input, lp.weight, g, s.stride, s.pad, dweight, dbias,
                                    want_din ? &din : nullptr);
            g = std::move(din);
        }
        return g;
    }

    std::vector<LayerParams<T>> make_grads() const {
        std::vector<LayerParams<T>> grads(plan.size());
        return grads;  // backward allocates each tensor on write
    }

    // First layer whose cached output contains a non-finite value, or -1.
    int find_nonfinite_layer(const std::vector<LayerCache<T>>& caches) const {
        for (std::size_t i = 0; i < caches.size(); ++i)
            for (const T v : caches[i].output.data)
                if (!std::isfinite(static_cast<double>(v))) return static_cast<int>(i);
        return -1;
    }
};

template <typename T>
ConvNet<T> make_generator(const ModelConfig& config) {
    config.validate();
    return ConvNet<T>::make("g", config, generator_plan(config));
}

template <typename T>
ConvNet<T> make_discriminator(const ModelConfig& config) {
    config.validate();
    return ConvNet<T>::make("d", config, discriminator_plan(config));
}

// --- batch packing ----------------------------------------------------------

// z batch + conditions → (B, latent_dim + cc, 1, 1, 1) generator input.
template <typename T>
Tensor<T> pack_latents(const ModelConfig& config, const std::vector<std::vector<T>>& z_batch,
                       const std::vector<Condition>& conditions) {
    require(!z_batch.empty() && z_batch.size() == conditions.size(),
            "pack_latents: batch must be nonempty with one condition per z");
    const int cc = config.condition_channels();
    Tensor<T> in({static_cast<int>(z_batch.size()), config.latent_dim + cc, 1, 1, 1});
    for (std::size_t b = 0; b < z_batch.size(); ++b) {
        require(static_cast<int>(z_batch[b].size()) == config.latent_dim,
                "pack_latents: z length does not match latent_dim");
        require(conditions[b].n_conditions == config.n_conditions,
                "pack_latents: condition family does not match model");
        T* dst = in.data.data() + b * static_cast<std::size_t>(config.latent_dim + cc);
        for (int j = 0; j < config.latent_dim; ++j) dst[j] = z_batch[b][j];
        if (config.condition_encoding == ConditionEncoding::kScalar)
            dst[config.latent_dim] = static_cast<T>(conditions[b].index);
        else
            dst[config.latent_dim + conditions[b].index] = T(1);
    }
    return in;
}

// Occupancy batch (B, 1, R, R, R) + conditions → (B, 1 + cc, R, R, R) with
// constant-filled condition channels, the discriminator's input format.
template <typename T>
Tensor<T> with_condition_channels(const ModelConfig& config, const Tensor<T>& grids,
                                  const std::vector<Condition>& conditions) {
    require(grids.shape.size() == 5 && grids.shape[1] == 1, "expected single-channel grid batch");
    require(grids.shape[0] == static_cast<int>(conditions.size()),
            "one condition per batch element required");
    const int cc = config.condition_channels();
    const int r = grids.shape[2];
    Tensor<T> out({grids.shape[0], 1 + cc, r, r, r});
    const std::int64_t slab = static_cast<std::int64_t>(r) * r * r;
    for (int b = 0; b < grids.shape[0]; ++b) {
        require(conditions[static_cast<std::size_t>(b)].n_conditions == config.n_conditions,
                "condition family does not match model");
        T* dst = out.data.data() + static_cast<std::int64_t>(b) * (1 + cc) * slab;
        const T* src = grids.data.data() + static_cast<std::int64_t>(b) * slab;
        for (std::int64_t i = 0; i < slab; ++i) dst[i] = src[i];
        if (config.condition_encoding == ConditionEncoding::kScalar) {
            const T v = static_cast<T>(conditions[static_cast<std::size_t>(b)].index);
            for (std::int64_t i = 0; i < slab; ++i) dst[slab + i] = v;
        } else {
            for (int c = 0; c < cc; ++c) {
                const T v = (c == conditions[static_cast<std::size_t>(b)].index) ? T(1) : T(0);
                for (std::int64_t i = 0; i < slab; ++i) dst[(1 + c) * slab + i] = v;
            }
        }
    }
    return out;
}

// Gradient w.r.t. channel 0 of a discriminator input (condition channels are
// constants, their gradient is discarded).
template <typename T>
Tensor<T> first_channel(const Tensor<T>& t) {
    require(t.shape.size() == 5, "first_channel: rank-5 tensor expected");
    Tensor<T> out({t.shape[0], 1, t.shape[2], t.shape[3], t.shape[4]});
    const std::int64_t slab = static_cast<std::int64_t>(t.shape[2]) * t.shape[3] * t.shape[4];
    for (int b = 0; b < t.shape[0]; ++b) {
        const T* src = t.data.data() + static_cast<std::int64_t>(b) * t.shape[1] * slab;
        T* dst = out.data.data() + static_cast<std::int64_t>(b) * slab;
        for (std::int64_t i = 0; i < slab; ++i) dst[i] = src[i];
    }
    return out;
}

template <typename T>
std::vector<T> flatten_scalars(const Tensor<T>& t) {
    require(t.numel() == static_cast<std::size_t>(t.shape[0]), "expected one scalar per batch element");
    return t.data;
}

template <typename T>
std::vector<T> sample_latent(const ModelConfig& config, Rng& rng) {
    std::vector<T> z(static_cast<std::size_t>(config.latent_dim));
    for (auto& v : z)
        v = config.latent_prior == LatentPrior::kNormal ? static_cast<T>(rng.normal())
                                                        : static_cast<T>(rng.uniform());
    return z;
}

// --- VoxelGrid bridge -------------------------------------------------------
// VoxelGrid's flat order (x fastest, then y, then z) coincides with the
// (Z, Y, X) tensor layout, so these are straight element copies.

template <typename T>
Tensor<T> grids_to_tensor(const std::vector<VoxelGrid>& grids) {
    require(!grids.empty(), "empty grid batch");
    const int r = grids.front().resolution();
    Tensor<T> out({static_cast<int>(grids.size()), 1, r, r, r});
    const std::int64_t slab = static_cast<std::int64_t>(r) * r * r;
    for (std::size_t b = 0; b < grids.size(); ++b) {
        require(grids[b].resolution() == r, "grid batch resolutions differ");
        T* dst = out.data.data() + static_cast<std::int64_t>(b) * slab;
        const auto vals = grids[b].values();
        for (std::int64_t i = 0; i < slab; ++i) dst[i] = static_cast<T>(vals[static_cast<std::size_t>(i)]);
    }
    return out;
}

template <typename T>
std::vector<VoxelGrid> tensor_to_grids(const Tensor<T>& t) {
    require(t.shape.size() == 5 && t.shape[1] == 1 && t.shape[2] == t.shape[3] &&
                t.shape[3] == t.shape[4],
            "tensor_to_grids: expected (B,1,R,R,R)");
    const int r = t.shape[2];
    const std::int64_t slab = static_cast<std::int64_t>(r) * r * r;
    std::vector<VoxelGrid> grids;
    grids.reserve(static_cast<std::size_t>(t.shape[0]));
    for (int b = 0; b < t.shape[0]; ++b) {
        std::vector<float> vals(static_cast<std::size_t>(slab));
        const T* src = t.data.data() + static_cast<std::int64_t>(b) * slab;
        for (std::int64_t i = 0; i < slab; ++i) {
            // Clip float-rounding spill; sigmoid keeps values inside [0,1].
            const float v = static_cast<float>(src[i]);
            vals[static_cast<std::size_t>(i)] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        }
        grids.push_back(VoxelGrid::from_values(r, std::move(vals)));
    }
    return grids;
}

// --- convenience forwards ---------------------------------------------------

template <typename T>
std::vector<VoxelGrid> generator_forward(ConvNet<T>& gen, const std::vector<std::vector<T>>& z_batch,
                                         const std::vector<Condition>& conditions, nn::BnMode mode) {
    Tensor<T> in = pack_latents(gen.config, z_batch, conditions);
    return tensor_to_grids(gen.forward(in, mode, nullptr));
}

template <typename T>
std::vector<T> discriminator_forward(ConvNet<T>& disc, const std::vector<VoxelGrid>& grids,
                                     const std::vector<Condition>& conditions, nn::BnMode mode) {
    Tensor<T> in = with_condition_channels(disc.config, grids_to_tensor<T>(grids), conditions);
    return flatten_scalars(disc.forward(in, mode, nullptr));
}

}  // namespace pvgan
