#include "pvgan/model.hpp"

namespace pvgan {

std::string to_string(ConditionEncoding e) {
    return e == ConditionEncoding::kScalar ? "scalar" : "one-hot";
}

ConditionEncoding condition_encoding_from_string(const std::string& s) {
    if (s == "scalar") return ConditionEncoding::kScalar;
    if (s == "one-hot" || s == "one_hot" || s == "onehot") return ConditionEncoding::kOneHot;
    throw ConfigError("unknown condition encoding: " + s);
}

std::string to_string(LatentPrior p) { return p == LatentPrior::kNormal ? "normal" : "uniform01"; }

LatentPrior latent_prior_from_string(const std::string& s) {
    if (s == "normal") return LatentPrior::kNormal;
    if (s == "uniform01" || s == "uniform") return LatentPrior::kUniform01;
    throw ConfigError("unknown latent prior: " + s);
}

int ModelConfig::n_layers() const {
    int layers = 1;
    for (int size = 4; size < resolution; size *= 2) ++layers;
    return layers;
}

int ModelConfig::condition_channels() const {
    return condition_encoding == ConditionEncoding::kScalar ? 1 : n_conditions;
}

int ModelConfig::generator_in_channels() const { return latent_dim + condition_channels(); }

void ModelConfig::validate() const {
    if (resolution != 8 && resolution != 16 && resolution != 32)
        throw ConfigError("unsupported resolution " + std::to_string(resolution) +
                          " (expected 8, 16 or 32)");
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (n_conditions != 2 && n_conditions != 4)
        throw ConfigError("n_conditions must be 2 or 4");
    const int hidden = n_layers() - 1;  // halvings applied to base_channels
    const int div = 1 << (hidden > 0 ? hidden - 1 : 0);
    if (base_channels < div || base_channels % div != 0)
        throw ConfigError("base_channels must be a positive multiple of " + std::to_string(div) +
                          " for resolution " + std::to_string(resolution));
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must be in (0,1)");
    if (!(init_std > 0.0)) throw ConfigError("init_std must be > 0");
    if (!(bn_eps > 0.0)) throw ConfigError("bn_eps must be > 0");
    if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw ConfigError("bn_momentum must be in (0,1]");
}

// Generator: 1³ → 4³×base → 8³×(base/2) → … → R³×1. First layer stride 1 no
// pad; the rest double the extent (kernel 4, stride 2, pad 1). Batch norm and
// rectified-linear on hidden layers, sigmoid and no norm on the output layer.
std::vector<LayerSpec> generator_plan(const ModelConfig& config) {
    config.validate();
    const int n = config.n_layers();
    std::vector<LayerSpec> plan(static_cast<std::size_t>(n));
    int size = 1;
    int ch = config.generator_in_channels();
    for (int i = 0; i < n; ++i) {
        LayerSpec& s = plan[static_cast<std::size_t>(i)];
        const bool last = (i == n - 1);
        s.transposed = true;
        s.in_channels = ch;
        s.out_channels = last ? 1 : (config.base_channels >> i);
        s.kernel = 4;
        s.stride = i == 0 ? 1 : 2;
        s.pad = i == 0 ? 0 : 1;
        s.in_size = size;
        s.out_size = nn::tconv_out_size(size, s.kernel, s.stride, s.pad);
        s.batch_norm = !last;
        s.act = last ? LayerSpec::Act::kSigmoid : LayerSpec::Act::kReLU;
        size = s.out_size;
        ch = s.out_channels;
    }
    require(size == config.resolution, "generator plan does not reach target resolution");
    return plan;
}

// Discriminator mirrors the generator in reverse: R³ → … → 4³×base → 1³×1.
std::vector<LayerSpec> discriminator_plan(const ModelConfig& config) {
    config.validate();
    const int n = config.n_layers();
    std::vector<LayerSpec> plan(static_cast<std::size_t>(n));
    int size = config.resolution;
    int ch = 1 + config.condition_channels();
    for (int i = 0; i < n; ++i) {
        LayerSpec& s = plan[static_cast<std::size_t>(i)];
        const bool last = (i == n - 1);
        s.transposed = false;
        s.in_channels = ch;
        s.out_channels = last ? 1 : (config.base_channels >> (n - 2 - i));
        s.kernel = 4;
        s.stride = last ? 1 : 2;
        s.pad = last ? 0 : 1;
        s.in_size = size;
        s.out_size = nn::conv_out_size(size, s.kernel, s.stride, s.pad);
        s.batch_norm = !last;
        s.act = last ? LayerSpec::Act::kSigmoid : LayerSpec::Act::kLeakyReLU;
        size = s.out_size;
        ch = s.out_channels;
    }
    require(size == 1, "discriminator plan does not reduce to a scalar");
    return plan;
}

}  // namespace pvgan
