#include <benchmark/benchmark.h>

#include "pvgan/model.hpp"
#include "pvgan/rng.hpp"

using namespace pvgan;

namespace {

ModelConfig small_config(int resolution) {
    ModelConfig c;
    c.resolution = resolution;
    c.latent_dim = 32;
    c.base_channels = 32;
    c.n_conditions = 2;
    return c;
}

Tensor<float> latent_batch(const ModelConfig& c, int batch) {
    Rng rng(11);
    std::vector<std::vector<float>> zs;
    std::vector<Condition> conds;
    for (int b = 0; b < batch; ++b) {
        zs.push_back(sample_latent<float>(c, rng));
        conds.push_back(Condition::make(b % c.n_conditions, c.n_conditions));
    }
    return pack_latents(c, zs, conds);
}

void bm_generator_forward(benchmark::State& state) {
    const ModelConfig c = small_config(static_cast<int>(state.range(0)));
    ConvNet<float> gen = make_generator<float>(c);
    gen.init_params(5);
    const Tensor<float> in = latent_batch(c, 8);
    for (auto _ : state) benchmark::DoNotOptimize(gen.forward(in, nn::BnMode::kTrainStatic, nullptr));
}

void bm_generator_backward(benchmark::State& state) {
    const ModelConfig c = small_config(static_cast<int>(state.range(0)));
    ConvNet<float> gen = make_generator<float>(c);
    gen.init_params(5);
    const Tensor<float> in = latent_batch(c, 8);
    std::vector<LayerCache<float>> caches;
    Tensor<float> out = gen.forward(in, nn::BnMode::kTrain, &caches);
    Tensor<float> dout = out;
    dout.fill(1.0f);
    auto grads = gen.make_grads();
    for (auto _ : state) benchmark::DoNotOptimize(gen.backward(dout, caches, &grads, false));
}

void bm_discriminator_forward(benchmark::State& state) {
    const ModelConfig c = small_config(static_cast<int>(state.range(0)));
    ConvNet<float> disc = make_discriminator<float>(c);
    disc.init_params(6);
    Rng rng(3);
    std::vector<VoxelGrid> grids;
    std::vector<Condition> conds;
    for (int b = 0; b < 8; ++b) {
        VoxelGrid g(c.resolution);
        for (float& v : g.values()) v = static_cast<float>(rng.uniform());
        grids.push_back(std::move(g));
        conds.push_back(Condition::make(b % c.n_conditions, c.n_conditions));
    }
    const Tensor<float> in = with_condition_channels(c, grids_to_tensor<float>(grids), conds);
    for (auto _ : state) benchmark::DoNotOptimize(disc.forward(in, nn::BnMode::kTrainStatic, nullptr));
}

}  // namespace

BENCHMARK(bm_generator_forward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_generator_backward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_discriminator_forward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
