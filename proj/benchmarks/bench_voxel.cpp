#include <benchmark/benchmark.h>

#include "pvgan/metrics.hpp"
#include "pvgan/rng.hpp"
#include "pvgan/voxel_grid.hpp"

using namespace pvgan;

namespace {

std::vector<VoxelGrid> random_pair(int resolution, int n_conditions, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<VoxelGrid> grids;
    for (int i = 0; i < n_conditions; ++i) {
        VoxelGrid g(resolution);
        for (float& v : g.values()) v = static_cast<float>(rng.uniform());
        grids.push_back(std::move(g));
    }
    return grids;
}

std::vector<Condition> conditions_of(int n) {
    std::vector<Condition> out;
    for (int i = 0; i < n; ++i) out.push_back(Condition::make(i, n));
    return out;
}

void bm_rotate_quarter(benchmark::State& state) {
    const int r = static_cast<int>(state.range(0));
    const VoxelGrid g = random_pair(r, 1, 7)[0];
    for (auto _ : state) benchmark::DoNotOptimize(rotate_quarter(g, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.values().size()));
}

void bm_align_merge(benchmark::State& state) {
    const int r = static_cast<int>(state.range(0));
    const std::vector<VoxelGrid> grids = random_pair(r, 4, 7);
    const std::vector<Condition> conds = conditions_of(4);
    for (auto _ : state) benchmark::DoNotOptimize(merge(align(grids, conds)));
}

void bm_aad(benchmark::State& state) {
    const int r = static_cast<int>(state.range(0));
    const std::vector<VoxelGrid> grids = random_pair(r, 4, 7);
    const std::vector<Condition> conds = conditions_of(4);
    for (auto _ : state) benchmark::DoNotOptimize(aad(grids, conds));
}

void bm_avar(benchmark::State& state) {
    const int r = static_cast<int>(state.range(0));
    const std::vector<VoxelGrid> grids = random_pair(r, 4, 7);
    const std::vector<Condition> conds = conditions_of(4);
    for (auto _ : state) benchmark::DoNotOptimize(avar(grids, conds));
}

}  // namespace

BENCHMARK(bm_rotate_quarter)->Arg(16)->Arg(32);
BENCHMARK(bm_align_merge)->Arg(16)->Arg(32);
BENCHMARK(bm_aad)->Arg(16)->Arg(32);
BENCHMARK(bm_avar)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
