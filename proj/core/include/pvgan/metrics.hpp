#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pvgan/model.hpp"
#include "pvgan/rng.hpp"
#include "pvgan/voxel_grid.hpp"

namespace pvgan {

struct PairReport {
    std::vector<double> per_latent_aad;
    std::vector<double> per_latent_avar;
    double batch_aad = 0.0;
    double batch_avar = 0.0;
    int n_conditions = 0;
    int degenerate_count = 0;  // latents with an empty binarized sample
};

// Mean absolute cell-wise difference between each aligned sample and the
// merged grid, averaged over samples; 0 iff all aligned samples agree.
double aad(const std::vector<VoxelGrid>& samples, const std::vector<Condition>& conditions);

// Mean over samples of |S_i^RB ∧ M^B| / |S_i^RB| with strict binarization at
// 0.5. An empty binarized sample contributes 0 and bumps *degenerate.
double avar(const std::vector<VoxelGrid>& samples, const std::vector<Condition>& conditions,
            int* degenerate = nullptr);

struct EvaluateOptions {
    int n_latents = 128;
    std::uint64_t seed = 0;
    // Latents per generator forward. Batch-stat normalization makes outputs
    // depend on the forward batch, so this is pinned rather than adaptive.
    int chunk_latents = 64;
    nn::BnMode bn_mode = nn::BnMode::kTrainStatic;
};

namespace detail {
void finalize_report(PairReport& report);
}

// Shared-z all-conditions generation and per-latent metrics for n_latents
// draws; deterministic given the seed.
template <typename T>
PairReport evaluate(ConvNet<T>& gen, const EvaluateOptions& opts) {
    require(opts.n_latents >= 1, "evaluate: n_latents must be >= 1");
    require(opts.chunk_latents >= 1, "evaluate: chunk_latents must be >= 1");
    const int n = gen.config.n_conditions;
    std::vector<Condition> all_conds;
    for (int i = 0; i < n; ++i) all_conds.push_back(Condition::make(i, n));

    PairReport report;
    report.n_conditions = n;
    for (int chunk_start = 0; chunk_start < opts.n_latents; chunk_start += opts.chunk_latents) {
        const int rows = std::min(opts.chunk_latents, opts.n_latents - chunk_start);
        std::vector<std::vector<T>> z_expanded;
        std::vector<Condition> conds_expanded;
        for (int b = 0; b < rows; ++b) {
            Rng rng(derive_seed(opts.seed, "eval-z", static_cast<std::uint64_t>(chunk_start + b)));
            const std::vector<T> z = sample_latent<T>(gen.config, rng);
            for (int i = 0; i < n; ++i) {
                z_expanded.push_back(z);
                conds_expanded.push_back(all_conds[static_cast<std::size_t>(i)]);
            }
        }
        std::vector<VoxelGrid> grids = generator_forward(gen, z_expanded, conds_expanded, opts.bn_mode);
        for (int b = 0; b < rows; ++b) {
            const std::vector<VoxelGrid> pair(grids.begin() + static_cast<std::ptrdiff_t>(b) * n,
                                              grids.begin() + static_cast<std::ptrdiff_t>(b + 1) * n);
            int degenerate = 0;
            report.per_latent_aad.push_back(aad(pair, all_conds));
            report.per_latent_avar.push_back(avar(pair, all_conds, &degenerate));
            if (degenerate > 0) ++report.degenerate_count;
        }
    }
    detail::finalize_report(report);
    return report;
}

// Human-readable summary in the method-rows / metric-columns layout.
std::string format_report_table(const std::vector<std::pair<std::string, PairReport>>& rows);

// Line-delimited records: one row per latent plus a trailing mean row.
std::string format_report_records(const std::string& label, const PairReport& report);
void write_report_records(const std::filesystem::path& path, const std::string& label,
                          const PairReport& report);

}  // namespace pvgan
