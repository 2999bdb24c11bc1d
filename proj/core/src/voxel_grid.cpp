#include "pvgan/voxel_grid.hpp"

#include <cmath>

namespace pvgan {

VoxelGrid rotate_quarter(const VoxelGrid& grid, int k) {
    const int r = grid.resolution();
    int q = ((k % 4) + 4) % 4;
    if (q == 0) return grid;

    VoxelGrid out(r);
    // Gather form of the forward map (x,y,z) -> (R-1-z, y, x): the source of
    // output cell (x,y,z) after one quarter turn is (z, y, R-1-x).
    VoxelGrid src = grid;
    for (; q > 0; --q) {
        for (int z = 0; z < r; ++z)
            for (int y = 0; y < r; ++y)
                for (int x = 0; x < r; ++x)
                    out.at(x, y, z) = src.at(z, y, r - 1 - x);
        if (q > 1) src = out;
    }
    return out;
}

std::vector<VoxelGrid> align(const std::vector<VoxelGrid>& samples,
                             const std::vector<Condition>& conditions) {
    require(samples.size() == conditions.size(), "align: samples/conditions length mismatch");
    std::vector<VoxelGrid> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int q = conditions[i].quarter_turns();
        out.push_back(rotate_quarter(samples[i], (4 - q) % 4));
    }
    return out;
}

VoxelGrid merge(const std::vector<VoxelGrid>& aligned) {
    require(!aligned.empty(), "merge: empty sample list");
    const int r = aligned.front().resolution();
    for (const auto& g : aligned)
        require(g.resolution() == r, "merge: resolution mismatch");

    VoxelGrid out(r);
    const std::size_t n = out.cell_count();
    const double inv = 1.0 / static_cast<double>(aligned.size());
    auto dst = out.values();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& g : aligned) acc += g.values()[i];
        dst[i] = static_cast<float>(acc * inv);
    }
    return out;
}

VoxelGrid binarize(const VoxelGrid& grid, float threshold) {
    require(threshold > 0.0f && threshold < 1.0f, "binarize: threshold must be in (0,1)");
    VoxelGrid out(grid.resolution());
    auto dst = out.values();
    auto src = grid.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > threshold ? 1.0f : 0.0f;
    return out;
}

VoxelGrid pad_to_target(const VoxelGrid& grid, int target) {
    require(grid.resolution() == target - 2,
            "pad_to_target: input resolution must be target - 2");
    VoxelGrid out(target);
    const int r = grid.resolution();
    for (int z = 0; z < r; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x)
                out.at(x + 1, y + 1, z + 1) = grid.at(x, y, z);
    return out;
}

std::int64_t occupied_count(const VoxelGrid& grid, float threshold) {
    std::int64_t n = 0;
    for (float v : grid.values())
        if (v > threshold) ++n;
    return n;
}

double value_sum(const VoxelGrid& grid) {
    double s = 0.0;
    for (float v : grid.values()) s += v;
    return s;
}

}  // namespace pvgan
