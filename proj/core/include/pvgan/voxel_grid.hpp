#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pvgan/errors.hpp"

namespace pvgan {

// Dense cubic occupancy field. Values are probabilities in [0, 1]; dataset
// grids are binary {0, 1}, generator output is probabilistic. Index order is
// (x, y, z) with y the vertical (up) axis and x fastest in the flat layout:
// flat = x + R * (y + R * z).
class VoxelGrid {
public:
    VoxelGrid() = default;

    explicit VoxelGrid(int resolution, float fill = 0.0f)
        : resolution_(check_resolution(resolution)),
          values_(static_cast<std::size_t>(resolution) * resolution * resolution, fill) {
        require(fill >= 0.0f && fill <= 1.0f, "VoxelGrid fill value outside [0,1]");
    }

    // Takes ownership of a flat x-fastest value array; validates range.
    static VoxelGrid from_values(int resolution, std::vector<float> values) {
        check_resolution(resolution);
        const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
        require(values.size() == n, "VoxelGrid value count does not match resolution^3");
        for (float v : values)
            require(v >= 0.0f && v <= 1.0f, "VoxelGrid value outside [0,1]");
        VoxelGrid g;
        g.resolution_ = resolution;
        g.values_ = std::move(values);
        return g;
    }

    int resolution() const { return resolution_; }
    std::size_t cell_count() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    float at(int x, int y, int z) const { return values_[index(x, y, z)]; }
    float& at(int x, int y, int z) { return values_[index(x, y, z)]; }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(resolution_) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(resolution_) * z);
    }

    std::span<const float> values() const { return values_; }
    std::span<float> values() { return values_; }

    bool operator==(const VoxelGrid& o) const {
        return resolution_ == o.resolution_ && values_ == o.values_;
    }

private:
    static int check_resolution(int r) {
        require(r > 0, "VoxelGrid resolution must be positive");
        return r;
    }

    int resolution_ = 0;
    std::vector<float> values_;
};

// Discrete rotation label. index i stands for a rotation of
// i * (360 / n_conditions) degrees about the vertical axis; only quarter-turn
// multiples are representable, so n_conditions is 2 or 4.
struct Condition {
    int index = 0;
    int n_conditions = 2;

    static Condition make(int index, int n_conditions) {
        require(n_conditions == 2 || n_conditions == 4,
                "n_conditions must be 2 or 4 (angles must be 90-degree multiples)");
        require(index >= 0 && index < n_conditions, "condition index out of range");
        return Condition{index, n_conditions};
    }

    int angle_deg() const { return index * (360 / n_conditions); }
    int quarter_turns() const { return angle_deg() / 90; }

    bool operator==(const Condition& o) const = default;
};

// Rotates the object by k quarter turns (k taken mod 4) about the vertical
// y axis. One quarter turn maps centered coordinates (cx, cz) -> (-cz, cx),
// i.e. the +x axis onto +z; in index space (x, y, z) -> (R-1-z, y, x). Pure
// index permutation, exact for even and odd resolutions.
VoxelGrid rotate_quarter(const VoxelGrid& grid, int k);

// Rotates every sample by the inverse of its condition angle so all are
// expressed in the condition-0 frame. samples[0] comes back unchanged when
// conditions[0] is condition 0.
std::vector<VoxelGrid> align(const std::vector<VoxelGrid>& samples,
                             const std::vector<Condition>& conditions);

// Element-wise arithmetic mean of the (already aligned) grids.
VoxelGrid merge(const std::vector<VoxelGrid>& aligned);

// Strict threshold: out = 1 iff in > threshold. A two-way merge of disjoint
// binary grids averages to exactly 0.5 on the union and must binarize to 0.
VoxelGrid binarize(const VoxelGrid& grid, float threshold = 0.5f);

// Wraps a grid of resolution target-2 in a one-voxel zero shell.
VoxelGrid pad_to_target(const VoxelGrid& grid, int target);

std::int64_t occupied_count(const VoxelGrid& grid, float threshold = 0.5f);

double value_sum(const VoxelGrid& grid);

}  // namespace pvgan
