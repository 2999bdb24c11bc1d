#pragma once

// Differentiable align-and-merge over generator output batches laid out as
// (B·n, 1, R, R, R) with row b·n + i holding latent b under condition i.
// Align rotates sample i back to the condition-0 frame; merge averages.
// Both are linear, so the backward pass is the transposed permutation scaled
// by 1/n.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pvgan/errors.hpp"
#include "pvgan/tensor.hpp"
#include "pvgan/voxel_grid.hpp"

namespace pvgan {

// One quarter turn about the vertical axis on a flat (Z, Y, X) cube, gather
// form out(x,y,z) = in(z, y, R-1-x); matches VoxelGrid::rotate_quarter.
template <typename T>
void rotate_slab_once(const T* src, T* dst, int r) {
    const auto at = [r](int x, int y, int z) {
        return static_cast<std::size_t>(x) + static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(r) * static_cast<std::size_t>(z));
    };
    for (int z = 0; z < r; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) dst[at(x, y, z)] = src[at(z, y, r - 1 - x)];
}

// src and dst must not alias.
template <typename T>
void rotate_slab(const T* src, T* dst, int r, int quarter_turns) {
    const int q = ((quarter_turns % 4) + 4) % 4;
    const std::size_t cells = static_cast<std::size_t>(r) * r * r;
    if (q == 0) {
        std::copy(src, src + cells, dst);
        return;
    }
    if (q == 1) {
        rotate_slab_once(src, dst, r);
        return;
    }
    std::vector<T> a(cells);
    rotate_slab_once(src, a.data(), r);
    if (q == 2) {
        rotate_slab_once(a.data(), dst, r);
        return;
    }
    std::vector<T> b(cells);
    rotate_slab_once(a.data(), b.data(), r);
    rotate_slab_once(b.data(), dst, r);
}

inline int merge_rows(const std::vector<int>& shape, int n_conditions) {
    require(shape.size() == 5 && shape[1] == 1, "align_merge: expected (B*n, 1, R, R, R)");
    require(n_conditions >= 2 && shape[0] % n_conditions == 0,
            "align_merge: batch not divisible by condition count");
    require(shape[2] == shape[3] && shape[3] == shape[4], "align_merge: cubic grids required");
    return shape[0] / n_conditions;
}

template <typename T>
Tensor<T> align_merge(const Tensor<T>& fakes, int n_conditions) {
    const int b_rows = merge_rows(fakes.shape, n_conditions);
    const int r = fakes.shape[2];
    const std::size_t cells = static_cast<std::size_t>(r) * r * r;
    Tensor<T> merged({b_rows, 1, r, r, r});
    std::vector<T> aligned(cells);
    std::vector<double> acc(cells);
    for (int b = 0; b < b_rows; ++b) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int i = 0; i < n_conditions; ++i) {
            const Condition cond = Condition::make(i, n_conditions);
            const T* src = fakes.data.data() + (static_cast<std::size_t>(b) * n_conditions + i) * cells;
            rotate_slab(src, aligned.data(), r, (4 - cond.quarter_turns()) % 4);
            for (std::size_t c = 0; c < cells; ++c) acc[c] += static_cast<double>(aligned[c]);
        }
        T* dst = merged.data.data() + static_cast<std::size_t>(b) * cells;
        for (std::size_t c = 0; c < cells; ++c)
            dst[c] = static_cast<T>(acc[c] / static_cast<double>(n_conditions));
    }
    return merged;
}

// dL/dfakes given dL/dmerged: route each cell back through the inverse
// rotation and scale by 1/n.
template <typename T>
Tensor<T> align_merge_backward(const Tensor<T>& dmerged, int n_conditions,
                               const std::vector<int>& fakes_shape) {
    const int b_rows = merge_rows(fakes_shape, n_conditions);
    require(dmerged.shape.size() == 5 && dmerged.shape[0] == b_rows &&
                dmerged.shape[2] == fakes_shape[2],
            "align_merge_backward: dmerged shape mismatch");
    const int r = fakes_shape[2];
    const std::size_t cells = static_cast<std::size_t>(r) * r * r;
    const T inv_n = T(1) / static_cast<T>(n_conditions);
    Tensor<T> dfakes(fakes_shape);
    for (int b = 0; b < b_rows; ++b) {
        const T* src = dmerged.data.data() + static_cast<std::size_t>(b) * cells;
        for (int i = 0; i < n_conditions; ++i) {
            const Condition cond = Condition::make(i, n_conditions);
            T* dst = dfakes.data.data() + (static_cast<std::size_t>(b) * n_conditions + i) * cells;
            rotate_slab(src, dst, r, cond.quarter_turns());
            for (std::size_t c = 0; c < cells; ++c) dst[c] *= inv_n;
        }
    }
    return dfakes;
}

}  // namespace pvgan
