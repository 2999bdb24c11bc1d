#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pvgan/voxel_grid.hpp"

namespace pvgan {

// Native VOX1 container: "VOX1" magic, little-endian u32 dx, dy, dz, one
// payload-flag byte, then the payload. Flag 0 is bit-packed occupancy
// (x-fastest, LSB-first within each byte), flag 1 is a little-endian float32
// array (x-fastest). Exactly dx*dy*dz logical entries; dimensions must be
// cubic to load into a VoxelGrid.
enum class Vox1Payload { bits = 0, floats = 1 };

VoxelGrid read_vox1(const std::filesystem::path& path);

// payload == nullopt picks bits when every value is exactly 0 or 1, floats
// otherwise, which keeps write->read->write byte-stable.
void write_vox1(const VoxelGrid& grid, const std::filesystem::path& path,
                std::optional<Vox1Payload> payload = std::nullopt);

// binvox translate/scale header lines are carried verbatim so a read-back
// grid re-serializes byte-identically; the pipeline itself ignores them.
struct BinvoxMeta {
    std::string translate = "0 0 0";
    std::string scale = "1";
    bool operator==(const BinvoxMeta&) const = default;
};

struct BinvoxFile {
    VoxelGrid grid;
    BinvoxMeta meta;
};

// binvox scan order is y-fastest: flat = x * R^2 + z * R + y. Data is a
// run-length stream of (value, count) byte pairs, runs capped at 255.
BinvoxFile read_binvox(const std::filesystem::path& path);

// Occupancy is value > 0.5; runs are emitted maximal-first so re-encoding a
// decoded file reproduces it exactly.
void write_binvox(const VoxelGrid& grid, const std::filesystem::path& path,
                  const BinvoxMeta& meta = {});

// Dispatch by extension: ".vox1" | ".binvox". binvox metadata is dropped.
VoxelGrid read_grid(const std::filesystem::path& path);
void write_grid(const VoxelGrid& grid, const std::filesystem::path& path);

// One unit cube (8 vertices, 12 triangles) per voxel above threshold.
// Returns the number of cubes written.
std::int64_t write_obj(const VoxelGrid& grid, const std::filesystem::path& path,
                       float threshold = 0.5f);

}  // namespace pvgan
