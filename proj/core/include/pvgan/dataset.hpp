#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvgan/voxel_grid.hpp"

namespace pvgan {

struct ConditionedSample {
    VoxelGrid grid;
    Condition condition;
    std::string source_id;  // stable id of the underlying object instance
};

enum class PairingMode { paired, unpaired, split_half };

PairingMode pairing_mode_from_string(const std::string& s);
std::string to_string(PairingMode mode);

struct DatasetSpec {
    std::string class_name;
    int resolution = 32;
    int n_conditions = 2;
    PairingMode pairing_mode = PairingMode::paired;
    std::filesystem::path root;
    std::uint64_t seed = 0;
};

// Orientation slots on disk follow the 12 x 30-degree convention; only the
// quarter-turn slots are ever mapped to conditions:
//   n=2: O1 -> 0 deg, O7 -> 180 deg
//   n=4: O1 -> 0, O4 -> 90, O7 -> 180, O10 -> 270
// Returns the 1-based orientation number for each condition index.
std::vector<int> orientation_slots(int n_conditions);

// Scans <root>/<class>/<object_id>/O<k>.{vox1,binvox}, keeps only the
// orientations mapped to the requested conditions, pads resolution-2 grids
// into the declared resolution, and requires binary values. Objects missing a
// required orientation are skipped with a warning; unreadable files throw.
// Output is sorted by (source_id, condition index).
std::vector<ConditionedSample> load_class(const DatasetSpec& spec,
                                          std::vector<std::string>* warnings = nullptr);

// paired: keep every object's full condition set. unpaired: per-condition
// object order independently shuffled (correspondence by position destroyed;
// the sample set itself is unchanged). split_half: the seeded-shuffled object
// list is cut into n_conditions slices and slice i keeps only condition i.
std::vector<ConditionedSample> apply_pairing(std::vector<ConditionedSample> samples,
                                             PairingMode mode, std::uint64_t seed);

// Deterministic epoch batching: each epoch is a fresh seeded permutation of
// [0, n) cut into batch_size chunks, final short chunk retained.
class BatchPlan {
public:
    BatchPlan(std::size_t n_samples, int batch_size, std::uint64_t seed);

    std::size_t batches_per_epoch() const;
    // Batches of sample indices for the given epoch.
    std::vector<std::vector<std::size_t>> epoch(std::uint64_t epoch_index) const;

    std::size_t size() const { return n_; }
    int batch_size() const { return batch_size_; }

private:
    std::size_t n_;
    int batch_size_;
    std::uint64_t seed_;
};

// count rotationally asymmetric objects (compositions of axis-aligned solid
// boxes in loosely chair-like arrangements), each emitted once per condition
// by exact quarter-turn rotation. Deterministic in seed.
std::vector<ConditionedSample> synth_dataset(int count, int resolution, int n_conditions,
                                             std::uint64_t seed);

// Line-delimited object-id manifest; derivable by scanning, kept as a
// convenience artifact.
void write_manifest(const std::vector<std::string>& object_ids,
                    const std::filesystem::path& path);
std::vector<std::string> read_manifest(const std::filesystem::path& path);

}  // namespace pvgan
