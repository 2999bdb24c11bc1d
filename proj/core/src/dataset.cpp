#include "pvgan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "pvgan/rng.hpp"
#include "pvgan/voxel_io.hpp"

namespace fs = std::filesystem;

namespace pvgan {

PairingMode pairing_mode_from_string(const std::string& s) {
    if (s == "paired") return PairingMode::paired;
    if (s == "unpaired") return PairingMode::unpaired;
    if (s == "split-half" || s == "split_half") return PairingMode::split_half;
    throw ConfigError("pairing_mode: unknown value '" + s + "'");
}

std::string to_string(PairingMode mode) {
    switch (mode) {
        case PairingMode::paired: return "paired";
        case PairingMode::unpaired: return "unpaired";
        case PairingMode::split_half: return "split-half";
    }
    return "?";
}

std::vector<int> orientation_slots(int n_conditions) {
    Condition::make(0, n_conditions);  // validates n
    if (n_conditions == 2) return {1, 7};
    return {1, 4, 7, 10};
}

namespace {

// O<k>.vox1 preferred over O<k>.binvox when both exist.
fs::path orientation_file(const fs::path& object_dir, int slot) {
    const fs::path vox1 = object_dir / ("O" + std::to_string(slot) + ".vox1");
    if (fs::exists(vox1)) return vox1;
    const fs::path binvox = object_dir / ("O" + std::to_string(slot) + ".binvox");
    if (fs::exists(binvox)) return binvox;
    return {};
}

void check_binary(const VoxelGrid& g, const fs::path& path) {
    for (float v : g.values())
        if (v != 0.0f && v != 1.0f)
            throw FormatError(path.string() + ": dataset grid is not binary-valued", 0);
}

}  // namespace

std::vector<ConditionedSample> load_class(const DatasetSpec& spec,
                                          std::vector<std::string>* warnings) {
    const auto slots = orientation_slots(spec.n_conditions);
    const fs::path class_dir = spec.root / spec.class_name;
    std::vector<ConditionedSample> out;
    if (!fs::exists(class_dir)) return out;

    std::vector<std::string> object_ids;
    for (const auto& entry : fs::directory_iterator(class_dir))
        if (entry.is_directory()) object_ids.push_back(entry.path().filename().string());
    std::sort(object_ids.begin(), object_ids.end());

    for (const auto& id : object_ids) {
        const fs::path obj_dir = class_dir / id;
        std::vector<ConditionedSample> object_samples;
        bool complete = true;
        for (int c = 0; c < spec.n_conditions; ++c) {
            const fs::path file = orientation_file(obj_dir, slots[static_cast<std::size_t>(c)]);
            if (file.empty()) {
                if (warnings)
                    warnings->push_back("skipping object '" + id + "': missing orientation O" +
                                        std::to_string(slots[static_cast<std::size_t>(c)]));
                complete = false;
                break;
            }
            VoxelGrid g = read_grid(file);
            if (g.resolution() == spec.resolution - 2) g = pad_to_target(g, spec.resolution);
            if (g.resolution() != spec.resolution)
                throw FormatError(file.string() + ": resolution " +
                                      std::to_string(g.resolution()) + " does not match dataset " +
                                      std::to_string(spec.resolution),
                                  0);
            check_binary(g, file);
            object_samples.push_back(
                {std::move(g), Condition::make(c, spec.n_conditions), id});
        }
        if (complete)
            for (auto& s : object_samples) out.push_back(std::move(s));
    }
    return out;
}

std::vector<ConditionedSample> apply_pairing(std::vector<ConditionedSample> samples,
                                             PairingMode mode, std::uint64_t seed) {
    if (mode == PairingMode::paired || samples.empty()) return samples;

    // Stable per-condition object lists, in first-appearance order.
    std::map<int, std::vector<std::size_t>> by_condition;
    for (std::size_t i = 0; i < samples.size(); ++i)
        by_condition[samples[i].condition.index].push_back(i);

    if (mode == PairingMode::unpaired) {
        std::vector<ConditionedSample> out;
        out.reserve(samples.size());
        for (auto& [cond, indices] : by_condition) {
            Rng rng(derive_seed(seed, "unpaired", static_cast<std::uint64_t>(cond)));
            const auto perm = rng.permutation(indices.size());
            for (std::size_t k = 0; k < indices.size(); ++k)
                out.push_back(samples[indices[perm[k]]]);
        }
        return out;
    }

    // split_half: slice the shuffled object list, slice i keeps condition i.
    std::vector<std::string> object_ids;
    std::set<std::string> seen;
    for (const auto& s : samples)
        if (seen.insert(s.source_id).second) object_ids.push_back(s.source_id);

    Rng rng(derive_seed(seed, "split-half"));
    const auto perm = rng.permutation(object_ids.size());
    const int n_cond = samples.front().condition.n_conditions;
    std::map<std::string, int> slice_of;
    for (std::size_t k = 0; k < object_ids.size(); ++k) {
        const int slice = static_cast<int>(k * static_cast<std::size_t>(n_cond) /
                                           object_ids.size());
        slice_of[object_ids[perm[k]]] = slice;
    }

    std::vector<ConditionedSample> out;
    for (auto& s : samples)
        if (slice_of.at(s.source_id) == s.condition.index) out.push_back(std::move(s));
    return out;
}

BatchPlan::BatchPlan(std::size_t n_samples, int batch_size, std::uint64_t seed)
    : n_(n_samples), batch_size_(batch_size), seed_(seed) {
    require(batch_size >= 1, "batches: batch_size must be >= 1");
}

std::size_t BatchPlan::batches_per_epoch() const {
    return (n_ + static_cast<std::size_t>(batch_size_) - 1) /
           static_cast<std::size_t>(batch_size_);
}

std::vector<std::vector<std::size_t>> BatchPlan::epoch(std::uint64_t epoch_index) const {
    Rng rng(derive_seed(seed_, "epoch", epoch_index));
    const auto perm = rng.permutation(n_);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n_; start += static_cast<std::size_t>(batch_size_)) {
        const std::size_t end = std::min(n_, start + static_cast<std::size_t>(batch_size_));
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

namespace {

struct Box {
    int x0, x1, y0, y1, z0, z1;  // half-open
};

void fill_box(VoxelGrid& g, const Box& b) {
    for (int z = b.z0; z < b.z1; ++z)
        for (int y = b.y0; y < b.y1; ++y)
            for (int x = b.x0; x < b.x1; ++x) g.at(x, y, z) = 1.0f;
}

// A loosely chair-like composition: seat slab, back panel on one z side,
// optional legs and one-sided armrest. The back panel alone breaks every
// nonzero quarter-turn symmetry for generic dimensions.
VoxelGrid random_shape(int r, Rng& rng) {
    VoxelGrid g(r);
    const auto frac = [&](double lo, double hi) {
        return std::max(1, static_cast<int>(std::lround((lo + (hi - lo) * rng.uniform()) * r)));
    };

    const int seat_w = frac(0.35, 0.65);
    const int seat_d = frac(0.35, 0.65);
    const int seat_t = std::max(1, r / 8);
    const int leg_h = frac(0.1, 0.3);
    const int x0 = rng.uniform_int(1, std::max(1, r - seat_w - 1));
    const int z0 = rng.uniform_int(1, std::max(1, r - seat_d - 1));

    fill_box(g, {x0, x0 + seat_w, leg_h, leg_h + seat_t, z0, z0 + seat_d});

    const int back_t = std::max(1, r / 8);
    const int back_h = std::min(r, leg_h + seat_t + frac(0.25, 0.5));
    fill_box(g, {x0, x0 + seat_w, leg_h + seat_t, back_h, z0, std::min(r, z0 + back_t)});

    if (rng.uniform() < 0.7) {
        const int leg = std::max(1, r / 10);
        fill_box(g, {x0, x0 + leg, 0, leg_h, z0, z0 + leg});
        fill_box(g, {x0 + seat_w - leg, x0 + seat_w, 0, leg_h, z0, z0 + leg});
        fill_box(g, {x0, x0 + leg, 0, leg_h, z0 + seat_d - leg, z0 + seat_d});
        fill_box(g, {x0 + seat_w - leg, x0 + seat_w, 0, leg_h, z0 + seat_d - leg, z0 + seat_d});
    } else {
        fill_box(g, {x0, x0 + seat_w, 0, leg_h, z0, z0 + seat_d});  // solid base
    }

    if (rng.uniform() < 0.5) {
        const int arm_t = std::max(1, r / 10);
        const int arm_h = std::min(r, leg_h + seat_t + frac(0.1, 0.25));
        fill_box(g, {x0, x0 + arm_t, leg_h + seat_t, arm_h, z0, z0 + seat_d});
    }
    return g;
}

bool asymmetric(const VoxelGrid& g) {
    for (int k = 1; k < 4; ++k)
        if (rotate_quarter(g, k) == g) return false;
    return true;
}

}  // namespace

std::vector<ConditionedSample> synth_dataset(int count, int resolution, int n_conditions,
                                             std::uint64_t seed) {
    require(resolution == 8 || resolution == 16 || resolution == 32,
            "synth_dataset: resolution must be 8, 16 or 32");
    Condition::make(0, n_conditions);

    std::vector<ConditionedSample> out;
    out.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(n_conditions));
    char id_buf[32];
    for (int obj = 0; obj < count; ++obj) {
        Rng rng(derive_seed(seed, "synth", static_cast<std::uint64_t>(obj)));
        VoxelGrid base = random_shape(resolution, rng);
        while (!asymmetric(base)) base = random_shape(resolution, rng);

        std::snprintf(id_buf, sizeof(id_buf), "synth-%05d", obj);
        for (int c = 0; c < n_conditions; ++c) {
            const Condition cond = Condition::make(c, n_conditions);
            out.push_back({rotate_quarter(base, cond.quarter_turns()), cond, id_buf});
        }
    }
    return out;
}

void write_manifest(const std::vector<std::string>& object_ids, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& id : object_ids) out << id << "\n";
    if (!out.good()) throw IoError("write failure on " + path.string());
}

std::vector<std::string> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ids.push_back(line);
    return ids;
}

}  // namespace pvgan
