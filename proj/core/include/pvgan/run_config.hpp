#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pvgan/dataset.hpp"
#include "pvgan/model.hpp"
#include "pvgan/trainer.hpp"

namespace pvgan {

enum class DatasetSource { kSynthetic, kDisk };

std::string to_string(DatasetSource s);
DatasetSource dataset_source_from_string(const std::string& s);

// The dataset section of a run config. Resolution and condition count live
// here only; the model section inherits them so the two can never disagree.
struct DatasetSection {
    DatasetSource source = DatasetSource::kSynthetic;
    std::string root;  // disk source only
    std::string class_name = "chair";
    int resolution = 32;
    int n_conditions = 2;
    PairingMode pairing = PairingMode::paired;
    int synth_count = 200;  // synthetic source only
};

struct RunConfig {
    DatasetSection dataset;
    ModelConfig model;      // resolution / n_conditions mirrored from dataset
    TrainConfig training;
};

RunConfig default_run_config();

// Strict JSON parse: unknown or ill-typed keys raise ConfigError naming the
// offending "section.key"; all semantic validation runs before returning.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical serialization; parse(serialize(c)) reproduces c, and the manifest
// hash is computed over exactly these bytes.
std::string serialize_run_config(const RunConfig& config);

void validate_run_config(const RunConfig& config);

// Materialize the dataset the config describes. Warning strings collect
// skipped objects for disk datasets.
std::vector<ConditionedSample> load_run_samples(const RunConfig& config,
                                                std::vector<std::string>* warnings = nullptr);

struct RunManifest {
    std::string run_id;
    std::string config_json;  // canonical resolved config
    std::string config_hash;  // git-style blob hash of config_json
    std::string created_at;   // UTC, ISO-8601
    std::string out_dir;
    std::vector<std::string> overrides;  // flag overrides as "section.key=value"
};

RunManifest make_manifest(const RunConfig& config, const std::string& out_dir,
                          const std::vector<std::string>& overrides);
std::string manifest_to_json(const RunManifest& manifest);
void write_manifest_json(const std::filesystem::path& path, const RunManifest& manifest);

// $PVGAN_OUT_ROOT if set, else ./runs
std::filesystem::path default_out_root();

}  // namespace pvgan
