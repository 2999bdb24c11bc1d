#include "pvgan/run_config.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pvgan/sha1.hpp"

namespace pvgan {

using nlohmann::json;

std::string to_string(DatasetSource s) {
    return s == DatasetSource::kSynthetic ? "synthetic" : "disk";
}

DatasetSource dataset_source_from_string(const std::string& s) {
    if (s == "synthetic") return DatasetSource::kSynthetic;
    if (s == "disk") return DatasetSource::kDisk;
    throw ConfigError("unknown dataset source: " + s);
}

RunConfig default_run_config() {
    RunConfig c;
    c.model.resolution = c.dataset.resolution;
    c.model.n_conditions = c.dataset.n_conditions;
    return c;
}

namespace {

// Typed field extraction with "section.key" error context.
template <typename T>
T field_as(const json& section, const std::string& section_name, const std::string& key,
           const T& fallback) {
    if (!section.contains(key)) return fallback;
    try {
        return section.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value type for " + section_name + "." + key);
    }
}

void reject_unknown(const json& section, const std::string& section_name,
                    const std::set<std::string>& known) {
    for (const auto& [key, value] : section.items()) {
        (void)value;
        if (known.find(key) == known.end())
            throw ConfigError("unknown key " + section_name + "." + key);
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(root, "config", {"dataset", "model", "training"});

    RunConfig c = default_run_config();

    if (root.contains("dataset")) {
        const json& d = root.at("dataset");
        if (!d.is_object()) throw ConfigError("dataset section must be an object");
        reject_unknown(d, "dataset",
                       {"source", "root", "class_name", "resolution", "n_conditions", "pairing",
                        "synth_count"});
        c.dataset.source = dataset_source_from_string(
            field_as<std::string>(d, "dataset", "source", to_string(c.dataset.source)));
        c.dataset.root = field_as<std::string>(d, "dataset", "root", c.dataset.root);
        c.dataset.class_name = field_as<std::string>(d, "dataset", "class_name", c.dataset.class_name);
        c.dataset.resolution = field_as<int>(d, "dataset", "resolution", c.dataset.resolution);
        c.dataset.n_conditions = field_as<int>(d, "dataset", "n_conditions", c.dataset.n_conditions);
        c.dataset.pairing = pairing_mode_from_string(
            field_as<std::string>(d, "dataset", "pairing", to_string(c.dataset.pairing)));
        c.dataset.synth_count = field_as<int>(d, "dataset", "synth_count", c.dataset.synth_count);
    }

    if (root.contains("model")) {
        const json& m = root.at("model");
        if (!m.is_object()) throw ConfigError("model section must be an object");
        reject_unknown(m, "model",
                       {"latent_dim", "base_channels", "condition_encoding", "latent_prior",
                        "leaky_slope", "init_std", "bn_eps", "bn_momentum"});
        c.model.latent_dim = field_as<int>(m, "model", "latent_dim", c.model.latent_dim);
        c.model.base_channels = field_as<int>(m, "model", "base_channels", c.model.base_channels);
        c.model.condition_encoding = condition_encoding_from_string(field_as<std::string>(
            m, "model", "condition_encoding", to_string(c.model.condition_encoding)));
        c.model.latent_prior = latent_prior_from_string(
            field_as<std::string>(m, "model", "latent_prior", to_string(c.model.latent_prior)));
        c.model.leaky_slope = field_as<double>(m, "model", "leaky_slope", c.model.leaky_slope);
        c.model.init_std = field_as<double>(m, "model", "init_std", c.model.init_std);
        c.model.bn_eps = field_as<double>(m, "model", "bn_eps", c.model.bn_eps);
        c.model.bn_momentum = field_as<double>(m, "model", "bn_momentum", c.model.bn_momentum);
    }

    if (root.contains("training")) {
        const json& t = root.at("training");
        if (!t.is_object()) throw ConfigError("training section must be an object");
        reject_unknown(t, "training",
                       {"lr_generator", "lr_discriminator", "adam_beta1", "adam_beta2", "adam_eps",
                        "batch_size", "epochs", "gate_threshold", "paired_step", "pair_loss_weight",
                        "generator_loss", "prob_clamp", "seed", "max_steps", "checkpoint_interval",
                        "threads"});
        TrainConfig& tc = c.training;
        tc.lr_generator = field_as<double>(t, "training", "lr_generator", tc.lr_generator);
        tc.lr_discriminator = field_as<double>(t, "training", "lr_discriminator", tc.lr_discriminator);
        tc.adam_beta1 = field_as<double>(t, "training", "adam_beta1", tc.adam_beta1);
        tc.adam_beta2 = field_as<double>(t, "training", "adam_beta2", tc.adam_beta2);
        tc.adam_eps = field_as<double>(t, "training", "adam_eps", tc.adam_eps);
        tc.batch_size = field_as<int>(t, "training", "batch_size", tc.batch_size);
        tc.epochs = field_as<int>(t, "training", "epochs", tc.epochs);
        tc.gate_threshold = field_as<double>(t, "training", "gate_threshold", tc.gate_threshold);
        tc.paired_step_enabled = field_as<bool>(t, "training", "paired_step", tc.paired_step_enabled);
        tc.pair_loss_weight = field_as<double>(t, "training", "pair_loss_weight", tc.pair_loss_weight);
        tc.generator_loss = generator_loss_from_string(
            field_as<std::string>(t, "training", "generator_loss", to_string(tc.generator_loss)));
        tc.prob_clamp = field_as<double>(t, "training", "prob_clamp", tc.prob_clamp);
        tc.seed = field_as<std::uint64_t>(t, "training", "seed", tc.seed);
        tc.max_steps = field_as<std::uint64_t>(t, "training", "max_steps", tc.max_steps);
        tc.checkpoint_interval =
            field_as<std::uint64_t>(t, "training", "checkpoint_interval", tc.checkpoint_interval);
        tc.threads = field_as<int>(t, "training", "threads", tc.threads);
    }

    c.model.resolution = c.dataset.resolution;
    c.model.n_conditions = c.dataset.n_conditions;
    validate_run_config(c);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on config file: " + path.string());
    return parse_run_config(text);
}

void validate_run_config(const RunConfig& config) {
    if (config.dataset.source == DatasetSource::kDisk && config.dataset.root.empty())
        throw ConfigError("dataset.root is required for a disk dataset");
    if (config.dataset.source == DatasetSource::kSynthetic && config.dataset.synth_count < 1)
        throw ConfigError("dataset.synth_count must be >= 1");
    if (config.dataset.class_name.empty()) throw ConfigError("dataset.class_name must be nonempty");
    if (config.model.resolution != config.dataset.resolution ||
        config.model.n_conditions != config.dataset.n_conditions)
        throw ConfigError("model resolution/n_conditions must mirror the dataset section");
    config.model.validate();
    config.training.validate();
}

std::string serialize_run_config(const RunConfig& c) {
    json root;
    root["dataset"] = {{"source", to_string(c.dataset.source)},
                       {"root", c.dataset.root},
                       {"class_name", c.dataset.class_name},
                       {"resolution", c.dataset.resolution},
                       {"n_conditions", c.dataset.n_conditions},
                       {"pairing", to_string(c.dataset.pairing)},
                       {"synth_count", c.dataset.synth_count}};
    root["model"] = {{"latent_dim", c.model.latent_dim},
                     {"base_channels", c.model.base_channels},
                     {"condition_encoding", to_string(c.model.condition_encoding)},
                     {"latent_prior", to_string(c.model.latent_prior)},
                     {"leaky_slope", c.model.leaky_slope},
                     {"init_std", c.model.init_std},
                     {"bn_eps", c.model.bn_eps},
                     {"bn_momentum", c.model.bn_momentum}};
    root["training"] = {{"lr_generator", c.training.lr_generator},
                        {"lr_discriminator", c.training.lr_discriminator},
                        {"adam_beta1", c.training.adam_beta1},
                        {"adam_beta2", c.training.adam_beta2},
                        {"adam_eps", c.training.adam_eps},
                        {"batch_size", c.training.batch_size},
                        {"epochs", c.training.epochs},
                        {"gate_threshold", c.training.gate_threshold},
                        {"paired_step", c.training.paired_step_enabled},
                        {"pair_loss_weight", c.training.pair_loss_weight},
                        {"generator_loss", to_string(c.training.generator_loss)},
                        {"prob_clamp", c.training.prob_clamp},
                        {"seed", c.training.seed},
                        {"max_steps", c.training.max_steps},
                        {"checkpoint_interval", c.training.checkpoint_interval},
                        {"threads", c.training.threads}};
    return root.dump(2) + "\n";
}

std::vector<ConditionedSample> load_run_samples(const RunConfig& config,
                                                std::vector<std::string>* warnings) {
    if (config.dataset.source == DatasetSource::kSynthetic)
        return synth_dataset(config.dataset.synth_count, config.dataset.resolution,
                             config.dataset.n_conditions, config.training.seed);
    DatasetSpec spec;
    spec.class_name = config.dataset.class_name;
    spec.resolution = config.dataset.resolution;
    spec.n_conditions = config.dataset.n_conditions;
    spec.pairing_mode = config.dataset.pairing;
    spec.root = config.dataset.root;
    spec.seed = config.training.seed;
    std::vector<ConditionedSample> samples = load_class(spec, warnings);
    return apply_pairing(std::move(samples), spec.pairing_mode, spec.seed);
}

namespace {
std::string utc_now_iso8601() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}
}  // namespace

RunManifest make_manifest(const RunConfig& config, const std::string& out_dir,
                          const std::vector<std::string>& overrides) {
    RunManifest m;
    m.config_json = serialize_run_config(config);
    m.config_hash = git_blob_hash(m.config_json);
    m.created_at = utc_now_iso8601();
    m.out_dir = out_dir;
    m.overrides = overrides;
    std::string compact;  // 2026-08-23T10:11:12Z -> 20260823101112
    for (char ch : m.created_at)
        if (ch >= '0' && ch <= '9') compact.push_back(ch);
    m.run_id = compact + "-" + m.config_hash.substr(0, 8);
    return m;
}

std::string manifest_to_json(const RunManifest& m) {
    json root;
    root["run_id"] = m.run_id;
    root["config"] = json::parse(m.config_json);
    root["config_hash"] = m.config_hash;
    root["created_at"] = m.created_at;
    root["out_dir"] = m.out_dir;
    root["overrides"] = m.overrides;
    return root.dump(2) + "\n";
}

void write_manifest_json(const std::filesystem::path& path, const RunManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open manifest for writing: " + path.string());
    out << manifest_to_json(manifest);
    if (!out) throw IoError("write failed on manifest: " + path.string());
}

std::filesystem::path default_out_root() {
    const char* env = std::getenv("PVGAN_OUT_ROOT");
    if (env != nullptr && *env != '\0') return std::filesystem::path(env);
    return std::filesystem::path("runs");
}

}  // namespace pvgan
