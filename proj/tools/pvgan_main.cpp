// pvgan command-line front end: ingest / train / generate / evaluate / export.
// Exit codes: 0 ok, 1 validation, 2 runtime or numeric, 3 I/O or format.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvgan/checkpoint.hpp"
#include "pvgan/dataset.hpp"
#include "pvgan/errors.hpp"
#include "pvgan/metrics.hpp"
#include "pvgan/model.hpp"
#include "pvgan/pair_ops.hpp"
#include "pvgan/run_config.hpp"
#include "pvgan/trainer.hpp"
#include "pvgan/voxel_grid.hpp"
#include "pvgan/voxel_io.hpp"

namespace fs = std::filesystem;
using namespace pvgan;

namespace {

// --- ingest -----------------------------------------------------------------

struct IngestOptions {
    std::string src, dst;
    std::string class_name = "chair";
    int resolution = 32;
    int n_conditions = 2;
    bool skip_bad = false;
};

// Recognize "<object>/O<k>.<ext>" and "<object>_O<k>.<ext>" layouts.
bool parse_orientation_path(const fs::path& p, std::string& object_id, int& slot) {
    const std::string stem = p.stem().string();
    std::size_t o_pos;
    if (stem.size() >= 2 && stem[0] == 'O' &&
        std::all_of(stem.begin() + 1, stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        object_id = p.parent_path().filename().string();
        o_pos = 1;
    } else {
        const std::size_t sep = stem.rfind("_O");
        if (sep == std::string::npos || sep + 2 >= stem.size()) return false;
        if (!std::all_of(stem.begin() + static_cast<std::ptrdiff_t>(sep) + 2, stem.end(),
                         [](char c) { return c >= '0' && c <= '9'; }))
            return false;
        object_id = stem.substr(0, sep);
        o_pos = sep + 2;
    }
    try {
        slot = std::stoi(stem.substr(o_pos));
    } catch (const std::exception&) {
        return false;
    }
    return slot >= 1 && !object_id.empty();
}

int cmd_ingest(const IngestOptions& opt) {
    const std::vector<int> keep_slots = orientation_slots(opt.n_conditions);
    std::vector<fs::path> files;
    if (!fs::exists(opt.src)) throw IoError("source directory not found: " + opt.src);
    for (const auto& entry : fs::recursive_directory_iterator(opt.src)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".binvox" || ext == ".vox1") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "warning: no .binvox/.vox1 files under " << opt.src << "\n";
        std::cout << "converted 0 files (0 objects), skipped 0 bad, ignored 0\n";
        return 0;
    }

    std::size_t converted = 0, bad = 0, ignored = 0;
    std::vector<std::string> object_ids;
    std::vector<std::string> failures;
    for (const fs::path& file : files) {
        std::string object_id;
        int slot = 0;
        if (!parse_orientation_path(file, object_id, slot) ||
            std::find(keep_slots.begin(), keep_slots.end(), slot) == keep_slots.end()) {
            ++ignored;
            continue;
        }
        try {
            VoxelGrid grid = read_grid(file);
            if (grid.resolution() == opt.resolution - 2) grid = pad_to_target(grid, opt.resolution);
            if (grid.resolution() != opt.resolution)
                throw FormatError(file.string() + ": resolution " +
                                  std::to_string(grid.resolution()) + " not ingestible to " +
                                  std::to_string(opt.resolution));
            for (const float v : grid.values())
                if (v != 0.0f && v != 1.0f)
                    throw FormatError(file.string() + ": non-binary occupancy value");
            const fs::path out_dir = fs::path(opt.dst) / opt.class_name / object_id;
            fs::create_directories(out_dir);
            write_vox1(grid, out_dir / ("O" + std::to_string(slot) + ".vox1"));
            ++converted;
            if (object_ids.empty() || object_ids.back() != object_id) object_ids.push_back(object_id);
        } catch (const FormatError& e) {
            ++bad;
            failures.push_back(file.string() + ": " + e.what());
        }
    }
    std::sort(object_ids.begin(), object_ids.end());
    object_ids.erase(std::unique(object_ids.begin(), object_ids.end()), object_ids.end());
    if (!object_ids.empty())
        write_manifest(object_ids, fs::path(opt.dst) / opt.class_name / "manifest.txt");

    for (const std::string& f : failures) std::cerr << "bad file: " << f << "\n";
    std::cout << "converted " << converted << " files (" << object_ids.size() << " objects), skipped "
              << bad << " bad, ignored " << ignored << "\n";
    if (bad > 0 && !opt.skip_bad) throw FormatError(std::to_string(bad) + " unparseable source files");
    return 0;
}

// --- train ------------------------------------------------------------------

struct TrainCli {
    std::string config_path;
    std::string out_dir;
    std::string resume;
    bool synthetic = false;
    bool baseline = false;
    bool paired = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<std::uint64_t> max_steps;
    std::optional<std::uint64_t> checkpoint_interval;
    std::optional<int> threads;
    std::optional<int> batch_size;
    std::optional<int> resolution;
    std::optional<int> n_conditions;
    std::optional<int> synth_count;
    std::optional<int> latent_dim;
    std::optional<int> base_channels;
    std::string data_root, class_name;
};

RunConfig resolve_train_config(const TrainCli& cli, std::vector<std::string>& overrides) {
    RunConfig config =
        cli.config_path.empty() ? default_run_config() : load_run_config(cli.config_path);
    const auto note = [&overrides](const std::string& kv) { overrides.push_back(kv); };
    if (cli.synthetic) {
        config.dataset.source = DatasetSource::kSynthetic;
        note("dataset.source=synthetic");
    }
    if (!cli.data_root.empty()) {
        config.dataset.source = DatasetSource::kDisk;
        config.dataset.root = cli.data_root;
        note("dataset.root=" + cli.data_root);
    }
    if (!cli.class_name.empty()) {
        config.dataset.class_name = cli.class_name;
        note("dataset.class_name=" + cli.class_name);
    }
    if (cli.resolution) {
        config.dataset.resolution = *cli.resolution;
        note("dataset.resolution=" + std::to_string(*cli.resolution));
    }
    if (cli.n_conditions) {
        config.dataset.n_conditions = *cli.n_conditions;
        note("dataset.n_conditions=" + std::to_string(*cli.n_conditions));
    }
    if (cli.synth_count) {
        config.dataset.synth_count = *cli.synth_count;
        note("dataset.synth_count=" + std::to_string(*cli.synth_count));
    }
    if (cli.latent_dim) {
        config.model.latent_dim = *cli.latent_dim;
        note("model.latent_dim=" + std::to_string(*cli.latent_dim));
    }
    if (cli.base_channels) {
        config.model.base_channels = *cli.base_channels;
        note("model.base_channels=" + std::to_string(*cli.base_channels));
    }
    if (cli.baseline) {
        config.training.paired_step_enabled = false;
        note("training.paired_step=false");
    }
    if (cli.paired) {
        config.training.paired_step_enabled = true;
        note("training.paired_step=true");
    }
    if (cli.seed) {
        config.training.seed = *cli.seed;
        note("training.seed=" + std::to_string(*cli.seed));
    }
    if (cli.epochs) {
        config.training.epochs = *cli.epochs;
        note("training.epochs=" + std::to_string(*cli.epochs));
    }
    if (cli.max_steps) {
        config.training.max_steps = *cli.max_steps;
        note("training.max_steps=" + std::to_string(*cli.max_steps));
    }
    if (cli.checkpoint_interval) {
        config.training.checkpoint_interval = *cli.checkpoint_interval;
        note("training.checkpoint_interval=" + std::to_string(*cli.checkpoint_interval));
    }
    if (cli.threads) {
        config.training.threads = *cli.threads;
        note("training.threads=" + std::to_string(*cli.threads));
    }
    if (cli.batch_size) {
        config.training.batch_size = *cli.batch_size;
        note("training.batch_size=" + std::to_string(*cli.batch_size));
    }
    config.model.resolution = config.dataset.resolution;
    config.model.n_conditions = config.dataset.n_conditions;
    validate_run_config(config);
    return config;
}

int cmd_train(const TrainCli& cli) {
    std::vector<std::string> overrides;
    const RunConfig config = resolve_train_config(cli, overrides);

    RunManifest manifest = make_manifest(config, "", overrides);
    const fs::path run_dir =
        cli.out_dir.empty() ? default_out_root() / manifest.run_id : fs::path(cli.out_dir);
    manifest.out_dir = run_dir.string();
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory " + run_dir.string() + ": " + ec.message());
    write_manifest_json(run_dir / "manifest.json", manifest);

    std::vector<std::string> warnings;
    std::vector<ConditionedSample> samples = load_run_samples(config, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "dataset: " << samples.size() << " samples ("
              << samples.size() / static_cast<std::size_t>(config.dataset.n_conditions)
              << " per condition on average), resolution " << config.dataset.resolution << "\n";

    Trainer<float> trainer(config.model, config.training, std::move(samples));
    if (!cli.resume.empty())
        trainer.adopt(load_checkpoint(cli.resume));
    else
        trainer.init_fresh();
    const std::uint64_t start = trainer.state().step;
    trainer.train(run_dir);
    std::cout << "trained steps " << start << ".." << trainer.state().step << " -> " << run_dir.string()
              << "\n";
    return 0;
}

// --- generate ---------------------------------------------------------------

struct GenerateCli {
    std::string checkpoint;
    std::string out_dir = ".";
    int n_latents = 1;
    std::uint64_t seed = 0;
    bool all_conditions = false;
    bool merge_out = false;
};

int cmd_generate(const GenerateCli& cli) {
    TrainerState<float> state = load_checkpoint(cli.checkpoint);
    const ModelConfig& mc = state.gen.config;
    const int n = mc.n_conditions;
    const bool all = cli.all_conditions || cli.merge_out;
    require(cli.n_latents >= 1, "n-latents must be >= 1");
    fs::create_directories(cli.out_dir);

    const int conds_per_latent = all ? n : 1;
    const int chunk = std::max(1, 64 / conds_per_latent);
    std::size_t written = 0;
    for (int start = 0; start < cli.n_latents; start += chunk) {
        const int rows = std::min(chunk, cli.n_latents - start);
        std::vector<std::vector<float>> z_expanded;
        std::vector<Condition> conds;
        for (int b = 0; b < rows; ++b) {
            Rng rng(derive_seed(cli.seed, "eval-z", static_cast<std::uint64_t>(start + b)));
            const std::vector<float> z = sample_latent<float>(mc, rng);
            for (int i = 0; i < conds_per_latent; ++i) {
                z_expanded.push_back(z);
                conds.push_back(Condition::make(i, n));
            }
        }
        const std::vector<VoxelGrid> grids =
            generator_forward(state.gen, z_expanded, conds, nn::BnMode::kTrainStatic);
        for (int b = 0; b < rows; ++b) {
            char name[64];
            std::vector<VoxelGrid> per_latent;
            std::vector<Condition> per_conds;
            for (int i = 0; i < conds_per_latent; ++i) {
                const VoxelGrid& g = grids[static_cast<std::size_t>(b * conds_per_latent + i)];
                std::snprintf(name, sizeof(name), "lat%03d_c%d.vox1", start + b, i);
                write_grid(g, fs::path(cli.out_dir) / name);
                ++written;
                per_latent.push_back(g);
                per_conds.push_back(Condition::make(i, n));
            }
            if (cli.merge_out) {
                const VoxelGrid merged = merge(align(per_latent, per_conds));
                std::snprintf(name, sizeof(name), "lat%03d_merged.vox1", start + b);
                write_grid(merged, fs::path(cli.out_dir) / name);
                ++written;
            }
        }
    }
    std::cout << "wrote " << written << " grid files to " << cli.out_dir << "\n";
    return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateCli {
    std::string checkpoint;
    std::string out_dir = ".";
    std::string label = "model";
    int n_latents = 128;
    std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateCli& cli) {
    TrainerState<float> state = load_checkpoint(cli.checkpoint);
    EvaluateOptions opts;
    opts.n_latents = cli.n_latents;
    opts.seed = cli.seed;
    const PairReport report = evaluate(state.gen, opts);

    fs::create_directories(cli.out_dir);
    const std::string table = format_report_table({{cli.label, report}});
    std::cout << table;
    std::ofstream table_file(fs::path(cli.out_dir) / "report_table.txt", std::ios::trunc);
    if (!table_file) throw IoError("cannot write report table in " + cli.out_dir);
    table_file << table;
    write_report_records(fs::path(cli.out_dir) / "report_records.tsv", cli.label, report);
    return 0;
}

// --- export -----------------------------------------------------------------

struct ExportCli {
    std::string grid_path;
    std::string obj_path;
    double threshold = 0.5;
};

int cmd_export(const ExportCli& cli) {
    const VoxelGrid grid = read_grid(cli.grid_path);
    const std::size_t cubes = write_obj(grid, cli.obj_path, static_cast<float>(cli.threshold));
    std::cout << "wrote " << cubes << " cubes to " << cli.obj_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paired-generation voxel GAN: training, evaluation and data tools"};
    app.require_subcommand(1);

    IngestOptions ingest;
    CLI::App* s_ingest = app.add_subcommand("ingest", "Convert voxel files into the dataset layout");
    s_ingest->add_option("src", ingest.src, "Source directory")->required();
    s_ingest->add_option("dst", ingest.dst, "Dataset root to write")->required();
    s_ingest->add_option("--class", ingest.class_name, "Class name in the output tree");
    s_ingest->add_option("--resolution", ingest.resolution, "Target resolution (30² inputs padded)");
    s_ingest->add_option("--n-conditions", ingest.n_conditions, "Condition count (2 or 4)");
    s_ingest->add_flag("--skip-bad", ingest.skip_bad, "Skip unparseable files instead of failing");

    TrainCli train_cli;
    CLI::App* s_train = app.add_subcommand("train", "Train a model from a config file or flags");
    s_train->add_option("--config", train_cli.config_path, "JSON run config");
    s_train->add_option("--out", train_cli.out_dir, "Run directory (default under PVGAN_OUT_ROOT)");
    s_train->add_option("--resume", train_cli.resume, "Checkpoint to resume from");
    s_train->add_flag("--synthetic", train_cli.synthetic, "Use the built-in synthetic dataset");
    CLI::Option* o_baseline =
        s_train->add_flag("--baseline", train_cli.baseline, "Disable the paired step (ablation)");
    s_train->add_flag("--paired", train_cli.paired, "Enable the paired step")->excludes(o_baseline);
    s_train->add_option("--seed", train_cli.seed, "Training seed");
    s_train->add_option("--epochs", train_cli.epochs, "Epoch count");
    s_train->add_option("--max-steps", train_cli.max_steps, "Hard cap on total steps");
    s_train->add_option("--checkpoint-interval", train_cli.checkpoint_interval,
                        "Checkpoint every k steps");
    s_train->add_option("--threads", train_cli.threads, "Math threads (1 = deterministic)");
    s_train->add_option("--batch-size", train_cli.batch_size, "Latents per step");
    s_train->add_option("--resolution", train_cli.resolution, "Grid resolution");
    s_train->add_option("--n-conditions", train_cli.n_conditions, "Condition count (2 or 4)");
    s_train->add_option("--synth-count", train_cli.synth_count, "Synthetic object count");
    s_train->add_option("--latent-dim", train_cli.latent_dim, "Latent dimension");
    s_train->add_option("--base-channels", train_cli.base_channels, "First-layer channel width");
    s_train->add_option("--data", train_cli.data_root, "Disk dataset root");
    s_train->add_option("--class", train_cli.class_name, "Dataset class name");

    GenerateCli gen_cli;
    CLI::App* s_generate = app.add_subcommand("generate", "Sample grids from a checkpoint");
    s_generate->add_option("checkpoint", gen_cli.checkpoint, "Checkpoint file")->required();
    s_generate->add_option("--out", gen_cli.out_dir, "Output directory");
    s_generate->add_option("--n-latents", gen_cli.n_latents, "Latent draws");
    s_generate->add_option("--seed", gen_cli.seed, "Latent seed");
    s_generate->add_flag("--all-conditions", gen_cli.all_conditions, "One grid per condition");
    s_generate->add_flag("--merge", gen_cli.merge_out, "Also write the aligned-averaged grid");

    EvaluateCli eval_cli;
    CLI::App* s_evaluate = app.add_subcommand("evaluate", "Pair-consistency metrics for a checkpoint");
    s_evaluate->add_option("checkpoint", eval_cli.checkpoint, "Checkpoint file")->required();
    s_evaluate->add_option("--out", eval_cli.out_dir, "Report directory");
    s_evaluate->add_option("--label", eval_cli.label, "Row label in the report");
    s_evaluate->add_option("--n-latents", eval_cli.n_latents, "Evaluation latent count");
    s_evaluate->add_option("--seed", eval_cli.seed, "Evaluation seed");

    ExportCli export_cli;
    CLI::App* s_export = app.add_subcommand("export", "Convert a grid file to a cube mesh");
    s_export->add_option("grid", export_cli.grid_path, "Input .vox1/.binvox file")->required();
    s_export->add_option("--obj", export_cli.obj_path, "Output OBJ path")->required();
    s_export->add_option("--threshold", export_cli.threshold, "Occupancy threshold");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(s_ingest)) return cmd_ingest(ingest);
        if (app.got_subcommand(s_train)) return cmd_train(train_cli);
        if (app.got_subcommand(s_generate)) return cmd_generate(gen_cli);
        if (app.got_subcommand(s_evaluate)) return cmd_evaluate(eval_cli);
        if (app.got_subcommand(s_export)) return cmd_export(export_cli);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
