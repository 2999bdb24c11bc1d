// Drives the installed binary as a subprocess; PVGAN_CLI_PATH is injected by
// the build so the tests always run the freshly built tool.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "pvgan/dataset.hpp"
#include "pvgan/trainer.hpp"
#include "pvgan/voxel_grid.hpp"
#include "pvgan/voxel_io.hpp"

using namespace pvgan;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = fs::temp_directory_path() / ("pvgan_cli_out_" + std::to_string(counter++));
    const std::string cmd = std::string(PVGAN_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    r.output = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    fs::remove(out);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "pvgan_cli_test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Small quick-training argument block shared by the training tests.
std::string tiny_train_args(const fs::path& out, std::uint64_t seed, const std::string& extra = "",
                            int epochs = 1) {
    return "train --synthetic --resolution 8 --n-conditions 2 --synth-count 6 --batch-size 3"
           " --epochs " +
           std::to_string(epochs) + " --latent-dim 6 --base-channels 8 --seed " +
           std::to_string(seed) + " --out " + out.string() + (extra.empty() ? "" : " " + extra);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage and parse errors exit 1, help exits 0") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("train --help").exit_code == 0);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("train --no-such-flag").exit_code == 1);
    CHECK(run_cli("generate").exit_code == 1);  // missing positional
    const RunResult r = run_cli("--help");
    CHECK(r.output.find("ingest") != std::string::npos);
    CHECK(r.output.find("evaluate") != std::string::npos);
}

TEST_CASE("baseline and paired flags are mutually exclusive") {
    const fs::path out = fresh_dir("exclusive");
    CHECK(run_cli(tiny_train_args(out, 1, "--baseline --paired")).exit_code == 1);
}

TEST_CASE("config validation failures exit 1") {
    const fs::path out = fresh_dir("badcfg");
    CHECK(run_cli(tiny_train_args(out, 1, "--n-conditions 3")).exit_code == 1);
    const fs::path cfg = out / "bad.json";
    {
        std::ofstream f(cfg);
        f << R"({"training": {"batch_syze": 4}})";
    }
    const RunResult r = run_cli("train --config " + cfg.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("batch_syze") != std::string::npos);
}

TEST_CASE("missing files exit 3") {
    CHECK(run_cli("evaluate /nonexistent/ckpt.pvgan").exit_code == 3);
    CHECK(run_cli("generate /nonexistent/ckpt.pvgan").exit_code == 3);
    CHECK(run_cli("export /nonexistent/grid.vox1 --obj /tmp/x.obj").exit_code == 3);
    CHECK(run_cli("train --config /nonexistent/config.json").exit_code == 3);

    // Corrupt checkpoint bytes are a format error, also 3.
    const fs::path dir = fresh_dir("corrupt");
    const fs::path ck = dir / "bad.pvgan";
    {
        std::ofstream f(ck, std::ios::binary);
        f << "PVGAN1 but not really";
    }
    CHECK(run_cli("evaluate " + ck.string()).exit_code == 3);
}

TEST_CASE("train, evaluate, generate, export pipeline") {
    const fs::path run = fresh_dir("pipeline_run");
    const RunResult t = run_cli(tiny_train_args(run, 7));
    CHECK(t.exit_code == 0);
    CHECK(fs::exists(run / "manifest.json"));
    CHECK(fs::exists(run / "train_log.tsv"));
    const fs::path ck = run / "ckpt_00000002.pvgan";  // 6 objects / batch 3 = 2 steps
    REQUIRE(fs::exists(ck));
    CHECK(read_step_log(run / "train_log.tsv").size() == 2);
    CHECK(slurp(run / "manifest.json").find("config_hash") != std::string::npos);

    const fs::path report = fresh_dir("pipeline_report");
    const RunResult e =
        run_cli("evaluate " + ck.string() + " --n-latents 3 --seed 2 --out " + report.string() +
                " --label tiny");
    CHECK(e.exit_code == 0);
    CHECK(e.output.find("tiny") != std::string::npos);
    CHECK(e.output.find("AVAR") != std::string::npos);
    CHECK(fs::exists(report / "report_table.txt"));
    const std::string records = slurp(report / "report_records.tsv");
    CHECK(records.find("tiny\t0\t") != std::string::npos);
    CHECK(records.find("tiny\tmean\t") != std::string::npos);

    const fs::path gen = fresh_dir("pipeline_gen");
    const RunResult g = run_cli("generate " + ck.string() + " --out " + gen.string() +
                                " --n-latents 2 --seed 5 --merge");
    CHECK(g.exit_code == 0);
    CHECK(fs::exists(gen / "lat000_c0.vox1"));
    CHECK(fs::exists(gen / "lat000_c1.vox1"));
    CHECK(fs::exists(gen / "lat001_merged.vox1"));

    // The merged file must equal an independent align+merge of the per-
    // condition grids.
    const VoxelGrid c0 = read_grid(gen / "lat000_c0.vox1");
    const VoxelGrid c1 = read_grid(gen / "lat000_c1.vox1");
    const VoxelGrid merged = read_grid(gen / "lat000_merged.vox1");
    const VoxelGrid recomputed =
        merge(align({c0, c1}, {Condition::make(0, 2), Condition::make(1, 2)}));
    CHECK(merged == recomputed);

    // Default generation: condition 0 only.
    const fs::path gen1 = fresh_dir("pipeline_gen_default");
    CHECK(run_cli("generate " + ck.string() + " --out " + gen1.string() + " --n-latents 1")
              .exit_code == 0);
    CHECK(fs::exists(gen1 / "lat000_c0.vox1"));
    CHECK_FALSE(fs::exists(gen1 / "lat000_c1.vox1"));

    // Export the merged grid to OBJ.
    const fs::path obj = gen / "merged.obj";
    const RunResult x =
        run_cli("export " + (gen / "lat000_merged.vox1").string() + " --obj " + obj.string());
    CHECK(x.exit_code == 0);
    CHECK(fs::exists(obj));
    CHECK(x.output.find("cubes") != std::string::npos);
    CHECK(run_cli("export " + (gen / "lat000_merged.vox1").string() + " --obj " + obj.string() +
                  " --threshold 1.5")
              .exit_code == 1);
}

TEST_CASE("resumed training reproduces the uninterrupted checkpoint") {
    // Uninterrupted: 6 objects, batch 3, 2 epochs -> 4 steps.
    const fs::path full = fresh_dir("resume_full");
    CHECK(run_cli(tiny_train_args(full, 9, "", 2)).exit_code == 0);
    REQUIRE(fs::exists(full / "ckpt_00000004.pvgan"));

    // Interrupted at 2 via --max-steps, resumed to 4.
    const fs::path part = fresh_dir("resume_part");
    CHECK(run_cli(tiny_train_args(part, 9, "--max-steps 2", 2)).exit_code == 0);
    REQUIRE(fs::exists(part / "ckpt_00000002.pvgan"));
    const fs::path part2 = fresh_dir("resume_part2");
    CHECK(run_cli(tiny_train_args(part2, 9,
                                  "--resume " + (part / "ckpt_00000002.pvgan").string(), 2))
              .exit_code == 0);
    REQUIRE(fs::exists(part2 / "ckpt_00000004.pvgan"));

    CHECK(slurp(full / "ckpt_00000004.pvgan") == slurp(part2 / "ckpt_00000004.pvgan"));
}

TEST_CASE("ingest converts both directory layouts") {
    const fs::path src = fresh_dir("ingest_src");
    const fs::path dst = fresh_dir("ingest_dst");
    const auto data = synth_dataset(2, 8, 2, 3);

    // Layout A: <object>/O<slot>.<ext>; layout B: <object>_O<slot>.<ext>.
    fs::create_directories(src / "objA");
    write_vox1(data[0].grid, src / "objA" / "O1.vox1");
    write_binvox(data[1].grid, src / "objA" / "O7.binvox");
    write_vox1(data[2].grid, src / "objB_O1.vox1");
    write_vox1(data[3].grid, src / "objB_O7.vox1");
    // Orientation outside the retained slots for n=2, and an unrelated file.
    write_vox1(data[0].grid, src / "objB_O4.vox1");
    { std::ofstream f(src / "notes.txt"); f << "not a voxel file\n"; }

    const RunResult r = run_cli("ingest " + src.string() + " " + dst.string() +
                                " --class chair --resolution 8 --n-conditions 2");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("converted 4 files (2 objects)") != std::string::npos);
    CHECK(fs::exists(dst / "chair" / "objA" / "O1.vox1"));
    CHECK(fs::exists(dst / "chair" / "objA" / "O7.vox1"));
    CHECK(fs::exists(dst / "chair" / "objB" / "O1.vox1"));
    CHECK(read_manifest(dst / "chair" / "manifest.txt") ==
          std::vector<std::string>{"objA", "objB"});
    // Binvox input is converted to vox1 with identical content.
    CHECK(read_grid(dst / "chair" / "objA" / "O7.vox1") == data[1].grid);

    // The converted tree trains directly.
    const fs::path run = fresh_dir("ingest_run");
    const RunResult t = run_cli(
        "train --data " + dst.string() +
        " --class chair --resolution 8 --n-conditions 2 --batch-size 2 --epochs 1"
        " --latent-dim 6 --base-channels 8 --seed 3 --out " +
        run.string());
    CHECK(t.exit_code == 0);
    CHECK(fs::exists(run / "ckpt_00000001.pvgan"));
}

TEST_CASE("ingest failure modes") {
    const fs::path src = fresh_dir("ingest_bad_src");
    const fs::path dst = fresh_dir("ingest_bad_dst");

    // Empty source: warning, zero conversions, still exit 0.
    const RunResult empty = run_cli("ingest " + src.string() + " " + dst.string());
    CHECK(empty.exit_code == 0);
    CHECK(empty.output.find("converted 0 files") != std::string::npos);

    // A malformed voxel file fails the run unless --skip-bad is given.
    const auto data = synth_dataset(1, 8, 2, 4);
    write_vox1(data[0].grid, src / "objC_O1.vox1");
    write_vox1(data[1].grid, src / "objC_O7.vox1");
    { std::ofstream f(src / "objD_O1.vox1", std::ios::binary); f << "VOX1 garbage"; }

    CHECK(run_cli("ingest " + src.string() + " " + dst.string() + " --resolution 8").exit_code == 3);
    const RunResult skip = run_cli("ingest " + src.string() + " " + dst.string() +
                                   " --resolution 8 --skip-bad");
    CHECK(skip.exit_code == 0);
    CHECK(skip.output.find("converted 2 files (1 objects), skipped 1 bad") != std::string::npos);

    // Wrong-resolution content is rejected per file.
    const fs::path src2 = fresh_dir("ingest_band_src");
    const fs::path dst2 = fresh_dir("ingest_band_dst");
    write_vox1(VoxelGrid(4, 1.0f), src2 / "objE_O1.vox1");
    CHECK(run_cli("ingest " + src2.string() + " " + dst2.string() + " --resolution 8").exit_code ==
          3);
    CHECK(run_cli("ingest /nonexistent/source " + dst2.string()).exit_code == 3);
}

TEST_CASE("ingest pads 30-cell grids into 32-cell datasets") {
    const fs::path src = fresh_dir("ingest_pad_src");
    const fs::path dst = fresh_dir("ingest_pad_dst");
    VoxelGrid small(30);
    small.at(0, 0, 0) = 1.0f;
    small.at(15, 20, 7) = 1.0f;
    write_vox1(small, src / "objF_O1.vox1");
    write_vox1(small, src / "objF_O7.vox1");

    CHECK(run_cli("ingest " + src.string() + " " + dst.string()).exit_code == 0);
    const VoxelGrid padded = read_grid(dst / "chair" / "objF" / "O1.vox1");
    CHECK(padded.resolution() == 32);
    CHECK(padded.at(1, 1, 1) == 1.0f);
    CHECK(padded.at(16, 21, 8) == 1.0f);
    CHECK(occupied_count(padded) == 2);
}
