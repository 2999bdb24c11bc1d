#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "pvgan/checkpoint.hpp"
#include "pvgan/dataset.hpp"
#include "pvgan/errors.hpp"
#include "pvgan/trainer.hpp"

using namespace pvgan;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_model() {
    ModelConfig c;
    c.resolution = 8;
    c.latent_dim = 6;
    c.base_channels = 8;
    c.n_conditions = 2;
    return c;
}

TrainConfig tiny_train(std::uint64_t seed = 11) {
    TrainConfig t;
    t.batch_size = 3;
    t.epochs = 2;
    t.seed = seed;
    t.lr_generator = 1e-3;
    t.lr_discriminator = 1e-3;
    return t;
}

Trainer<float> make_trainer(TrainConfig t, int objects = 7) {
    Trainer<float> trainer(tiny_model(), t, synth_dataset(objects, 8, 2, 5));
    trainer.init_fresh();
    return trainer;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "pvgan_training_test" / name;
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("trainer construction validates its inputs") {
    CHECK_THROWS_AS(Trainer<float>(tiny_model(), tiny_train(), {}), ContractError);
    // Conditions must match the model's family.
    CHECK_THROWS_AS(Trainer<float>(tiny_model(), tiny_train(), synth_dataset(4, 8, 4, 1)),
                    ContractError);
    // Resolution must match.
    auto wrong_res = synth_dataset(4, 16, 2, 1);
    CHECK_THROWS_AS(Trainer<float>(tiny_model(), tiny_train(), std::move(wrong_res)),
                    ContractError);
    // One condition entirely absent.
    auto data = synth_dataset(4, 8, 2, 1);
    std::erase_if(data, [](const ConditionedSample& s) { return s.condition.index == 1; });
    CHECK_THROWS_AS(Trainer<float>(tiny_model(), tiny_train(), std::move(data)), ContractError);
}

TEST_CASE("step accounting") {
    // 7 objects, batch 3 -> ceil(7/3) = 3 steps per epoch, short last batch.
    Trainer<float> trainer = make_trainer(tiny_train());
    CHECK(trainer.steps_per_epoch() == 3);
    CHECK(trainer.total_steps() == 6);  // 2 epochs

    TrainConfig capped = tiny_train();
    capped.max_steps = 4;
    Trainer<float> trainer2 = make_trainer(capped);
    CHECK(trainer2.total_steps() == 4);

    TrainConfig none = tiny_train();
    none.epochs = 0;
    CHECK(make_trainer(none).total_steps() == 0);
}

TEST_CASE("first step trains the discriminator, high accuracy gates it off") {
    Trainer<float> trainer = make_trainer(tiny_train());
    const std::uint64_t d_before = trainer.state().disc.params_checksum();
    const StepLogEntry e0 = trainer.step_once();
    CHECK(e0.step == 0);
    CHECK(e0.d_accuracy_prev == 0.0);
    CHECK(e0.d_updated);  // initial gate state always lets D train
    CHECK(trainer.state().disc.params_checksum() != d_before);
    CHECK(trainer.state().opt_d.t == 1);
    CHECK(trainer.state().prev_accuracy >= 0.0);
    CHECK(trainer.state().prev_accuracy <= 1.0);

    // Force the gate shut and verify D is untouched for a whole step.
    trainer.state().prev_accuracy = 0.97;
    const std::uint64_t d_mid = trainer.state().disc.params_checksum();
    const std::uint64_t g_mid = trainer.state().gen.params_checksum();
    const StepLogEntry e1 = trainer.step_once();
    CHECK(e1.d_accuracy_prev == 0.97);
    CHECK_FALSE(e1.d_updated);
    CHECK(trainer.state().disc.params_checksum() == d_mid);   // gated off
    CHECK(trainer.state().gen.params_checksum() != g_mid);    // G still learns
    CHECK(trainer.state().opt_d.t == 1);                      // no extra D step
    CHECK(trainer.state().opt_g.t == 4);                      // 2 steps x (adv + paired)

    // Exactly at the threshold the gate stays open (< comparison).
    trainer.state().prev_accuracy = 0.95;
    const StepLogEntry e2 = trainer.step_once();
    CHECK_FALSE(e2.d_updated);
    trainer.state().prev_accuracy = 0.9499;
    const StepLogEntry e3 = trainer.step_once();
    CHECK(e3.d_updated);
}

TEST_CASE("accuracy is measured before the discriminator update") {
    Trainer<float> trainer = make_trainer(tiny_train());
    const StepLogEntry e0 = trainer.step_once();
    // The accuracy recorded for the gate becomes the next step's log entry.
    const double recorded = trainer.state().prev_accuracy;
    const StepLogEntry e1 = trainer.step_once();
    CHECK(e1.d_accuracy_prev == recorded);
    CHECK(e0.step + 1 == e1.step);
}

TEST_CASE("paired phase touches only the generator") {
    Trainer<float> trainer = make_trainer(tiny_train());
    std::uint64_t d_after_phase1 = 0, d_after_phase3 = 0;
    std::uint64_t g_after_phase2 = 0, g_after_phase3 = 0;
    std::uint64_t opt_g_after_phase2 = 0;
    trainer.phase_hook = [&](StepPhase phase, Trainer<float>& t) {
        switch (phase) {
            case StepPhase::kDiscriminator: d_after_phase1 = t.state().disc.params_checksum(); break;
            case StepPhase::kGenerator:
                g_after_phase2 = t.state().gen.params_checksum();
                opt_g_after_phase2 = t.state().opt_g.t;
                break;
            case StepPhase::kPaired:
                d_after_phase3 = t.state().disc.params_checksum();
                g_after_phase3 = t.state().gen.params_checksum();
                break;
            case StepPhase::kStepDone: break;
        }
    };
    trainer.step_once();
    CHECK(d_after_phase1 == d_after_phase3);  // D frozen through phases 2-3
    CHECK(g_after_phase2 != g_after_phase3);  // paired update moved G
    CHECK(trainer.state().opt_g.t == opt_g_after_phase2 + 1);
}

TEST_CASE("disabling the paired step changes nothing else in the step") {
    TrainConfig paired_cfg = tiny_train(21);
    TrainConfig baseline_cfg = paired_cfg;
    baseline_cfg.paired_step_enabled = false;

    Trainer<float> paired = make_trainer(paired_cfg);
    Trainer<float> baseline = make_trainer(baseline_cfg);

    const StepLogEntry p0 = paired.step_once();
    const StepLogEntry b0 = baseline.step_once();
    // Identical inputs and identical adversarial phases on step 0.
    CHECK(p0.d_loss == b0.d_loss);
    CHECK(p0.g_loss == b0.g_loss);
    CHECK(p0.pair_loss > 0.0);
    CHECK(b0.pair_loss == 0.0);
    // The discriminator ends the step byte-identical either way.
    CHECK(paired.state().disc.params_checksum() == baseline.state().disc.params_checksum());
    CHECK(paired.state().prev_accuracy == baseline.state().prev_accuracy);
    // The generators diverge only through the extra update.
    CHECK(paired.state().gen.params_checksum() != baseline.state().gen.params_checksum());
    CHECK(paired.state().opt_g.t == 2);
    CHECK(baseline.state().opt_g.t == 1);
}

TEST_CASE("training is bitwise deterministic") {
    Trainer<float> a = make_trainer(tiny_train(33));
    Trainer<float> b = make_trainer(tiny_train(33));
    for (int s = 0; s < 3; ++s) {
        const StepLogEntry ea = a.step_once();
        const StepLogEntry eb = b.step_once();
        CHECK(ea.d_loss == eb.d_loss);
        CHECK(ea.g_loss == eb.g_loss);
        CHECK(ea.pair_loss == eb.pair_loss);
        CHECK(ea.d_accuracy_prev == eb.d_accuracy_prev);
    }
    CHECK(a.state().gen.params_checksum() == b.state().gen.params_checksum());
    CHECK(a.state().disc.params_checksum() == b.state().disc.params_checksum());

    Trainer<float> other = make_trainer(tiny_train(34));
    other.step_once();
    CHECK(other.state().gen.params_checksum() != a.state().gen.params_checksum());
}

TEST_CASE("resume from a checkpoint continues the exact trajectory") {
    // Reference: 5 uninterrupted steps (crosses the epoch boundary at 3).
    Trainer<float> reference = make_trainer(tiny_train(44));
    std::vector<StepLogEntry> ref_log;
    for (int s = 0; s < 5; ++s) ref_log.push_back(reference.step_once());

    // Interrupted: 2 steps, checkpoint, reload into a fresh trainer, 3 more.
    Trainer<float> first = make_trainer(tiny_train(44));
    first.step_once();
    first.step_once();
    const fs::path p = fresh_dir("resume");
    fs::create_directories(p);
    save_checkpoint(first.state(), p / "mid.pvgan");

    Trainer<float> second(tiny_model(), tiny_train(44), synth_dataset(7, 8, 2, 5));
    second.adopt(load_checkpoint(p / "mid.pvgan"));
    CHECK(second.state().step == 2);
    std::vector<StepLogEntry> resumed_log;
    for (int s = 0; s < 3; ++s) resumed_log.push_back(second.step_once());

    for (int s = 0; s < 3; ++s) {
        CHECK(resumed_log[static_cast<std::size_t>(s)].step ==
              ref_log[static_cast<std::size_t>(s) + 2].step);
        CHECK(resumed_log[static_cast<std::size_t>(s)].d_loss ==
              ref_log[static_cast<std::size_t>(s) + 2].d_loss);
        CHECK(resumed_log[static_cast<std::size_t>(s)].g_loss ==
              ref_log[static_cast<std::size_t>(s) + 2].g_loss);
        CHECK(resumed_log[static_cast<std::size_t>(s)].pair_loss ==
              ref_log[static_cast<std::size_t>(s) + 2].pair_loss);
    }
    CHECK(second.state().gen.params_checksum() == reference.state().gen.params_checksum());
    CHECK(second.state().disc.params_checksum() == reference.state().disc.params_checksum());
    CHECK(second.state().prev_accuracy == reference.state().prev_accuracy);
    CHECK(second.state().opt_g.t == reference.state().opt_g.t);
    CHECK(second.state().opt_d.t == reference.state().opt_d.t);
}

TEST_CASE("adopt rejects a mismatched checkpoint") {
    Trainer<float> trainer = make_trainer(tiny_train());
    ModelConfig other = tiny_model();
    other.latent_dim = 12;
    CHECK_THROWS_AS(trainer.adopt(make_initial_state<float>(other, 1)), ContractError);
}

TEST_CASE("train() writes checkpoints and an appendable log") {
    const fs::path run = fresh_dir("train_loop");
    TrainConfig t = tiny_train(55);
    t.epochs = 1;  // 3 steps
    t.checkpoint_interval = 2;
    Trainer<float> trainer = make_trainer(t);
    trainer.train(run);

    CHECK(fs::exists(run / "ckpt_00000000.pvgan"));
    CHECK(fs::exists(run / "ckpt_00000002.pvgan"));  // interval
    CHECK(fs::exists(run / "ckpt_00000003.pvgan"));  // final
    const auto entries = read_step_log(run / "train_log.tsv");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].step == 0);
    CHECK(entries[2].step == 2);
    CHECK(entries[0].d_updated);

    // A resumed run extends the same log file.
    TrainConfig more = t;
    more.epochs = 2;
    Trainer<float> extended(tiny_model(), more, synth_dataset(7, 8, 2, 5));
    extended.adopt(load_checkpoint(run / "ckpt_00000003.pvgan"));
    extended.train(run);
    const auto all = read_step_log(run / "train_log.tsv");
    REQUIRE(all.size() == 6);
    for (std::size_t s = 0; s < all.size(); ++s) CHECK(all[s].step == s);
    CHECK(fs::exists(run / "ckpt_00000006.pvgan"));

    // Zero-step config still writes the initial checkpoint.
    const fs::path empty_run = fresh_dir("empty_loop");
    TrainConfig none = tiny_train(55);
    none.epochs = 0;
    Trainer<float> idle = make_trainer(none);
    idle.train(empty_run);
    CHECK(fs::exists(empty_run / "ckpt_00000000.pvgan"));
    CHECK(read_step_log(empty_run / "train_log.tsv").empty());
}

TEST_CASE("step log format round trip") {
    StepLogEntry e;
    e.step = 42;
    e.d_loss = 1.375;
    e.g_loss = 0.6875;
    e.pair_loss = 0.25;
    e.d_accuracy_prev = 0.8125;
    e.d_updated = true;
    const std::string line = format_step_log(e);
    CHECK(line == "42\t1.375\t0.6875\t0.25\t0.8125\t1");
    CHECK(step_log_header().front() == '#');

    const fs::path p = fresh_dir("log_fmt");
    fs::create_directories(p);
    {
        std::ofstream out(p / "log.tsv");
        out << step_log_header() << "\n" << line << "\n\n";
    }
    const auto back = read_step_log(p / "log.tsv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].step == 42);
    CHECK(back[0].d_loss == 1.375);
    CHECK(back[0].g_loss == 0.6875);
    CHECK(back[0].pair_loss == 0.25);
    CHECK(back[0].d_accuracy_prev == 0.8125);
    CHECK(back[0].d_updated);

    {
        std::ofstream out(p / "log.tsv", std::ios::app);
        out << "not a log line\n";
    }
    CHECK_THROWS_AS(read_step_log(p / "log.tsv"), FormatError);
}

TEST_CASE("train config validation names the field") {
    TrainConfig t = tiny_train();
    CHECK_NOTHROW(t.validate());

    const auto expect_throw = [](TrainConfig cfg, const std::string& field) {
        try {
            cfg.validate();
            FAIL_CHECK("expected ConfigError for " << field);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    TrainConfig bad = tiny_train();
    bad.lr_generator = 0.0;
    expect_throw(bad, "lr_generator");
    bad = tiny_train();
    bad.batch_size = 0;
    expect_throw(bad, "batch_size");
    bad = tiny_train();
    bad.epochs = -1;
    expect_throw(bad, "epochs");
    bad = tiny_train();
    bad.gate_threshold = 1.5;
    expect_throw(bad, "gate_threshold");
    bad = tiny_train();
    bad.adam_beta1 = 1.0;
    expect_throw(bad, "adam_beta1");
    bad = tiny_train();
    bad.pair_loss_weight = -0.5;
    expect_throw(bad, "pair_loss_weight");
    bad = tiny_train();
    bad.prob_clamp = 0.5;
    expect_throw(bad, "prob_clamp");
    bad = tiny_train();
    bad.threads = 0;
    expect_throw(bad, "threads");
}

TEST_CASE("paired_g_loss validates its condition set") {
    auto state = make_initial_state<float>(tiny_model(), 1);
    const std::vector<std::vector<float>> zs = {std::vector<float>(6, 0.1f)};
    const std::vector<Condition> good = {Condition::make(0, 2), Condition::make(1, 2)};
    CHECK_NOTHROW(paired_g_loss(state.gen, state.disc, zs, good, 1e-7f));
    CHECK(paired_g_loss(state.gen, state.disc, zs, good, 1e-7f) > 0.0f);

    const std::vector<Condition> dup = {Condition::make(0, 2), Condition::make(0, 2)};
    CHECK_THROWS_AS(paired_g_loss(state.gen, state.disc, zs, dup, 1e-7f), ContractError);
    const std::vector<Condition> incomplete = {Condition::make(0, 2)};
    CHECK_THROWS_AS(paired_g_loss(state.gen, state.disc, zs, incomplete, 1e-7f), ContractError);
    CHECK_THROWS_AS(paired_g_loss(state.gen, state.disc, {}, good, 1e-7f), ContractError);
}

TEST_CASE("short last batch uses the remaining samples") {
    // 7 objects, batch 3: positions 6..6 on the last step of each epoch.
    TrainConfig t = tiny_train(66);
    Trainer<float> trainer = make_trainer(t);
    trainer.step_once();
    trainer.step_once();
    const StepLogEntry last = trainer.step_once();  // rows = 1
    CHECK(last.step == 2);
    CHECK(std::isfinite(last.d_loss));
    CHECK(std::isfinite(last.g_loss));
    // Next epoch starts over with full batches.
    const StepLogEntry next = trainer.step_once();
    CHECK(next.step == 3);
    CHECK(std::isfinite(next.d_loss));
}
