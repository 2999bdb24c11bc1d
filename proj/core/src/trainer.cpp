#include "pvgan/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pvgan {

std::string to_string(GeneratorLoss g) {
    return g == GeneratorLoss::kNonSaturating ? "non-saturating" : "minimax";
}

GeneratorLoss generator_loss_from_string(const std::string& s) {
    if (s == "non-saturating" || s == "non_saturating" || s == "ns")
        return GeneratorLoss::kNonSaturating;
    if (s == "minimax") return GeneratorLoss::kMinimax;
    throw ConfigError("unknown generator loss: " + s);
}

void TrainConfig::validate() const {
    if (!(lr_generator > 0.0)) throw ConfigError("lr_generator must be > 0");
    if (!(lr_discriminator > 0.0)) throw ConfigError("lr_discriminator must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must be in [0,1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must be in [0,1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(gate_threshold > 0.0 && gate_threshold <= 1.0))
        throw ConfigError("gate_threshold must be in (0,1]");
    if (!(pair_loss_weight >= 0.0)) throw ConfigError("pair_loss_weight must be >= 0");
    if (!(prob_clamp > 0.0 && prob_clamp < 0.5)) throw ConfigError("prob_clamp must be in (0,0.5)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string step_log_header() {
    return "# step\td_loss\tg_loss\tpair_loss\td_accuracy_prev\td_updated";
}

std::string format_step_log(const StepLogEntry& e) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%llu\t%.9g\t%.9g\t%.9g\t%.9g\t%d",
                  static_cast<unsigned long long>(e.step), e.d_loss, e.g_loss, e.pair_loss,
                  e.d_accuracy_prev, e.d_updated ? 1 : 0);
    return buf;
}

std::vector<StepLogEntry> read_step_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open step log: " + path.string());
    std::vector<StepLogEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        StepLogEntry e;
        unsigned long long step = 0;
        int updated = 0;
        if (std::sscanf(line.c_str(), "%llu\t%lf\t%lf\t%lf\t%lf\t%d", &step, &e.d_loss, &e.g_loss,
                        &e.pair_loss, &e.d_accuracy_prev, &updated) != 6)
            throw FormatError("unparseable step log line " + std::to_string(lineno) + " in " +
                              path.string());
        e.step = step;
        e.d_updated = updated != 0;
        out.push_back(e);
    }
    return out;
}

namespace {
std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::uint64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_%08llu.pvgan", static_cast<unsigned long long>(step));
    return run_dir / buf;
}
}  // namespace

template <>
void Trainer<float>::train(const std::filesystem::path& run_dir) {
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory " + run_dir.string() + ": " + ec.message());

    const std::uint64_t total = total_steps();
    if (state_.step == 0) save_checkpoint(state_, checkpoint_path(run_dir, 0));

    const std::filesystem::path log_path = run_dir / "train_log.tsv";
    const bool fresh_log =
        !std::filesystem::exists(log_path) || std::filesystem::file_size(log_path) == 0;
    std::ofstream log(log_path, std::ios::app);
    if (!log) throw IoError("cannot open step log for writing: " + log_path.string());
    if (fresh_log) log << step_log_header() << '\n';

    while (state_.step < total) {
        const StepLogEntry e = step_once();
        log << format_step_log(e) << '\n';
        if (!log) throw IoError("write failed on step log: " + log_path.string());
        if (config_.checkpoint_interval > 0 && state_.step % config_.checkpoint_interval == 0 &&
            state_.step < total)
            save_checkpoint(state_, checkpoint_path(run_dir, state_.step));
    }
    log.flush();
    if (total > 0) save_checkpoint(state_, checkpoint_path(run_dir, total));
}

}  // namespace pvgan
