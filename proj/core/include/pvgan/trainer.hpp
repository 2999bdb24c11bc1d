#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pvgan/adam.hpp"
#include "pvgan/checkpoint.hpp"
#include "pvgan/dataset.hpp"
#include "pvgan/losses.hpp"
#include "pvgan/model.hpp"
#include "pvgan/nn_threads.hpp"
#include "pvgan/pair_ops.hpp"
#include "pvgan/rng.hpp"

namespace pvgan {

struct TrainConfig {
    double lr_generator = 0.0025;
    double lr_discriminator = 0.00005;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 128;
    int epochs = 1500;
    double gate_threshold = 0.95;
    bool paired_step_enabled = true;
    double pair_loss_weight = 1.0;
    std::uint64_t seed = 0;
    double prob_clamp = 1e-7;
    GeneratorLoss generator_loss = GeneratorLoss::kNonSaturating;
    // Plumbing knobs not tied to the method itself.
    std::uint64_t max_steps = 0;            // cap on total steps; 0 = no cap
    std::uint64_t checkpoint_interval = 0;  // extra checkpoints every k steps; 0 = first/final only
    int threads = 1;

    void validate() const;  // ConfigError naming the offending field
};

struct StepLogEntry {
    std::uint64_t step = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double pair_loss = 0.0;
    double d_accuracy_prev = 0.0;
    bool d_updated = false;
};

std::string step_log_header();
std::string format_step_log(const StepLogEntry& e);
std::vector<StepLogEntry> read_step_log(const std::filesystem::path& path);

enum class StepPhase { kDiscriminator, kGenerator, kPaired, kStepDone };

// Forward-only paired objective: generate every condition from one shared z
// per row, align to the condition-0 frame, merge by averaging, and score the
// merged grid as condition 0.
template <typename T>
T paired_g_loss(ConvNet<T>& gen, ConvNet<T>& disc, const std::vector<std::vector<T>>& z_batch,
                const std::vector<Condition>& conditions, T prob_clamp) {
    const int n = gen.config.n_conditions;
    require(static_cast<int>(conditions.size()) == n, "paired_g_loss: need all conditions exactly once");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const Condition& c : conditions) {
        require(c.n_conditions == n && !seen[static_cast<std::size_t>(c.index)],
                "paired_g_loss: need all conditions exactly once");
        seen[static_cast<std::size_t>(c.index)] = true;
    }
    require(!z_batch.empty(), "paired_g_loss: empty latent batch");

    std::vector<std::vector<T>> expanded;
    std::vector<Condition> expanded_conds, merged_conds;
    for (const auto& z : z_batch) {
        for (int i = 0; i < n; ++i) {
            expanded.push_back(z);
            expanded_conds.push_back(Condition::make(i, n));
        }
        merged_conds.push_back(Condition::make(0, n));
    }
    Tensor<T> fakes = gen.forward(pack_latents(gen.config, expanded, expanded_conds),
                                  nn::BnMode::kTrainStatic, nullptr);
    Tensor<T> merged = align_merge(fakes, n);
    Tensor<T> d_in = with_condition_channels(disc.config, merged, merged_conds);
    std::vector<T> probs = flatten_scalars(disc.forward(d_in, nn::BnMode::kTrainStatic, nullptr));
    return g_loss(probs, prob_clamp);
}

template <typename T = float>
class Trainer {
  public:
    Trainer(ModelConfig model, TrainConfig config, std::vector<ConditionedSample> samples)
        : model_(model), config_(config) {
        model_.validate();
        config_.validate();
        nn::set_math_threads(config_.threads);
        per_cond_.resize(static_cast<std::size_t>(model_.n_conditions));
        for (auto& s : samples) {
            require(s.condition.n_conditions == model_.n_conditions,
                    "sample condition family does not match model");
            require(s.grid.resolution() == model_.resolution,
                    "sample resolution does not match model");
            per_cond_[static_cast<std::size_t>(s.condition.index)].push_back(std::move(s.grid));
        }
        max_group_ = 0;
        for (int i = 0; i < model_.n_conditions; ++i) {
            const auto& g = per_cond_[static_cast<std::size_t>(i)];
            require(!g.empty(), "no samples for condition " + std::to_string(i));
            max_group_ = std::max(max_group_, g.size());
        }
        streams_.resize(per_cond_.size());
        for (std::size_t c = 0; c < per_cond_.size(); ++c) {
            streams_[c].len = per_cond_[c].size();
            streams_[c].base_seed = derive_seed(config_.seed, "reals", c);
        }
        for (int i = 0; i < model_.n_conditions; ++i)
            all_conds_.push_back(Condition::make(i, model_.n_conditions));
    }

    void init_fresh() {
        state_ = make_initial_state<T>(model_, config_.seed);
        state_.step = 0;
        state_.prev_accuracy = 0.0;  // discriminator always trains on step 1
    }

    void adopt(TrainerState<T> state) {
        require(state.gen.config.resolution == model_.resolution &&
                    state.gen.config.latent_dim == model_.latent_dim &&
                    state.gen.config.n_conditions == model_.n_conditions &&
                    state.gen.config.base_channels == model_.base_channels,
                "checkpoint model does not match configured model");
        state_ = std::move(state);
    }

    std::uint64_t steps_per_epoch() const {
        return (max_group_ + static_cast<std::size_t>(config_.batch_size) - 1) /
               static_cast<std::size_t>(config_.batch_size);
    }

    std::uint64_t total_steps() const {
        std::uint64_t total = steps_per_epoch() * static_cast<std::uint64_t>(config_.epochs);
        if (config_.max_steps > 0) total = std::min(total, config_.max_steps);
        return total;
    }

    // One full training step at the current step counter: (1) gated
    // discriminator update, (2) generator update on the same fakes,
    // (3) paired generator-only update.
    StepLogEntry step_once() {
        const std::uint64_t s = state_.step;
        const int n = model_.n_conditions;
        const std::uint64_t spe = steps_per_epoch();
        const std::uint64_t k = s % spe;
        const std::size_t pos = (s / spe) * max_group_ + k * static_cast<std::size_t>(config_.batch_size);
        const int rows = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(config_.batch_size), max_group_ - k * static_cast<std::size_t>(config_.batch_size)));

        StepLogEntry log;
        log.step = s;
        log.d_accuracy_prev = state_.prev_accuracy;
        log.d_updated = state_.prev_accuracy < config_.gate_threshold;

        // Latents: one z per row, expanded to every condition (row b*n + i).
        Rng z_rng(derive_seed(config_.seed, "z", s));
        std::vector<std::vector<T>> zs(static_cast<std::size_t>(rows));
        for (auto& z : zs) z = sample_latent<T>(model_, z_rng);
        std::vector<std::vector<T>> z_expanded;
        std::vector<Condition> conds_expanded;
        for (int b = 0; b < rows; ++b)
            for (int i = 0; i < n; ++i) {
                z_expanded.push_back(zs[static_cast<std::size_t>(b)]);
                conds_expanded.push_back(all_conds_[static_cast<std::size_t>(i)]);
            }
        const Tensor<T> g_input = pack_latents(model_, z_expanded, conds_expanded);

        std::vector<LayerCache<T>> gen_cache;
        Tensor<T> fakes = state_.gen.forward(g_input, nn::BnMode::kTrain, &gen_cache);

        // Reals mirror the fake layout: row b*n + i comes from condition i's
        // cycling stream at position pos + b.
        Tensor<T> reals = pack_reals(pos, rows);

        // --- Phase 1: discriminator scores; update only when gated on.
        const nn::BnMode d_mode = log.d_updated ? nn::BnMode::kTrain : nn::BnMode::kTrainStatic;
        std::vector<LayerCache<T>> dc_real, dc_fake;
        Tensor<T> d_real_in = with_condition_channels(model_, reals, conds_expanded);
        Tensor<T> d_fake_in = with_condition_channels(model_, fakes, conds_expanded);
        std::vector<T> real_probs = flatten_scalars(
            state_.disc.forward(d_real_in, d_mode, log.d_updated ? &dc_real : nullptr));
        std::vector<T> fake_probs = flatten_scalars(
            state_.disc.forward(d_fake_in, d_mode, log.d_updated ? &dc_fake : nullptr));
        const T clamp = static_cast<T>(config_.prob_clamp);
        log.d_loss = static_cast<double>(d_loss(real_probs, fake_probs, clamp));
        check_finite(log.d_loss, "d_loss", s);
        const double batch_accuracy = d_accuracy(real_probs, fake_probs);

        if (log.d_updated) {
            auto d_grads = state_.disc.make_grads();
            state_.disc.backward(scalar_grad(loss_grad::d_real(real_probs, clamp), d_real_in),
                                 dc_real, &d_grads, false);
            auto d_grads_fake = state_.disc.make_grads();
            state_.disc.backward(scalar_grad(loss_grad::d_fake(fake_probs, clamp), d_fake_in),
                                 dc_fake, &d_grads_fake, false);
            add_grads(d_grads, d_grads_fake);
            state_.opt_d.step(state_.disc, d_grads, static_cast<T>(config_.lr_discriminator),
                              static_cast<T>(config_.adam_beta1), static_cast<T>(config_.adam_beta2),
                              static_cast<T>(config_.adam_eps));
        }
        if (phase_hook) phase_hook(StepPhase::kDiscriminator, *this);

        // --- Phase 2: generator update through the (possibly updated) D.
        {
            std::vector<LayerCache<T>> dc;
            std::vector<T> probs =
                flatten_scalars(state_.disc.forward(d_fake_in, nn::BnMode::kTrainStatic, &dc));
            log.g_loss = static_cast<double>(
                config_.generator_loss == GeneratorLoss::kNonSaturating
                    ? g_loss(probs, clamp)
                    : g_loss_minimax(probs, clamp));
            check_finite(log.g_loss, "g_loss", s);
            Tensor<T> d_din = state_.disc.backward(
                scalar_grad(loss_grad::g_fake(probs, clamp, config_.generator_loss), d_fake_in), dc,
                nullptr, true);
            auto g_grads = state_.gen.make_grads();
            state_.gen.backward(first_channel(d_din), gen_cache, &g_grads, false);
            state_.opt_g.step(state_.gen, g_grads, static_cast<T>(config_.lr_generator),
                              static_cast<T>(config_.adam_beta1), static_cast<T>(config_.adam_beta2),
                              static_cast<T>(config_.adam_eps));
        }
        if (phase_hook) phase_hook(StepPhase::kGenerator, *this);

        // --- Phase 3: paired update; touches generator parameters only.
        if (config_.paired_step_enabled) {
            std::vector<LayerCache<T>> gen_cache2;
            Tensor<T> fakes2 = state_.gen.forward(g_input, nn::BnMode::kTrainStatic, &gen_cache2);
            Tensor<T> merged = align_merge(fakes2, n);
            std::vector<Condition> c0(static_cast<std::size_t>(rows), all_conds_[0]);
            std::vector<LayerCache<T>> dc;
            Tensor<T> d_in = with_condition_channels(model_, merged, c0);
            std::vector<T> probs = flatten_scalars(state_.disc.forward(d_in, nn::BnMode::kTrainStatic, &dc));
            log.pair_loss = static_cast<double>(
                config_.generator_loss == GeneratorLoss::kNonSaturating
                    ? g_loss(probs, clamp)
                    : g_loss_minimax(probs, clamp));
            check_finite(log.pair_loss, "pair_loss", s);
            std::vector<T> dprobs = loss_grad::g_fake(probs, clamp, config_.generator_loss);
            for (auto& v : dprobs) v *= static_cast<T>(config_.pair_loss_weight);
            Tensor<T> d_din = state_.disc.backward(scalar_grad(dprobs, d_in), dc, nullptr, true);
            Tensor<T> dfakes = align_merge_backward(first_channel(d_din), n, fakes2.shape);
            auto g_grads = state_.gen.make_grads();
            state_.gen.backward(dfakes, gen_cache2, &g_grads, false);
            state_.opt_g.step(state_.gen, g_grads, static_cast<T>(config_.lr_generator),
                              static_cast<T>(config_.adam_beta1), static_cast<T>(config_.adam_beta2),
                              static_cast<T>(config_.adam_eps));
        }
        if (phase_hook) phase_hook(StepPhase::kPaired, *this);

        state_.prev_accuracy = batch_accuracy;
        ++state_.step;
        if (phase_hook) phase_hook(StepPhase::kStepDone, *this);
        return log;
    }

    // Full loop: initial checkpoint, per-step log lines, interval and final
    // checkpoints. Log lines are appended so resumed runs extend the file.
    void train(const std::filesystem::path& run_dir);

    TrainerState<T>& state() { return state_; }
    const ModelConfig& model_config() const { return model_; }
    const TrainConfig& train_config() const { return config_; }

    std::function<void(StepPhase, Trainer&)> phase_hook;

  private:
    struct RealStream {
        std::size_t len = 0;
        std::uint64_t base_seed = 0;
        std::uint64_t pass = ~std::uint64_t{0};
        std::vector<std::size_t> perm;

        std::size_t at(std::size_t pos) {
            const std::uint64_t p = pos / len;
            if (p != pass) {
                perm = Rng(derive_seed(base_seed, "pass", p)).permutation(len);
                pass = p;
            }
            return perm[pos % len];
        }
    };

    Tensor<T> pack_reals(std::size_t pos, int rows) {
        const int r = model_.resolution;
        const int n = model_.n_conditions;
        const std::size_t cells = static_cast<std::size_t>(r) * r * r;
        Tensor<T> reals({rows * n, 1, r, r, r});
        for (int b = 0; b < rows; ++b)
            for (int i = 0; i < n; ++i) {
                auto& stream = streams_[static_cast<std::size_t>(i)];
                const VoxelGrid& g =
                    per_cond_[static_cast<std::size_t>(i)][stream.at(pos + static_cast<std::size_t>(b))];
                T* dst = reals.data.data() + (static_cast<std::size_t>(b) * n + static_cast<std::size_t>(i)) * cells;
                const auto vals = g.values();
                for (std::size_t c = 0; c < cells; ++c) dst[c] = static_cast<T>(vals[c]);
            }
        return reals;
    }

    // Expand per-sample scalar-probability gradients to the discriminator's
    // output tensor shape (B, 1, 1, 1, 1).
    Tensor<T> scalar_grad(const std::vector<T>& dprobs, const Tensor<T>& d_in) const {
        Tensor<T> g({d_in.shape[0], 1, 1, 1, 1});
        require(dprobs.size() == g.data.size(), "scalar gradient count mismatch");
        g.data = dprobs;
        return g;
    }

    void check_finite(double loss, const char* which, std::uint64_t step) const {
        if (!std::isfinite(loss))
            throw NumericError(std::string(which) + " is non-finite at step " + std::to_string(step));
    }

    ModelConfig model_;
    TrainConfig config_;
    std::vector<std::vector<VoxelGrid>> per_cond_;
    std::vector<RealStream> streams_;
    std::vector<Condition> all_conds_;
    std::size_t max_group_ = 0;
    TrainerState<T> state_;
};

}  // namespace pvgan
