#pragma once

#include <cstdint>
#include <filesystem>

#include "pvgan/adam.hpp"
#include "pvgan/model.hpp"
#include "pvgan/rng.hpp"

namespace pvgan {

// Everything a run needs to continue exactly where it stopped. The RNG is
// counter-derived from (seed, step), so no generator state is persisted.
template <typename T>
struct TrainerState {
    ConvNet<T> gen, disc;
    AdamState<T> opt_g, opt_d;
    std::uint64_t step = 0;
    double prev_accuracy = 0.0;
};

template <typename T>
TrainerState<T> make_initial_state(const ModelConfig& config, std::uint64_t seed) {
    TrainerState<T> st;
    st.gen = make_generator<T>(config);
    st.disc = make_discriminator<T>(config);
    st.gen.init_params(derive_seed(seed, "init-g"));
    st.disc.init_params(derive_seed(seed, "init-d"));
    st.opt_g = AdamState<T>::make_like(st.gen);
    st.opt_d = AdamState<T>::make_like(st.disc);
    return st;
}

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Container: magic "PVGAN1", version, ModelConfig, step/gate state, optimizer
// step counters, then shape-prefixed named little-endian f32 tensors (network
// params, batch-norm running stats, ADAM moments).
void save_checkpoint(TrainerState<float>& state, const std::filesystem::path& path);
TrainerState<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace pvgan
