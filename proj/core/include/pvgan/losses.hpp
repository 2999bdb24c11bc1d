#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pvgan/errors.hpp"

namespace pvgan {

enum class GeneratorLoss { kNonSaturating, kMinimax };

std::string to_string(GeneratorLoss g);
GeneratorLoss generator_loss_from_string(const std::string& s);

template <typename T>
T clamp_prob(T p, T eps) {
    if (p < eps) return eps;
    if (p > T(1) - eps) return T(1) - eps;
    return p;
}

// -mean log p_real - mean log (1-p_fake), each mean over its own batch.
template <typename T>
T d_loss(const std::vector<T>& real_probs, const std::vector<T>& fake_probs, T eps) {
    require(!real_probs.empty() && !fake_probs.empty(), "d_loss: empty probability batch");
    T real_sum(0), fake_sum(0);
    for (T p : real_probs) real_sum += -std::log(clamp_prob(p, eps));
    for (T p : fake_probs) fake_sum += -std::log(T(1) - clamp_prob(p, eps));
    return real_sum / static_cast<T>(real_probs.size()) + fake_sum / static_cast<T>(fake_probs.size());
}

// Non-saturating generator objective: -mean log p_fake.
template <typename T>
T g_loss(const std::vector<T>& fake_probs, T eps) {
    require(!fake_probs.empty(), "g_loss: empty probability batch");
    T sum(0);
    for (T p : fake_probs) sum += -std::log(clamp_prob(p, eps));
    return sum / static_cast<T>(fake_probs.size());
}

// Literal minimax form: mean log (1-p_fake). Same fixed points, weaker early
// gradients; kept behind a config switch.
template <typename T>
T g_loss_minimax(const std::vector<T>& fake_probs, T eps) {
    require(!fake_probs.empty(), "g_loss: empty probability batch");
    T sum(0);
    for (T p : fake_probs) sum += std::log(T(1) - clamp_prob(p, eps));
    return sum / static_cast<T>(fake_probs.size());
}

// (reals scored > 0.5) + (fakes scored <= 0.5), over the combined batch.
// A 0.5 tie counts the fake side as correct.
template <typename T>
double d_accuracy(const std::vector<T>& real_probs, const std::vector<T>& fake_probs) {
    require(!real_probs.empty() && !fake_probs.empty(), "d_accuracy: empty probability batch");
    std::size_t correct = 0;
    for (T p : real_probs)
        if (p > T(0.5)) ++correct;
    for (T p : fake_probs)
        if (p <= T(0.5)) ++correct;
    return static_cast<double>(correct) /
           static_cast<double>(real_probs.size() + fake_probs.size());
}

// Gradients w.r.t. the raw probabilities. Probabilities pushed outside the
// clamp window sit on a flat section of the loss, so their gradient is 0.
namespace loss_grad {

template <typename T>
std::vector<T> d_real(const std::vector<T>& real_probs, T eps) {
    const T inv_n = T(1) / static_cast<T>(real_probs.size());
    std::vector<T> g(real_probs.size(), T(0));
    for (std::size_t i = 0; i < real_probs.size(); ++i) {
        const T p = real_probs[i];
        if (p > eps && p < T(1) - eps) g[i] = -inv_n / p;
    }
    return g;
}

template <typename T>
std::vector<T> d_fake(const std::vector<T>& fake_probs, T eps) {
    const T inv_n = T(1) / static_cast<T>(fake_probs.size());
    std::vector<T> g(fake_probs.size(), T(0));
    for (std::size_t i = 0; i < fake_probs.size(); ++i) {
        const T p = fake_probs[i];
        if (p > eps && p < T(1) - eps) g[i] = inv_n / (T(1) - p);
    }
    return g;
}

template <typename T>
std::vector<T> g_fake(const std::vector<T>& fake_probs, T eps, GeneratorLoss form) {
    const T inv_n = T(1) / static_cast<T>(fake_probs.size());
    std::vector<T> g(fake_probs.size(), T(0));
    for (std::size_t i = 0; i < fake_probs.size(); ++i) {
        const T p = fake_probs[i];
        if (p > eps && p < T(1) - eps)
            g[i] = form == GeneratorLoss::kNonSaturating ? -inv_n / p : -inv_n / (T(1) - p);
    }
    return g;
}

}  // namespace loss_grad

}  // namespace pvgan
