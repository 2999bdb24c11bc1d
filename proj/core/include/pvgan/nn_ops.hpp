#pragma once

// Dense 3-d convolution kernels and batch norm, forward and reverse mode.
// Everything is written against (N, C, Z, Y, X) activations with the X axis
// contiguous. Reverse passes accumulate in a fixed loop order so results do
// not depend on the thread count (workers own disjoint output slabs).

#include <cmath>
#include <cstdint>
#include <vector>

#include "pvgan/errors.hpp"
#include "pvgan/nn_threads.hpp"
#include "pvgan/tensor.hpp"

namespace pvgan::nn {

inline int div_floor(int a, int b) {
    const int q = a / b;
    const int r = a % b;
    return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

inline int div_ceil(int a, int b) { return -div_floor(-a, b); }

inline int conv_out_size(int in, int kernel, int stride, int pad) {
    const int out = div_floor(in + 2 * pad - kernel, stride) + 1;
    require(out > 0, "conv output size must be positive");
    return out;
}

inline int tconv_out_size(int in, int kernel, int stride, int pad) {
    const int out = (in - 1) * stride - 2 * pad + kernel;
    require(out > 0, "transposed conv output size must be positive");
    return out;
}

namespace detail {

struct Dims5 {
    int n, c, z, y, x;
    std::int64_t slab;  // z*y*x
    std::int64_t row;   // x
};

template <typename T>
inline Dims5 dims5(const Tensor<T>& t, const char* what) {
    require(t.shape.size() == 5, std::string(what) + " must be rank 5");
    Dims5 d{t.shape[0], t.shape[1], t.shape[2], t.shape[3], t.shape[4], 0, 0};
    d.slab = static_cast<std::int64_t>(d.z) * d.y * d.x;
    d.row = d.x;
    return d;
}

// Iteration bounds for the output index o such that o*stride - pad + k lands
// inside [0, in_size).
struct AxisRange {
    int lo, hi;  // inclusive; empty when lo > hi
};

inline AxisRange out_range(int in_size, int out_size, int stride, int pad, int k) {
    AxisRange r;
    r.lo = std::max(0, div_ceil(pad - k, stride));
    r.hi = std::min(out_size - 1, div_floor(in_size - 1 + pad - k, stride));
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// conv3d: weight (Co, Ci, K, K, K), out = floor((in + 2p - k)/s) + 1 per axis.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias,
                         int stride, int pad) {
    const auto id = detail::dims5(in, "conv3d input");
    const auto wd = detail::dims5(weight, "conv3d weight");
    require(wd.c == id.c, "conv3d: input channels do not match weight");
    require(wd.z == wd.y && wd.y == wd.x, "conv3d: kernel must be cubic");
    require(bias.data.empty() || (bias.shape.size() == 1 && bias.shape[0] == wd.n),
            "conv3d: bias shape mismatch");
    const int k = wd.z;
    const int oz = conv_out_size(id.z, k, stride, pad);
    const int oy = conv_out_size(id.y, k, stride, pad);
    const int ox = conv_out_size(id.x, k, stride, pad);

    Tensor<T> out({id.n, wd.n, oz, oy, ox});
    const std::int64_t out_slab = static_cast<std::int64_t>(oz) * oy * ox;
    const T* src = in.data.data();
    const T* w = weight.data.data();
    T* dst = out.data.data();

    parallel_for(static_cast<std::int64_t>(id.n) * wd.n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t slab = b; slab < e; ++slab) {
            const int n = static_cast<int>(slab / wd.n);
            const int co = static_cast<int>(slab % wd.n);
            T* out_base = dst + slab * out_slab;
            const T init = bias.data.empty() ? T(0) : bias.data[co];
            for (std::int64_t i = 0; i < out_slab; ++i) out_base[i] = init;
            for (int ci = 0; ci < id.c; ++ci) {
                const T* in_base = src + (static_cast<std::int64_t>(n) * id.c + ci) * id.slab;
                for (int kz = 0; kz < k; ++kz) {
                    const auto rz = detail::out_range(id.z, oz, stride, pad, kz);
                    for (int ky = 0; ky < k; ++ky) {
                        const auto ry = detail::out_range(id.y, oy, stride, pad, ky);
                        for (int kx = 0; kx < k; ++kx) {
                            const auto rx = detail::out_range(id.x, ox, stride, pad, kx);
                            const T wv = w[(((static_cast<std::int64_t>(co) * id.c + ci) * k + kz) * k + ky) * k + kx];
                            for (int z = rz.lo; z <= rz.hi; ++z) {
                                const int iz = z * stride - pad + kz;
                                for (int y = ry.lo; y <= ry.hi; ++y) {
                                    const int iy = y * stride - pad + ky;
                                    const T* in_row = in_base + (static_cast<std::int64_t>(iz) * id.y + iy) * id.x - pad + kx;
                                    T* out_row = out_base + (static_cast<std::int64_t>(z) * oy + y) * ox;
                                    for (int x = rx.lo; x <= rx.hi; ++x)
                                        out_row[x] += wv * in_row[x * stride];
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    return out;
}

// Gradients. Any of dweight/dbias/dinput may be null to skip that output.
template <typename T>
void conv3d_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& dout,
                     int stride, int pad, Tensor<T>* dweight, Tensor<T>* dbias, Tensor<T>* dinput) {
    const auto id = detail::dims5(in, "conv3d input");
    const auto wd = detail::dims5(weight, "conv3d weight");
    const auto od = detail::dims5(dout, "conv3d dout");
    require(od.n == id.n && od.c == wd.n, "conv3d backward: dout shape mismatch");
    const int k = wd.z;

    if (dbias != nullptr) {
        *dbias = Tensor<T>({wd.n});
        parallel_for(wd.n, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t co = b; co < e; ++co) {
                T acc(0);
                for (int n = 0; n < od.n; ++n) {
                    const T* g = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                    for (std::int64_t i = 0; i < od.slab; ++i) acc += g[i];
                }
                dbias->data[static_cast<std::size_t>(co)] = acc;
            }
        });
    }

    if (dweight != nullptr) {
        *dweight = Tensor<T>(weight.shape);
        parallel_for(static_cast<std::int64_t>(wd.n) * id.c, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t pair = b; pair < e; ++pair) {
                const int co = static_cast<int>(pair / id.c);
                const int ci = static_cast<int>(pair % id.c);
                T* dw_base = dweight->data.data() + pair * k * k * k;
                for (int kz = 0; kz < k; ++kz) {
                    const auto rz = detail::out_range(id.z, od.z, stride, pad, kz);
                    for (int ky = 0; ky < k; ++ky) {
                        const auto ry = detail::out_range(id.y, od.y, stride, pad, ky);
                        for (int kx = 0; kx < k; ++kx) {
                            const auto rx = detail::out_range(id.x, od.x, stride, pad, kx);
                            T acc(0);
                            for (int n = 0; n < id.n; ++n) {
                                const T* in_base = in.data.data() + (static_cast<std::int64_t>(n) * id.c + ci) * id.slab;
                                const T* g_base = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                                for (int z = rz.lo; z <= rz.hi; ++z) {
                                    const int iz = z * stride - pad + kz;
                                    for (int y = ry.lo; y <= ry.hi; ++y) {
                                        const int iy = y * stride - pad + ky;
                                        const T* in_row = in_base + (static_cast<std::int64_t>(iz) * id.y + iy) * id.x - pad + kx;
                                        const T* g_row = g_base + (static_cast<std::int64_t>(z) * od.y + y) * od.x;
                                        for (int x = rx.lo; x <= rx.hi; ++x)
                                            acc += g_row[x] * in_row[x * stride];
                                    }
                                }
                            }
                            dw_base[(static_cast<std::int64_t>(kz) * k + ky) * k + kx] = acc;
                        }
                    }
                }
            }
        });
    }

    if (dinput != nullptr) {
        *dinput = Tensor<T>(in.shape);
        parallel_for(static_cast<std::int64_t>(id.n) * id.c, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t slab = b; slab < e; ++slab) {
                const int n = static_cast<int>(slab / id.c);
                const int ci = static_cast<int>(slab % id.c);
                T* di_base = dinput->data.data() + slab * id.slab;
                for (int co = 0; co < wd.n; ++co) {
                    const T* g_base = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                    for (int kz = 0; kz < k; ++kz) {
                        const auto rz = detail::out_range(id.z, od.z, stride, pad, kz);
                        for (int ky = 0; ky < k; ++ky) {
                            const auto ry = detail::out_range(id.y, od.y, stride, pad, ky);
                            for (int kx = 0; kx < k; ++kx) {
                                const auto rx = detail::out_range(id.x, od.x, stride, pad, kx);
                                const T wv = weight.data[(((static_cast<std::int64_t>(co) * id.c + ci) * k + kz) * k + ky) * k + kx];
                                for (int z = rz.lo; z <= rz.hi; ++z) {
                                    const int iz = z * stride - pad + kz;
                                    for (int y = ry.lo; y <= ry.hi; ++y) {
                                        const int iy = y * stride - pad + ky;
                                        T* di_row = di_base + (static_cast<std::int64_t>(iz) * id.y + iy) * id.x - pad + kx;
                                        const T* g_row = g_base + (static_cast<std::int64_t>(z) * od.y + y) * od.x;
                                        for (int x = rx.lo; x <= rx.hi; ++x)
                                            di_row[x * stride] += wv * g_row[x];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Transposed conv3d: weight (Ci, Co, K, K, K), out = (in - 1)s - 2p + k.
// Forward scatters each input cell into its output window; this is exactly
// the adjoint of conv3d with the same stride/pad.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> tconv3d_forward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& bias,
                          int stride, int pad) {
    const auto id = detail::dims5(in, "tconv3d input");
    const auto wd = detail::dims5(weight, "tconv3d weight");
    require(wd.n == id.c, "tconv3d: input channels do not match weight");
    require(wd.z == wd.y && wd.y == wd.x, "tconv3d: kernel must be cubic");
    const int co_n = wd.c;
    require(bias.data.empty() || (bias.shape.size() == 1 && bias.shape[0] == co_n),
            "tconv3d: bias shape mismatch");
    const int k = wd.z;
    const int oz = tconv_out_size(id.z, k, stride, pad);
    const int oy = tconv_out_size(id.y, k, stride, pad);
    const int ox = tconv_out_size(id.x, k, stride, pad);

    Tensor<T> out({id.n, co_n, oz, oy, ox});
    const std::int64_t out_slab = static_cast<std::int64_t>(oz) * oy * ox;

    parallel_for(static_cast<std::int64_t>(id.n) * co_n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t slab = b; slab < e; ++slab) {
            const int n = static_cast<int>(slab / co_n);
            const int co = static_cast<int>(slab % co_n);
            T* out_base = out.data.data() + slab * out_slab;
            const T init = bias.data.empty() ? T(0) : bias.data[co];
            for (std::int64_t i = 0; i < out_slab; ++i) out_base[i] = init;
            for (int ci = 0; ci < id.c; ++ci) {
                const T* in_base = in.data.data() + (static_cast<std::int64_t>(n) * id.c + ci) * id.slab;
                for (int kz = 0; kz < k; ++kz) {
                    const auto rz = detail::out_range(oz, id.z, stride, pad, kz);
                    for (int ky = 0; ky < k; ++ky) {
                        const auto ry = detail::out_range(oy, id.y, stride, pad, ky);
                        for (int kx = 0; kx < k; ++kx) {
                            const auto rx = detail::out_range(ox, id.x, stride, pad, kx);
                            const T wv = weight.data[(((static_cast<std::int64_t>(ci) * co_n + co) * k + kz) * k + ky) * k + kx];
                            for (int z = rz.lo; z <= rz.hi; ++z) {
                                const int zz = z * stride - pad + kz;
                                for (int y = ry.lo; y <= ry.hi; ++y) {
                                    const int yy = y * stride - pad + ky;
                                    T* out_row = out_base + (static_cast<std::int64_t>(zz) * oy + yy) * ox - pad + kx;
                                    const T* in_row = in_base + (static_cast<std::int64_t>(z) * id.y + y) * id.x;
                                    for (int x = rx.lo; x <= rx.hi; ++x)
                                        out_row[x * stride] += wv * in_row[x];
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    return out;
}

template <typename T>
void tconv3d_backward(const Tensor<T>& in, const Tensor<T>& weight, const Tensor<T>& dout,
                      int stride, int pad, Tensor<T>* dweight, Tensor<T>* dbias, Tensor<T>* dinput) {
    const auto id = detail::dims5(in, "tconv3d input");
    const auto wd = detail::dims5(weight, "tconv3d weight");
    const auto od = detail::dims5(dout, "tconv3d dout");
    require(od.n == id.n && od.c == wd.c, "tconv3d backward: dout shape mismatch");
    const int k = wd.z;

    if (dbias != nullptr) {
        *dbias = Tensor<T>({wd.c});
        parallel_for(wd.c, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t co = b; co < e; ++co) {
                T acc(0);
                for (int n = 0; n < od.n; ++n) {
                    const T* g = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                    for (std::int64_t i = 0; i < od.slab; ++i) acc += g[i];
                }
                dbias->data[static_cast<std::size_t>(co)] = acc;
            }
        });
    }

    if (dweight != nullptr) {
        *dweight = Tensor<T>(weight.shape);
        parallel_for(static_cast<std::int64_t>(wd.n) * wd.c, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t pair = b; pair < e; ++pair) {
                const int ci = static_cast<int>(pair / wd.c);
                const int co = static_cast<int>(pair % wd.c);
                T* dw_base = dweight->data.data() + pair * k * k * k;
                for (int kz = 0; kz < k; ++kz) {
                    const auto rz = detail::out_range(od.z, id.z, stride, pad, kz);
                    for (int ky = 0; ky < k; ++ky) {
                        const auto ry = detail::out_range(od.y, id.y, stride, pad, ky);
                        for (int kx = 0; kx < k; ++kx) {
                            const auto rx = detail::out_range(od.x, id.x, stride, pad, kx);
                            T acc(0);
                            for (int n = 0; n < id.n; ++n) {
                                const T* in_base = in.data.data() + (static_cast<std::int64_t>(n) * id.c + ci) * id.slab;
                                const T* g_base = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                                for (int z = rz.lo; z <= rz.hi; ++z) {
                                    const int zz = z * stride - pad + kz;
                                    for (int y = ry.lo; y <= ry.hi; ++y) {
                                        const int yy = y * stride - pad + ky;
                                        const T* g_row = g_base + (static_cast<std::int64_t>(zz) * od.y + yy) * od.x - pad + kx;
                                        const T* in_row = in_base + (static_cast<std::int64_t>(z) * id.y + y) * id.x;
                                        for (int x = rx.lo; x <= rx.hi; ++x)
                                            acc += in_row[x] * g_row[x * stride];
                                    }
                                }
                            }
                            dw_base[(static_cast<std::int64_t>(kz) * k + ky) * k + kx] = acc;
                        }
                    }
                }
            }
        });
    }

    if (dinput != nullptr) {
        *dinput = Tensor<T>(in.shape);
        parallel_for(static_cast<std::int64_t>(id.n) * id.c, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t slab = b; slab < e; ++slab) {
                const int n = static_cast<int>(slab / id.c);
                const int ci = static_cast<int>(slab % id.c);
                T* di_base = dinput->data.data() + slab * id.slab;
                for (int co = 0; co < wd.c; ++co) {
                    const T* g_base = dout.data.data() + (static_cast<std::int64_t>(n) * od.c + co) * od.slab;
                    for (int kz = 0; kz < k; ++kz) {
                        const auto rz = detail::out_range(od.z, id.z, stride, pad, kz);
                        for (int ky = 0; ky < k; ++ky) {
                            const auto ry = detail::out_range(od.y, id.y, stride, pad, ky);
                            for (int kx = 0; kx < k; ++kx) {
                                const auto rx = detail::out_range(od.x, id.x, stride, pad, kx);
                                const T wv = weight.data[(((static_cast<std::int64_t>(ci) * wd.c + co) * k + kz) * k + ky) * k + kx];
                                for (int z = rz.lo; z <= rz.hi; ++z) {
                                    const int zz = z * stride - pad + kz;
                                    for (int y = ry.lo; y <= ry.hi; ++y) {
                                        const int yy = y * stride - pad + ky;
                                        const T* g_row = g_base + (static_cast<std::int64_t>(zz) * od.y + yy) * od.x - pad + kx;
                                        T* di_row = di_base + (static_cast<std::int64_t>(z) * id.y + y) * id.x;
                                        for (int x = rx.lo; x <= rx.hi; ++x)
                                            di_row[x] += wv * g_row[x * stride];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Batch norm over (N, Z, Y, X) per channel.
//   Train       — batch stats, running stats updated
//   TrainStatic — batch stats, running stats untouched (forwards that must
//                 leave the network byte-identical, e.g. gated-off D steps)
//   Eval        — running stats, no batch dependence
// ---------------------------------------------------------------------------

enum class BnMode { kTrain, kTrainStatic, kEval };

template <typename T>
struct BnCache {
    Tensor<T> x_hat;
    std::vector<T> inv_std;
    bool batch_stats = true;  // false => stats were constants (Eval)
};

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& in, const Tensor<T>& gamma, const Tensor<T>& beta,
                            Tensor<T>& running_mean, Tensor<T>& running_var, T eps, T momentum,
                            BnMode mode, BnCache<T>* cache) {
    const auto id = detail::dims5(in, "batchnorm input");
    require(gamma.shape.size() == 1 && gamma.shape[0] == id.c, "batchnorm: gamma shape mismatch");
    require(beta.shape == gamma.shape && running_mean.shape == gamma.shape &&
                running_var.shape == gamma.shape,
            "batchnorm: per-channel tensor shape mismatch");
    const std::int64_t m = static_cast<std::int64_t>(id.n) * id.slab;
    require(m > 0, "batchnorm: empty input");

    Tensor<T> out(in.shape);
    if (cache != nullptr) {
        cache->x_hat = Tensor<T>(in.shape);
        cache->inv_std.assign(static_cast<std::size_t>(id.c), T(0));
        cache->batch_stats = (mode != BnMode::kEval);
    }

    parallel_for(id.c, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t c = b; c < e; ++c) {
            T mean, var;
            if (mode == BnMode::kEval) {
                mean = running_mean.data[static_cast<std::size_t>(c)];
                var = running_var.data[static_cast<std::size_t>(c)];
            } else {
                T sum(0);
                for (int n = 0; n < id.n; ++n) {
                    const T* p = in.data.data() + (static_cast<std::int64_t>(n) * id.c + c) * id.slab;
                    for (std::int64_t i = 0; i < id.slab; ++i) sum += p[i];
                }
                mean = sum / static_cast<T>(m);
                T sq(0);
                for (int n = 0; n < id.n; ++n) {
                    const T* p = in.data.data() + (static_cast<std::int64_t>(n) * id.c + c) * id.slab;
                    for (std::int64_t i = 0; i < id.slab; ++i) {
                        const T d = p[i] - mean;
                        sq += d * d;
                    }
                }
                var = sq / static_cast<T>(m);
                if (mode == BnMode::kTrain) {
                    running_mean.data[static_cast<std::size_t>(c)] =
                        (T(1) - momentum) * running_mean.data[static_cast<std::size_t>(c)] + momentum * mean;
                    running_var.data[static_cast<std::size_t>(c)] =
                        (T(1) - momentum) * running_var.data[static_cast<std::size_t>(c)] + momentum * var;
                }
            }
            const T inv_std = T(1) / std::sqrt(var + eps);
            const T g = gamma.data[static_cast<std::size_t>(c)];
            const T bt = beta.data[static_cast<std::size_t>(c)];
            if (cache != nullptr) cache->inv_std[static_cast<std::size_t>(c)] = inv_std;
            for (int n = 0; n < id.n; ++n) {
                const std::int64_t base = (static_cast<std::int64_t>(n) * id.c + c) * id.slab;
                const T* p = in.data.data() + base;
                T* o = out.data.data() + base;
                T* xh = cache != nullptr ? cache->x_hat.data.data() + base : nullptr;
                for (std::int64_t i = 0; i < id.slab; ++i) {
                    const T norm = (p[i] - mean) * inv_std;
                    if (xh != nullptr) xh[i] = norm;
                    o[i] = g * norm + bt;
                }
            }
        }
    });
    return out;
}

template <typename T>
Tensor<T> batchnorm_backward(const Tensor<T>& dout, const Tensor<T>& gamma, const BnCache<T>& cache,
                             Tensor<T>* dgamma, Tensor<T>* dbeta) {
    const auto od = detail::dims5(dout, "batchnorm dout");
    require(cache.x_hat.shape == dout.shape, "batchnorm backward: cache/dout mismatch");
    const std::int64_t m = static_cast<std::int64_t>(od.n) * od.slab;
    Tensor<T> din(dout.shape);
    if (dgamma != nullptr) *dgamma = Tensor<T>({od.c});
    if (dbeta != nullptr) *dbeta = Tensor<T>({od.c});

    parallel_for(od.c, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t c = b; c < e; ++c) {
            T sum_g(0), sum_gx(0);
            for (int n = 0; n < od.n; ++n) {
                const std::int64_t base = (static_cast<std::int64_t>(n) * od.c + c) * od.slab;
                const T* g = dout.data.data() + base;
                const T* xh = cache.x_hat.data.data() + base;
                for (std::int64_t i = 0; i < od.slab; ++i) {
                    sum_g += g[i];
                    sum_gx += g[i] * xh[i];
                }
            }
            if (dgamma != nullptr) dgamma->data[static_cast<std::size_t>(c)] = sum_gx;
            if (dbeta != nullptr) dbeta->data[static_cast<std::size_t>(c)] = sum_g;
            const T scale = gamma.data[static_cast<std::size_t>(c)] * cache.inv_std[static_cast<std::size_t>(c)];
            if (cache.batch_stats) {
                const T mean_g = sum_g / static_cast<T>(m);
                const T mean_gx = sum_gx / static_cast<T>(m);
                for (int n = 0; n < od.n; ++n) {
                    const std::int64_t base = (static_cast<std::int64_t>(n) * od.c + c) * od.slab;
                    const T* g = dout.data.data() + base;
                    const T* xh = cache.x_hat.data.data() + base;
                    T* d = din.data.data() + base;
                    for (std::int64_t i = 0; i < od.slab; ++i)
                        d[i] = scale * (g[i] - mean_g - xh[i] * mean_gx);
                }
            } else {
                for (int n = 0; n < od.n; ++n) {
                    const std::int64_t base = (static_cast<std::int64_t>(n) * od.c + c) * od.slab;
                    const T* g = dout.data.data() + base;
                    T* d = din.data.data() + base;
                    for (std::int64_t i = 0; i < od.slab; ++i) d[i] = scale * g[i];
                }
            }
        }
    });
    return din;
}

// ---------------------------------------------------------------------------
// Elementwise activations. Backward variants scale a gradient in place using
// the *output* of the forward pass (cheaper than keeping pre-activations).
// ---------------------------------------------------------------------------

template <typename T>
void relu_(Tensor<T>& x) {
    for (auto& v : x.data) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_backward_(Tensor<T>& grad, const Tensor<T>& out) {
    require(grad.shape == out.shape, "relu backward: shape mismatch");
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        if (!(out.data[i] > T(0))) grad.data[i] = T(0);
}

template <typename T>
void leaky_relu_(Tensor<T>& x, T slope) {
    for (auto& v : x.data) v = v > T(0) ? v : slope * v;
}

template <typename T>
void leaky_relu_backward_(Tensor<T>& grad, const Tensor<T>& out, T slope) {
    require(grad.shape == out.shape, "leaky relu backward: shape mismatch");
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        if (!(out.data[i] > T(0))) grad.data[i] *= slope;
}

template <typename T>
void sigmoid_(Tensor<T>& x) {
    for (auto& v : x.data) {
        if (v >= T(0)) {
            v = T(1) / (T(1) + std::exp(-v));
        } else {
            const T e = std::exp(v);
            v = e / (T(1) + e);
        }
    }
}

template <typename T>
void sigmoid_backward_(Tensor<T>& grad, const Tensor<T>& out) {
    require(grad.shape == out.shape, "sigmoid backward: shape mismatch");
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        grad.data[i] *= out.data[i] * (T(1) - out.data[i]);
}

}  // namespace pvgan::nn
