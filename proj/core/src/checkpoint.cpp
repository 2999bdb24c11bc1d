#include "pvgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "pvgan/errors.hpp"

namespace pvgan {

namespace {

constexpr char kMagic[6] = {'P', 'V', 'G', 'A', 'N', '1'};

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

struct Writer {
    std::vector<unsigned char> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str16(const std::string& s) {
        require(s.size() <= 0xffff, "checkpoint tensor name too long");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct Reader {
    const std::vector<unsigned char>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > bytes.size())
            throw FormatError("truncated checkpoint while reading " + std::string(what), pos);
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes[pos++];
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(bytes[pos + i]) << (8 * i);
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string str16(const char* what) {
        const std::uint16_t n = u16(what);
        need(n, what);
        std::string s(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
        return s;
    }
};

using NamedTensors = std::vector<std::pair<std::string, Tensor<float>*>>;

// Canonical persistent tensor list: network state then optimizer moments.
NamedTensors collect_tensors(TrainerState<float>& state) {
    NamedTensors out;
    const auto net_tensors = [&out](ConvNet<float>& net) {
        net.for_each_tensor([&out](const std::string& name, Tensor<float>& t) {
            out.emplace_back(name, &t);
        });
    };
    const auto opt_tensors = [&out](ConvNet<float>& net, AdamState<float>& opt) {
        std::size_t idx = 0;
        net.for_each_trainable([&](const std::string& name, Tensor<float>&) {
            out.emplace_back("opt." + name + ".m", &opt.m[idx]);
            out.emplace_back("opt." + name + ".v", &opt.v[idx]);
            ++idx;
        });
    };
    net_tensors(state.gen);
    net_tensors(state.disc);
    opt_tensors(state.gen, state.opt_g);
    opt_tensors(state.disc, state.opt_d);
    return out;
}

}  // namespace

void save_checkpoint(TrainerState<float>& state, const std::filesystem::path& path) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + sizeof(kMagic));
    w.u32(kCheckpointVersion);

    const ModelConfig& c = state.gen.config;
    w.i32(c.resolution);
    w.i32(c.latent_dim);
    w.i32(c.base_channels);
    w.i32(c.n_conditions);
    w.u8(c.condition_encoding == ConditionEncoding::kScalar ? 0 : 1);
    w.u8(c.latent_prior == LatentPrior::kNormal ? 0 : 1);
    w.f64(c.leaky_slope);
    w.f64(c.init_std);
    w.f64(c.bn_eps);
    w.f64(c.bn_momentum);

    w.u64(state.step);
    w.f64(state.prev_accuracy);
    w.u64(state.opt_g.t);
    w.u64(state.opt_d.t);

    const NamedTensors tensors = collect_tensors(state);
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        w.str16(name);
        w.u8(static_cast<std::uint8_t>(t->shape.size()));
        for (int d : t->shape) w.u32(static_cast<std::uint32_t>(d));
        for (float v : t->data) w.f32(v);
    }
    write_file(path, w.bytes);
}

TrainerState<float> load_checkpoint(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    Reader r{bytes};

    r.need(sizeof(kMagic), "magic");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not a PVGAN1 checkpoint (bad magic)", 0);
    r.pos += sizeof(kMagic);
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint version " + std::to_string(version) + " found, expected " +
                              std::to_string(kCheckpointVersion),
                          sizeof(kMagic));

    ModelConfig c;
    c.resolution = r.i32("resolution");
    c.latent_dim = r.i32("latent_dim");
    c.base_channels = r.i32("base_channels");
    c.n_conditions = r.i32("n_conditions");
    c.condition_encoding = r.u8("condition_encoding") == 0 ? ConditionEncoding::kScalar
                                                           : ConditionEncoding::kOneHot;
    c.latent_prior = r.u8("latent_prior") == 0 ? LatentPrior::kNormal : LatentPrior::kUniform01;
    c.leaky_slope = r.f64("leaky_slope");
    c.init_std = r.f64("init_std");
    c.bn_eps = r.f64("bn_eps");
    c.bn_momentum = r.f64("bn_momentum");
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError("checkpoint carries invalid model config: " + std::string(e.what()), 0);
    }

    TrainerState<float> state = make_initial_state<float>(c, 0);
    state.step = r.u64("step");
    state.prev_accuracy = r.f64("prev_accuracy");
    state.opt_g.t = r.u64("opt_g.t");
    state.opt_d.t = r.u64("opt_d.t");

    std::map<std::string, Tensor<float>*> expected;
    for (auto& [name, t] : collect_tensors(state)) {
        expected.emplace(name, t);
    }

    const std::uint32_t n_tensors = r.u32("tensor count");
    if (n_tensors != expected.size())
        throw FormatError("checkpoint holds " + std::to_string(n_tensors) + " tensors, expected " +
                              std::to_string(expected.size()),
                          r.pos - 4);
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::string name = r.str16("tensor name");
        const auto it = expected.find(name);
        if (it == expected.end())
            throw FormatError("unexpected or duplicate checkpoint tensor: " + name, r.pos);
        Tensor<float>* t = it->second;
        const std::uint8_t rank = r.u8("tensor rank");
        if (rank != t->shape.size())
            throw FormatError("tensor " + name + " rank mismatch", r.pos);
        for (std::size_t d = 0; d < t->shape.size(); ++d) {
            const std::uint32_t dim = r.u32("tensor dim");
            if (dim != static_cast<std::uint32_t>(t->shape[d]))
                throw FormatError("tensor " + name + " shape mismatch", r.pos);
        }
        for (auto& v : t->data) v = r.f32("tensor data");
        expected.erase(it);
    }
    if (!expected.empty())
        throw FormatError("checkpoint is missing tensor: " + expected.begin()->first, r.pos);
    if (r.pos != bytes.size())
        throw FormatError("trailing bytes after checkpoint payload", r.pos);
    return state;
}

}  // namespace pvgan
