#include "pvgan/voxel_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "pvgan/errors.hpp"

namespace pvgan {
namespace {

constexpr std::size_t kMaxDim = 1024;  // 1024^3 floats is already 4 GiB

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw IoError("read failure on " + path.string());
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw IoError("write failure on " + path.string());
}

std::uint32_t read_u32le(const std::string& b, std::size_t off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

void append_u32le(std::string& b, std::uint32_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
    b.push_back(static_cast<char>((v >> 16) & 0xff));
    b.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace

VoxelGrid read_vox1(const std::filesystem::path& path) {
    const std::string b = read_file(path);
    if (b.size() < 4 || b.compare(0, 4, "VOX1") != 0)
        throw FormatError(path.string() + ": bad VOX1 magic", 0);
    if (b.size() < 17) throw FormatError(path.string() + ": truncated VOX1 header", b.size());

    const std::uint64_t dx = read_u32le(b, 4);
    const std::uint64_t dy = read_u32le(b, 8);
    const std::uint64_t dz = read_u32le(b, 12);
    if (dx == 0 || dy == 0 || dz == 0 || dx > kMaxDim || dy > kMaxDim || dz > kMaxDim)
        throw FormatError(path.string() + ": VOX1 dimension overflow", 4);
    if (!(dx == dy && dy == dz))
        throw FormatError(path.string() + ": VOX1 dimensions are not cubic", 4);

    const unsigned char flag = static_cast<unsigned char>(b[16]);
    const std::uint64_t n = dx * dy * dz;
    const std::size_t payload_off = 17;

    std::vector<float> values(n);
    if (flag == 0) {
        const std::size_t need = static_cast<std::size_t>((n + 7) / 8);
        if (b.size() - payload_off < need)
            throw FormatError(path.string() + ": truncated VOX1 bit payload", b.size());
        if (b.size() - payload_off > need)
            throw FormatError(path.string() + ": trailing bytes after VOX1 payload",
                              payload_off + need);
        for (std::uint64_t i = 0; i < n; ++i) {
            const unsigned char byte = static_cast<unsigned char>(b[payload_off + (i >> 3)]);
            values[i] = (byte >> (i & 7)) & 1 ? 1.0f : 0.0f;
        }
    } else if (flag == 1) {
        const std::size_t need = static_cast<std::size_t>(n * 4);
        if (b.size() - payload_off < need)
            throw FormatError(path.string() + ": truncated VOX1 float payload", b.size());
        if (b.size() - payload_off > need)
            throw FormatError(path.string() + ": trailing bytes after VOX1 payload",
                              payload_off + need);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint32_t u = read_u32le(b, payload_off + i * 4);
            float f;
            std::memcpy(&f, &u, 4);
            if (!(f >= 0.0f && f <= 1.0f))
                throw FormatError(path.string() + ": VOX1 value outside [0,1]",
                                  payload_off + i * 4);
            values[i] = f;
        }
    } else {
        throw FormatError(path.string() + ": unknown VOX1 payload flag", 16);
    }
    return VoxelGrid::from_values(static_cast<int>(dx), std::move(values));
}

void write_vox1(const VoxelGrid& grid, const std::filesystem::path& path,
                std::optional<Vox1Payload> payload) {
    auto vals = grid.values();
    if (!payload) {
        bool binary = true;
        for (float v : vals)
            if (v != 0.0f && v != 1.0f) {
                binary = false;
                break;
            }
        payload = binary ? Vox1Payload::bits : Vox1Payload::floats;
    }

    std::string b;
    b.reserve(17 + (payload == Vox1Payload::bits ? vals.size() / 8 + 1 : vals.size() * 4));
    b += "VOX1";
    const auto r = static_cast<std::uint32_t>(grid.resolution());
    append_u32le(b, r);
    append_u32le(b, r);
    append_u32le(b, r);
    b.push_back(static_cast<char>(*payload));

    if (*payload == Vox1Payload::bits) {
        std::string packed((vals.size() + 7) / 8, '\0');
        for (std::size_t i = 0; i < vals.size(); ++i) {
            require(vals[i] == 0.0f || vals[i] == 1.0f,
                    "write_vox1: bit payload requires binary values");
            if (vals[i] == 1.0f) packed[i >> 3] |= static_cast<char>(1 << (i & 7));
        }
        b += packed;
    } else {
        for (float v : vals) {
            std::uint32_t u;
            std::memcpy(&u, &v, 4);
            append_u32le(b, u);
        }
    }
    write_file(path, b);
}

namespace {

// Consumes one whitespace-delimited token, tracking the byte offset for error
// reporting.
struct TokenReader {
    const std::string& b;
    std::size_t pos = 0;

    std::string next() {
        while (pos < b.size() && std::isspace(static_cast<unsigned char>(b[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < b.size() && !std::isspace(static_cast<unsigned char>(b[pos]))) ++pos;
        return b.substr(start, pos - start);
    }

    std::string rest_of_line() {
        while (pos < b.size() && (b[pos] == ' ' || b[pos] == '\t')) ++pos;
        const std::size_t start = pos;
        while (pos < b.size() && b[pos] != '\n') ++pos;
        std::size_t end = pos;
        while (end > start && std::isspace(static_cast<unsigned char>(b[end - 1]))) --end;
        return b.substr(start, end - start);
    }

    void skip_line() {
        while (pos < b.size() && b[pos] != '\n') ++pos;
    }
};

}  // namespace

BinvoxFile read_binvox(const std::filesystem::path& path) {
    const std::string b = read_file(path);
    TokenReader tr{b};

    if (tr.next() != "#binvox") throw FormatError(path.string() + ": bad binvox magic", 0);
    if (tr.next() != "1")
        throw FormatError(path.string() + ": unsupported binvox version", tr.pos);

    long dim[3] = {-1, -1, -1};
    BinvoxMeta meta;
    bool have_translate = false, have_scale = false;
    for (;;) {
        const std::size_t kw_off = tr.pos;
        const std::string kw = tr.next();
        if (kw.empty()) throw FormatError(path.string() + ": binvox header missing data", tr.pos);
        if (kw == "data") break;
        if (kw == "dim") {
            for (long& d : dim) {
                try {
                    d = std::stol(tr.next());
                } catch (const std::exception&) {
                    throw FormatError(path.string() + ": malformed binvox dim", kw_off);
                }
            }
        } else if (kw == "translate") {
            meta.translate = tr.rest_of_line();
            have_translate = true;
        } else if (kw == "scale") {
            meta.scale = tr.rest_of_line();
            have_scale = true;
        } else {
            tr.skip_line();  // unknown keyword, tolerated
        }
    }
    (void)have_translate;
    (void)have_scale;
    if (b.size() <= tr.pos || b[tr.pos] != '\n')
        throw FormatError(path.string() + ": expected newline after data keyword", tr.pos);
    std::size_t pos = tr.pos + 1;

    if (dim[0] < 0) throw FormatError(path.string() + ": binvox header missing dim", pos);
    if (dim[0] == 0 || dim[0] != dim[1] || dim[1] != dim[2])
        throw FormatError(path.string() + ": binvox dimensions are not cubic", 0);
    if (dim[0] > static_cast<long>(kMaxDim))
        throw FormatError(path.string() + ": binvox dimension overflow", 0);

    const std::size_t r = static_cast<std::size_t>(dim[0]);
    const std::size_t n = r * r * r;
    std::vector<float> flat(n);  // binvox scan order
    std::size_t filled = 0;
    while (filled < n) {
        if (pos + 2 > b.size())
            throw FormatError(path.string() + ": truncated binvox run-length data", b.size());
        const unsigned char value = static_cast<unsigned char>(b[pos]);
        const unsigned char count = static_cast<unsigned char>(b[pos + 1]);
        if (value > 1)
            throw FormatError(path.string() + ": binvox run value not 0/1", pos);
        if (count == 0 || filled + count > n)
            throw FormatError(path.string() + ": binvox run overflows declared dimensions", pos);
        for (unsigned c = 0; c < count; ++c) flat[filled++] = value ? 1.0f : 0.0f;
        pos += 2;
    }
    if (pos != b.size())
        throw FormatError(path.string() + ": trailing bytes after binvox data", pos);

    // scan order flat = x*R^2 + z*R + y  ->  grid (x, y, z)
    VoxelGrid grid(static_cast<int>(r));
    for (std::size_t x = 0; x < r; ++x)
        for (std::size_t z = 0; z < r; ++z)
            for (std::size_t y = 0; y < r; ++y)
                grid.at(static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)) =
                    flat[x * r * r + z * r + y];
    return BinvoxFile{std::move(grid), std::move(meta)};
}

void write_binvox(const VoxelGrid& grid, const std::filesystem::path& path,
                  const BinvoxMeta& meta) {
    const int r = grid.resolution();
    std::string b;
    b += "#binvox 1\n";
    b += "dim " + std::to_string(r) + " " + std::to_string(r) + " " + std::to_string(r) + "\n";
    b += "translate " + meta.translate + "\n";
    b += "scale " + meta.scale + "\n";
    b += "data\n";

    unsigned char run_value = 0;
    unsigned run_len = 0;
    bool first = true;
    auto flush = [&] {
        if (run_len > 0) {
            b.push_back(static_cast<char>(run_value));
            b.push_back(static_cast<char>(run_len));
            run_len = 0;
        }
    };
    for (int x = 0; x < r; ++x)
        for (int z = 0; z < r; ++z)
            for (int y = 0; y < r; ++y) {
                const unsigned char v = grid.at(x, y, z) > 0.5f ? 1 : 0;
                if (first) {
                    run_value = v;
                    run_len = 1;
                    first = false;
                } else if (v == run_value && run_len < 255) {
                    ++run_len;
                } else {
                    flush();
                    run_value = v;
                    run_len = 1;
                }
            }
    flush();
    write_file(path, b);
}

VoxelGrid read_grid(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".vox1") return read_vox1(path);
    if (ext == ".binvox") return read_binvox(path).grid;
    throw FormatError(path.string() + ": unknown grid extension '" + ext + "'", 0);
}

void write_grid(const VoxelGrid& grid, const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".vox1") return write_vox1(grid, path);
    if (ext == ".binvox") return write_binvox(grid, path);
    throw FormatError(path.string() + ": unknown grid extension '" + ext + "'", 0);
}

std::int64_t write_obj(const VoxelGrid& grid, const std::filesystem::path& path,
                       float threshold) {
    require(threshold > 0.0f && threshold < 1.0f, "write_obj: threshold must be in (0,1)");
    std::ostringstream out;
    out << "# voxel cube mesh, resolution " << grid.resolution() << "\n";

    // Cube corner offsets and the 12 triangles (CCW from outside).
    static const int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    static const int tri[12][3] = {{0, 3, 2}, {0, 2, 1},    // z = 0 face
                                   {4, 5, 6}, {4, 6, 7},    // z = 1 face
                                   {0, 1, 5}, {0, 5, 4},    // y = 0 face
                                   {3, 7, 6}, {3, 6, 2},    // y = 1 face
                                   {0, 4, 7}, {0, 7, 3},    // x = 0 face
                                   {1, 2, 6}, {1, 6, 5}};   // x = 1 face

    std::int64_t cubes = 0;
    const int r = grid.resolution();
    for (int z = 0; z < r; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                if (!(grid.at(x, y, z) > threshold)) continue;
                const std::int64_t base = cubes * 8;
                for (const auto& c : corner)
                    out << "v " << x + c[0] << " " << y + c[1] << " " << z + c[2] << "\n";
                for (const auto& t : tri)
                    out << "f " << base + t[0] + 1 << " " << base + t[1] + 1 << " "
                        << base + t[2] + 1 << "\n";
                ++cubes;
            }
    write_file(path, out.str());
    return cubes;
}

}  // namespace pvgan
