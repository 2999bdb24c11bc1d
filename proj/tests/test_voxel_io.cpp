#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pvgan/errors.hpp"
#include "pvgan/rng.hpp"
#include "pvgan/voxel_grid.hpp"
#include "pvgan/voxel_io.hpp"

using namespace pvgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "pvgan_io_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

VoxelGrid random_binary(int r, std::uint64_t seed) {
    Rng rng(seed);
    VoxelGrid g(r);
    for (float& v : g.values()) v = rng.uniform() < 0.3 ? 1.0f : 0.0f;
    return g;
}

VoxelGrid random_float(int r, std::uint64_t seed) {
    Rng rng(seed);
    VoxelGrid g(r);
    for (float& v : g.values()) v = static_cast<float>(rng.uniform());
    return g;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("vox1 round trip, both payloads") {
    const fs::path p = temp_dir() / "rt.vox1";

    const VoxelGrid bin = random_binary(8, 3);
    write_vox1(bin, p);
    CHECK(read_vox1(p) == bin);
    // 8^3 = 512 bits = 64 payload bytes + 17 header bytes.
    CHECK(fs::file_size(p) == 17 + 64);

    const VoxelGrid flt = random_float(8, 4);
    write_vox1(flt, p);
    CHECK(read_vox1(p) == flt);
    CHECK(fs::file_size(p) == 17 + 512 * 4);

    // Forcing float payload for binary content still round-trips.
    write_vox1(bin, p, Vox1Payload::floats);
    CHECK(read_vox1(p) == bin);
}

TEST_CASE("vox1 write is byte-stable") {
    const fs::path a = temp_dir() / "stable_a.vox1";
    const fs::path b = temp_dir() / "stable_b.vox1";
    const VoxelGrid g = random_float(4, 9);
    write_vox1(g, a);
    write_vox1(read_vox1(a), b);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("vox1 malformed inputs report byte offsets") {
    const fs::path p = temp_dir() / "bad.vox1";

    spit(p, "NOPE");
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("bad VOX1 magic"), FormatError);

    spit(p, std::string("VOX1") + std::string(8, '\0'));
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("truncated VOX1 header"), FormatError);

    // Header for 2x2x2 bits, but payload missing entirely.
    std::string hdr = "VOX1";
    const auto le32 = [](std::uint32_t v) {
        std::string s(4, '\0');
        for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>(v >> (8 * i));
        return s;
    };
    hdr += le32(2) + le32(2) + le32(2);
    spit(p, hdr + '\0');
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("truncated VOX1 bit payload"), FormatError);

    spit(p, hdr + '\0' + std::string(2, '\0'));
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("trailing bytes"), FormatError);

    spit(p, hdr + le32(2).substr(0, 1) + std::string(1, '\x07'));
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("unknown VOX1 payload flag"), FormatError);

    spit(p, "VOX1" + le32(2) + le32(3) + le32(2) + '\0' + std::string(2, '\0'));
    CHECK_THROWS_WITH_AS(read_vox1(p), doctest::Contains("not cubic"), FormatError);

    CHECK_THROWS_AS(read_vox1(temp_dir() / "does_not_exist.vox1"), IoError);

    // The offset is carried in the message.
    spit(p, "NOPE");
    try {
        read_vox1(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset 0") != std::string::npos);
    }
}

TEST_CASE("binvox round trip preserves bytes and metadata") {
    const fs::path p = temp_dir() / "rt.binvox";
    const VoxelGrid g = random_binary(8, 11);
    BinvoxMeta meta;
    meta.translate = "-0.5 0 2.25";
    meta.scale = "3.5";
    write_binvox(g, p, meta);

    const BinvoxFile back = read_binvox(p);
    CHECK(back.grid == g);
    CHECK(back.meta == meta);

    const fs::path p2 = temp_dir() / "rt2.binvox";
    write_binvox(back.grid, p2, back.meta);
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("binvox scan order is y-fastest") {
    // Cell (x=1, y=0, z=0) of a 2-grid sits at flat binvox index
    // x*R^2 + z*R + y = 4, so the run stream is 0x00 x4, 0x01 x1, 0x00 x3.
    VoxelGrid g(2);
    g.at(1, 0, 0) = 1.0f;
    const fs::path p = temp_dir() / "scan.binvox";
    write_binvox(g, p);
    const std::string bytes = slurp(p);
    const std::size_t data_pos = bytes.find("data\n");
    REQUIRE(data_pos != std::string::npos);
    const std::string runs = bytes.substr(data_pos + 5);
    REQUIRE(runs.size() == 6);
    CHECK(static_cast<unsigned char>(runs[0]) == 0);
    CHECK(static_cast<unsigned char>(runs[1]) == 4);
    CHECK(static_cast<unsigned char>(runs[2]) == 1);
    CHECK(static_cast<unsigned char>(runs[3]) == 1);
    CHECK(static_cast<unsigned char>(runs[4]) == 0);
    CHECK(static_cast<unsigned char>(runs[5]) == 3);
    CHECK(read_binvox(p).grid == g);
}

TEST_CASE("binvox long runs split at 255") {
    const VoxelGrid g(8, 1.0f);  // 512 occupied cells -> runs 255, 255, 2
    const fs::path p = temp_dir() / "runs.binvox";
    write_binvox(g, p);
    const std::string bytes = slurp(p);
    const std::string runs = bytes.substr(bytes.find("data\n") + 5);
    REQUIRE(runs.size() == 6);
    CHECK(static_cast<unsigned char>(runs[1]) == 255);
    CHECK(static_cast<unsigned char>(runs[3]) == 255);
    CHECK(static_cast<unsigned char>(runs[5]) == 2);
    CHECK(read_binvox(p).grid == g);
}

TEST_CASE("binvox malformed inputs") {
    const fs::path p = temp_dir() / "bad.binvox";

    spit(p, "#nope 1\n");
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("bad binvox magic"), FormatError);

    spit(p, "#binvox 2\ndim 2 2 2\ndata\n");
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("unsupported binvox version"),
                         FormatError);

    spit(p, "#binvox 1\ndata\n");
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("missing dim"), FormatError);

    spit(p, "#binvox 1\ndim 2 3 2\ndata\n\x01\x0c");
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("not cubic"), FormatError);

    spit(p, std::string("#binvox 1\ndim 2 2 2\ndata\n\x01\x04", 27));
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("truncated binvox run-length"),
                         FormatError);

    spit(p, "#binvox 1\ndim 2 2 2\ndata\n\x01\x09");
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("overflows"), FormatError);

    spit(p, std::string("#binvox 1\ndim 2 2 2\ndata\n\x02\x08", 27));
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("run value not 0/1"), FormatError);

    spit(p, std::string("#binvox 1\ndim 2 2 2\ndata\n\x01\x08\x00", 28));
    CHECK_THROWS_WITH_AS(read_binvox(p), doctest::Contains("trailing bytes"), FormatError);
}

TEST_CASE("read_grid and write_grid dispatch on extension") {
    const VoxelGrid g = random_binary(4, 21);
    const fs::path v = temp_dir() / "d.vox1";
    const fs::path b = temp_dir() / "d.binvox";
    write_grid(g, v);
    write_grid(g, b);
    CHECK(read_grid(v) == g);
    CHECK(read_grid(b) == g);
    CHECK_THROWS_WITH_AS(write_grid(g, temp_dir() / "d.ply"), doctest::Contains("unknown grid"),
                         FormatError);
    CHECK_THROWS_WITH_AS(read_grid(temp_dir() / "d.ply"), doctest::Contains("unknown grid"),
                         FormatError);
}

TEST_CASE("obj export writes one cube per occupied voxel") {
    VoxelGrid g(4);
    g.at(0, 0, 0) = 1.0f;
    g.at(2, 3, 1) = 0.8f;
    g.at(1, 1, 1) = 0.5f;  // at threshold -> excluded
    const fs::path p = temp_dir() / "mesh.obj";
    CHECK(write_obj(g, p) == 2);

    const std::string text = slurp(p);
    std::size_t vertices = 0, faces = 0, pos = 0;
    while ((pos = text.find("\nv ", pos)) != std::string::npos) ++vertices, ++pos;
    pos = 0;
    while ((pos = text.find("\nf ", pos)) != std::string::npos) ++faces, ++pos;
    if (text.rfind("v ", 0) == 0) ++vertices;
    CHECK(vertices == 16);
    CHECK(faces == 24);

    CHECK(write_obj(g, p, 0.1f) == 3);
}
