#include "tic/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace tic {

namespace {

constexpr char kMagic[4] = {'T', 'I', 'C', '4'};
constexpr std::size_t kHeaderSize = 32;

void put_u32(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v & 0xff);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

void write_raw(const std::string& path, std::uint32_t nt, std::uint32_t ns,
               std::uint32_t nx, std::uint32_t ny, const std::vector<double>& data) {
    std::array<unsigned char, kHeaderSize> hdr{};
    std::memcpy(hdr.data(), kMagic, 4);
    put_u32(hdr.data() + 4, nt);
    put_u32(hdr.data() + 8, ns);
    put_u32(hdr.data() + 12, nx);
    put_u32(hdr.data() + 16, ny);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(hdr.data()), kHeaderSize);
    static_assert(std::endian::native == std::endian::little,
                  "t4b writer assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw ConfigError("short write: " + path);
}

std::vector<double> read_raw(const std::string& path, std::array<std::uint32_t, 4>& ext) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::array<unsigned char, kHeaderSize> hdr{};
    in.read(reinterpret_cast<char*>(hdr.data()), kHeaderSize);
    if (!in || std::memcmp(hdr.data(), kMagic, 4) != 0)
        throw ConfigError("bad t4b header: " + path);
    for (int i = 0; i < 4; ++i) ext[i] = get_u32(hdr.data() + 4 + 4 * i);
    const std::size_t n =
        std::size_t(ext[0]) * ext[1] * ext[2] * ext[3];
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigError("truncated t4b payload: " + path);
    return data;
}

} // namespace

void write_t4b(const std::string& path, const Field4& u) {
    write_raw(path, static_cast<std::uint32_t>(u.ns), static_cast<std::uint32_t>(u.ns),
              static_cast<std::uint32_t>(u.ny), static_cast<std::uint32_t>(u.ny),
              u.values);
}

void write_t4b(const std::string& path, const Field2& v) {
    write_raw(path, 1, static_cast<std::uint32_t>(v.ns), 1,
              static_cast<std::uint32_t>(v.ny), v.values);
}

Field4 read_t4b(const std::string& path) {
    std::array<std::uint32_t, 4> ext{};
    std::vector<double> data = read_raw(path, ext);
    if (ext[0] != ext[1] || ext[2] != ext[3])
        throw ConfigError("t4b extents not of Field4 shape: " + path);
    Field4 u(ext[0], ext[2]);
    u.values = std::move(data);
    return u;
}

Field2 read_t4b_2(const std::string& path) {
    std::array<std::uint32_t, 4> ext{};
    std::vector<double> data = read_raw(path, ext);
    if (ext[0] != 1 || ext[2] != 1)
        throw ConfigError("t4b extents not of Field2 shape: " + path);
    Field2 v(ext[1], ext[3]);
    v.values = std::move(data);
    return v;
}

void write_csv(const std::string& path, const SpaceTimeGrid& g, const Field2& v,
               const std::string& value_name) {
    write_csv(path, g, {{value_name, &v}});
}

void write_csv(const std::string& path, const SpaceTimeGrid& g,
               const std::vector<std::pair<std::string, const Field2*>>& cols) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "s,y";
    for (const auto& [name, f] : cols) out << ',' << name;
    out << '\n';
    out << std::setprecision(17);
    for (std::size_t j = 0; j < g.ns(); ++j)
        for (std::size_t l = 0; l < g.ny(); ++l) {
            out << g.s_nodes[j] << ',' << g.y_nodes[l];
            for (const auto& [name, f] : cols) out << ',' << f->at(j, l);
            out << '\n';
        }
    if (!out) throw ConfigError("short write: " + path);
}

} // namespace tic
