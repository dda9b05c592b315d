#include "gexia/gxt.hpp"

#include <cstring>
#include <fstream>

namespace gexia::gxt {

namespace {

constexpr char kMagic[4] = {'G', 'X', 'T', '1'};

void put_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& is, const std::string& path) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw FormatError("truncated GXT1 header in " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

Header read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad GXT1 magic in " + path);
    unsigned char meta[4];
    is.read(reinterpret_cast<char*>(meta), 4);
    if (!is) throw FormatError("truncated GXT1 header in " + path);
    if (meta[0] > 2) throw FormatError("unknown GXT1 dtype code " + std::to_string(meta[0]) + " in " + path);
    const int rank = meta[1];
    if (rank < 1 || rank > 4) throw FormatError("GXT1 rank must be 1..4, got " + std::to_string(rank) + " in " + path);
    if (meta[2] != 0 || meta[3] != 0) throw FormatError("nonzero reserved bytes in " + path);
    std::vector<std::int64_t> dims(static_cast<std::size_t>(rank));
    for (auto& d : dims) {
        const std::uint64_t e = get_u64_le(is, path);
        if (e == 0) throw FormatError("zero extent in " + path);
        d = static_cast<std::int64_t>(e);
    }
    return Header{static_cast<Dtype>(meta[0]), Shape::of(dims)};
}

}  // namespace

std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::u8: return 1;
    }
    throw FormatError("unknown dtype");
}

void write_raw(const std::filesystem::path& path, Dtype dtype, const Shape& shape, const void* payload,
               std::size_t bytes) {
    const std::size_t expect = static_cast<std::size_t>(shape.numel()) * dtype_size(dtype);
    if (bytes != expect) throw FormatError("payload size mismatch writing " + path.string());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for write: " + path.string());
    os.write(kMagic, 4);
    unsigned char meta[4] = {static_cast<unsigned char>(dtype), static_cast<unsigned char>(shape.rank()), 0, 0};
    os.write(reinterpret_cast<const char*>(meta), 4);
    for (int i = 0; i < shape.rank(); ++i) put_u64_le(os, static_cast<std::uint64_t>(shape[i]));
    os.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(bytes));
    if (!os) throw DataError("write failed: " + path.string());
}

Raw read_raw(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    Header h = read_header(is, path.string());
    Raw raw;
    raw.dtype = h.dtype;
    raw.shape = h.shape;
    const std::size_t bytes = static_cast<std::size_t>(h.shape.numel()) * dtype_size(h.dtype);
    raw.payload.resize(bytes);
    is.read(reinterpret_cast<char*>(raw.payload.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is.gcount()) != bytes) throw FormatError("truncated GXT1 payload in " + path.string());
    return raw;
}

Header peek(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    return read_header(is, path.string());
}

void write_u8(const std::filesystem::path& path, const Shape& shape, const std::vector<std::uint8_t>& payload) {
    write_raw(path, Dtype::u8, shape, payload.data(), payload.size());
}

std::pair<Shape, std::vector<std::uint8_t>> read_u8(const std::filesystem::path& path) {
    Raw raw = read_raw(path);
    if (raw.dtype != Dtype::u8) throw FormatError("expected u8 GXT1 file: " + path.string());
    std::vector<std::uint8_t> bytes(raw.payload.begin(), raw.payload.end());
    return {raw.shape, std::move(bytes)};
}

}  // namespace gexia::gxt
