#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gexia/tensor.hpp"

namespace gexia::gxt {

// GXT1 container: magic "GXT1", dtype code byte (0=f32, 1=f64, 2=u8),
// rank byte (1-4), two reserved zero bytes, little-endian u64 extents,
// then the row-major little-endian payload.
enum class Dtype : std::uint8_t { f32 = 0, f64 = 1, u8 = 2 };

struct Header {
    Dtype dtype;
    Shape shape;
};

struct Raw {
    Dtype dtype;
    Shape shape;
    std::vector<unsigned char> payload;
};

std::size_t dtype_size(Dtype d);

void write_raw(const std::filesystem::path& path, Dtype dtype, const Shape& shape, const void* payload,
               std::size_t bytes);
Raw read_raw(const std::filesystem::path& path);
Header peek(const std::filesystem::path& path);

template <typename S>
constexpr Dtype dtype_of();
template <>
constexpr Dtype dtype_of<float>() {
    return Dtype::f32;
}
template <>
constexpr Dtype dtype_of<double>() {
    return Dtype::f64;
}

template <typename S>
void write_tensor(const std::filesystem::path& path, const Tensor<S>& t) {
    write_raw(path, dtype_of<S>(), t.shape, t.data.data(), t.data.size() * sizeof(S));
}

template <typename S>
TensorPtr<S> read_tensor(const std::filesystem::path& path) {
    Raw raw = read_raw(path);
    if (raw.dtype != dtype_of<S>()) {
        throw FormatError("dtype mismatch reading " + path.string() + ": file holds code " +
                          std::to_string(static_cast<int>(raw.dtype)));
    }
    std::vector<S> values(static_cast<std::size_t>(raw.shape.numel()));
    std::memcpy(values.data(), raw.payload.data(), raw.payload.size());
    return make_tensor<S>(raw.shape, std::move(values));
}

// Reads a numeric tensor of either float width, converting to S.
template <typename S>
TensorPtr<S> read_tensor_cast(const std::filesystem::path& path) {
    Raw raw = read_raw(path);
    std::vector<S> values(static_cast<std::size_t>(raw.shape.numel()));
    if (raw.dtype == Dtype::f32) {
        const float* src = reinterpret_cast<const float*>(raw.payload.data());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<S>(src[i]);
    } else if (raw.dtype == Dtype::f64) {
        const double* src = reinterpret_cast<const double*>(raw.payload.data());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<S>(src[i]);
    } else {
        throw FormatError("cannot read u8 file " + path.string() + " as a numeric tensor");
    }
    return make_tensor<S>(raw.shape, std::move(values));
}

void write_u8(const std::filesystem::path& path, const Shape& shape, const std::vector<std::uint8_t>& payload);
std::pair<Shape, std::vector<std::uint8_t>> read_u8(const std::filesystem::path& path);

}  // namespace gexia::gxt
