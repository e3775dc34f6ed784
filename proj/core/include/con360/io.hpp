#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "con360/tensor.hpp"

// Bit-exact file I/O shared by every stage of the pipeline.
namespace con360::io {

enum class DType { kF32, kF64, kU8 };

std::size_t dtype_size(DType dtype);
std::string_view dtype_descr(DType dtype);

// Raw little-endian, row-major tensor payload as stored in an NPY file.
struct TensorFile {
  DType dtype = DType::kF32;
  Shape shape;
  std::vector<std::uint8_t> data;

  bool operator==(const TensorFile&) const = default;
};

TensorFile to_tensor_file(const TensorF& t);
TensorFile to_tensor_file(const TensorD& t);
TensorFile to_tensor_file(const Tensor<std::uint8_t>& t);

// Converts f32/f64/u8 payloads to float; f64 values are narrowed.
TensorF as_float_tensor(const TensorFile& file);
TensorD as_double_tensor(const TensorFile& file);

// NPY format 1.0 only. Decoding never trusts the header: every failure is an
// Error with a typed kind (kTruncated, kMalformedHeader, kUnsupportedDtype,
// kUnsupportedLayout, kUnsupportedVersion).
std::vector<std::uint8_t> encode_npy(const TensorFile& t);
TensorFile decode_npy(std::span<const std::uint8_t> bytes);

void write_npy(const TensorFile& t, const std::filesystem::path& path);
TensorFile read_npy(const std::filesystem::path& path);

// Convenience wrappers around the float path.
void write_npy(const TensorF& t, const std::filesystem::path& path);
TensorF read_npy_float(const std::filesystem::path& path);

struct GrayImageFile {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 16;  // 8 or 16
  std::vector<std::uint16_t> samples;

  bool operator==(const GrayImageFile&) const = default;
};

// Binary P5. 16-bit images use maxval 65535 and big-endian samples.
std::vector<std::uint8_t> encode_pgm(const GrayImageFile& img);
GrayImageFile decode_pgm(std::span<const std::uint8_t> bytes);

void write_pgm16(const GrayImageFile& img, const std::filesystem::path& path);
GrayImageFile read_pgm16(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temp file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace con360::io
