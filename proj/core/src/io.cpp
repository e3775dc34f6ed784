#include "con360/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <system_error>

namespace con360 {

std::string shape_to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

}  // namespace con360

namespace con360::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "payload conversion assumes a little-endian host");

constexpr std::uint8_t kNpyMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kNpyPreamble = 10;
constexpr std::size_t kMaxElements = std::size_t{1} << 40;

template <typename T>
TensorFile pack(DType dtype, const Tensor<T>& t) {
  TensorFile file{dtype, t.shape(), std::vector<std::uint8_t>(t.size() * sizeof(T))};
  if (!file.data.empty()) std::memcpy(file.data.data(), t.data().data(), file.data.size());
  return file;
}

template <typename T>
std::vector<T> unpack(const TensorFile& file) {
  std::vector<T> values(file.data.size() / sizeof(T));
  if (!values.empty()) std::memcpy(values.data(), file.data.data(), file.data.size());
  return values;
}

template <typename Out>
Tensor<Out> convert(const TensorFile& file) {
  std::vector<Out> out;
  switch (file.dtype) {
    case DType::kF32: {
      auto v = unpack<float>(file);
      out.assign(v.begin(), v.end());
      break;
    }
    case DType::kF64: {
      auto v = unpack<double>(file);
      out.reserve(v.size());
      for (double x : v) out.push_back(static_cast<Out>(x));
      break;
    }
    case DType::kU8:
      out.assign(file.data.begin(), file.data.end());
      break;
  }
  return Tensor<Out>(file.shape, std::move(out));
}

// Minimal reader for the Python dict literal in an NPY header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Fields {
    std::optional<std::string> descr;
    std::optional<bool> fortran_order;
    std::optional<Shape> shape;
  };

  Fields parse() {
    Fields fields;
    expect('{');
    skip_ws();
    while (peek() != '}') {
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        fields.descr = parse_string();
      } else if (key == "fortran_order") {
        fields.fortran_order = parse_bool();
      } else if (key == "shape") {
        fields.shape = parse_tuple();
      } else {
        fail("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    ++pos_;
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after dict");
    return fields;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    raise(ErrorKind::kMalformedHeader,
          "NPY header: " + what + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\n')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected string");
    ++pos_;
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
    if (pos_ >= text_.size()) fail("unterminated string");
    return std::string(text_.substr(begin, pos_++ - begin));
  }

  bool parse_bool() {
    skip_ws();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }

  Shape parse_tuple() {
    expect('(');
    Shape shape;
    skip_ws();
    while (peek() != ')') {
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected dimension");
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        const std::size_t digit = static_cast<std::size_t>(peek() - '0');
        if (value > (kMaxElements - digit) / 10) fail("dimension too large");
        value = value * 10 + digit;
        ++pos_;
      }
      shape.push_back(value);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != ')') {
        fail("expected ',' or ')'");
      }
    }
    ++pos_;
    return shape;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

DType dtype_from_descr(const std::string& descr) {
  if (descr == "<f4") return DType::kF32;
  if (descr == "<f8") return DType::kF64;
  if (descr == "|u1" || descr == "<u1" || descr == "u1") return DType::kU8;
  raise(ErrorKind::kUnsupportedDtype, "unsupported NPY dtype '" + descr + "'");
}

std::size_t checked_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d != 0 && n > kMaxElements / d) {
      raise(ErrorKind::kMalformedHeader, "NPY shape " + shape_to_string(shape) +
                                             " exceeds the element limit");
    }
    n *= d;
  }
  return n;
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kF32: return 4;
    case DType::kF64: return 8;
    case DType::kU8: return 1;
  }
  return 0;
}

std::string_view dtype_descr(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "<f4";
    case DType::kF64: return "<f8";
    case DType::kU8: return "|u1";
  }
  return "";
}

TensorFile to_tensor_file(const TensorF& t) { return pack(DType::kF32, t); }
TensorFile to_tensor_file(const TensorD& t) { return pack(DType::kF64, t); }
TensorFile to_tensor_file(const Tensor<std::uint8_t>& t) { return pack(DType::kU8, t); }

TensorF as_float_tensor(const TensorFile& file) { return convert<float>(file); }
TensorD as_double_tensor(const TensorFile& file) { return convert<double>(file); }

std::vector<std::uint8_t> encode_npy(const TensorFile& t) {
  if (t.data.size() != checked_numel(t.shape) * dtype_size(t.dtype)) {
    raise(ErrorKind::kShape, "payload size does not match shape " +
                                 shape_to_string(t.shape));
  }
  std::string header = "{'descr': '";
  header += dtype_descr(t.dtype);
  header += "', 'fortran_order': False, 'shape': ";
  header += shape_to_string(t.shape);
  header += ", }";
  const std::size_t unpadded = kNpyPreamble + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';
  if (header.size() > std::numeric_limits<std::uint16_t>::max()) {
    raise(ErrorKind::kShape, "NPY header exceeds the v1.0 length limit");
  }

  std::vector<std::uint8_t> out(std::begin(kNpyMagic), std::end(kNpyMagic));
  out.reserve(kNpyPreamble + header.size() + t.data.size());
  out.push_back(1);
  out.push_back(0);
  const auto len = static_cast<std::uint16_t>(header.size());
  out.push_back(static_cast<std::uint8_t>(len & 0xff));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), t.data.begin(), t.data.end());
  return out;
}

TensorFile decode_npy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kNpyPreamble) raise(ErrorKind::kTruncated, "NPY file shorter than its preamble");
  if (std::memcmp(bytes.data(), kNpyMagic, sizeof(kNpyMagic)) != 0) {
    raise(ErrorKind::kMalformedHeader, "missing NPY magic string");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    raise(ErrorKind::kUnsupportedVersion,
          "NPY format version " + std::to_string(bytes[6]) + "." +
              std::to_string(bytes[7]) + " is not supported (1.0 only)");
  }
  const std::size_t header_len = bytes[8] | (std::size_t{bytes[9]} << 8);
  if (bytes.size() < kNpyPreamble + header_len) {
    raise(ErrorKind::kTruncated, "NPY header extends past end of file");
  }
  const std::string_view header(
      reinterpret_cast<const char*>(bytes.data() + kNpyPreamble), header_len);
  if (header.empty() || header.back() != '\n') {
    raise(ErrorKind::kMalformedHeader, "NPY header is not newline-terminated");
  }
  const auto fields = HeaderParser(header.substr(0, header.size() - 1)).parse();
  if (!fields.descr || !fields.fortran_order || !fields.shape) {
    raise(ErrorKind::kMalformedHeader, "NPY header lacks descr, fortran_order or shape");
  }
  if (*fields.fortran_order) {
    raise(ErrorKind::kUnsupportedLayout, "fortran_order=True is not supported");
  }
  TensorFile file;
  file.dtype = dtype_from_descr(*fields.descr);
  file.shape = *fields.shape;
  const std::size_t numel = checked_numel(file.shape);
  const std::size_t payload = numel * dtype_size(file.dtype);
  const std::size_t available = bytes.size() - kNpyPreamble - header_len;
  if (available < payload) {
    raise(ErrorKind::kTruncated, "NPY payload has " + std::to_string(available) +
                                     " bytes, expected " + std::to_string(payload));
  }
  if (available > payload) {
    raise(ErrorKind::kMalformedHeader, "NPY payload has trailing bytes");
  }
  const auto* begin = bytes.data() + kNpyPreamble + header_len;
  file.data.assign(begin, begin + payload);
  return file;
}

void write_npy(const TensorFile& t, const std::filesystem::path& path) {
  write_file_atomic(path, encode_npy(t));
}

TensorFile read_npy(const std::filesystem::path& path) {
  return decode_npy(read_file(path));
}

void write_npy(const TensorF& t, const std::filesystem::path& path) {
  write_npy(to_tensor_file(t), path);
}

TensorF read_npy_float(const std::filesystem::path& path) {
  return as_float_tensor(read_npy(path));
}

std::vector<std::uint8_t> encode_pgm(const GrayImageFile& img) {
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    raise(ErrorKind::kParameter, "PGM bit depth must be 8 or 16");
  }
  if (img.samples.size() != img.width * img.height) {
    raise(ErrorKind::kShape, "PGM sample count does not match width*height");
  }
  const std::string header = "P5\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n" +
                             (img.bit_depth == 16 ? "65535" : "255") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.samples.size() * 2);
  for (std::uint16_t s : img.samples) {
    if (img.bit_depth == 16) {
      out.push_back(static_cast<std::uint8_t>(s >> 8));
      out.push_back(static_cast<std::uint8_t>(s & 0xff));
    } else {
      if (s > 255) raise(ErrorKind::kInvalidData, "8-bit PGM sample exceeds 255");
      out.push_back(static_cast<std::uint8_t>(s));
    }
  }
  return out;
}

GrayImageFile decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> void {
    raise(ErrorKind::kMalformedHeader,
          "PGM: " + what + " at offset " + std::to_string(pos));
  };
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail("expected integer");
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (std::size_t{1} << 32)) fail("header integer too large");
      ++pos;
    }
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    fail("missing P5 magic");
  }
  pos = 2;
  GrayImageFile img;
  img.width = read_uint();
  img.height = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval == 0 || maxval > 65535) fail("maxval out of range");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("expected whitespace after maxval");
  ++pos;
  img.bit_depth = maxval > 255 ? 16 : 8;
  if (img.width > (std::size_t{1} << 20) || img.height > (std::size_t{1} << 20)) {
    fail("image dimensions too large");
  }
  const std::size_t count = img.width * img.height;
  const std::size_t need = count * (img.bit_depth == 16 ? 2 : 1);
  if (bytes.size() - pos < need) raise(ErrorKind::kTruncated, "PGM raster is truncated");
  img.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (img.bit_depth == 16) {
      img.samples[i] = static_cast<std::uint16_t>((bytes[pos] << 8) | bytes[pos + 1]);
      pos += 2;
    } else {
      img.samples[i] = bytes[pos++];
    }
  }
  return img;
}

void write_pgm16(const GrayImageFile& img, const std::filesystem::path& path) {
  if (img.bit_depth != 16) raise(ErrorKind::kParameter, "write_pgm16 requires 16-bit samples");
  write_file_atomic(path, encode_pgm(img));
}

GrayImageFile read_pgm16(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorKind::kIo, "read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorKind::kIo, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    raise(ErrorKind::kIo, "cannot rename temp file onto '" + path.string() + "'");
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    raise(ErrorKind::kIo, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

}  // namespace con360::io
