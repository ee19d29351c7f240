// Copyright 2026 the ternsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ternsim/codec.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <type_traits>

namespace ternsim {

namespace {

// Digit map for the base-243 code: 0 -> 0, 1 -> 1, -1 -> 2.
constexpr unsigned trit_digit(Trit t) { return t == 0 ? 0u : (t == 1 ? 1u : 2u); }

constexpr Trit digit_trit(unsigned d) {
  return d == 0 ? Trit{0} : (d == 1 ? Trit{1} : Trit{-1});
}

std::int64_t element_count(const std::vector<Eigen::Index>& shape) {
  std::int64_t n = 1;
  for (Eigen::Index d : shape) {
    if (d <= 0) throw ShapeMismatchError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Eigen::Index TernaryTensor::rows() const {
  if (shape.size() != 2)
    throw ShapeMismatchError("matrix view requires a rank-2 tensor");
  return shape[0];
}

Eigen::Index TernaryTensor::cols() const {
  if (shape.size() != 2)
    throw ShapeMismatchError("matrix view requires a rank-2 tensor");
  return shape[1];
}

Eigen::Map<const Eigen::Matrix<Trit, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
TernaryTensor::matrix() const {
  return {data.data(), rows(), cols()};
}

Eigen::Index PackedTensor::element_count() const {
  return static_cast<Eigen::Index>(ternsim::element_count(shape));
}

std::uint8_t encode_block(const TritBlock& block) {
  unsigned code = 0;
  for (Trit t : block) code = code * 3 + trit_digit(t);
  return static_cast<std::uint8_t>(code);
}

TritBlock decode_block(std::uint8_t code) {
  if (code >= kPackedCodeCount) {
    std::ostringstream msg;
    msg << "invalid packed code " << unsigned{code} << " (must be < 243)";
    throw InvalidCodeError(msg.str());
  }
  TritBlock block{};
  unsigned rest = code;
  for (int i = 4; i >= 0; --i) {
    block[static_cast<std::size_t>(i)] = digit_trit(rest % 3);
    rest /= 3;
  }
  return block;
}

TwoBitCode trit_to_2bit(Trit t) {
  return t == 0 ? TwoBitCode::kZero
                : (t == 1 ? TwoBitCode::kPlusOne : TwoBitCode::kMinusOne);
}

std::array<TwoBitCode, 5> decode_to_2bit(std::uint8_t code) {
  const TritBlock block = decode_block(code);
  std::array<TwoBitCode, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = trit_to_2bit(block[i]);
  return out;
}

TernaryTensor make_tensor(std::vector<Eigen::Index> shape) {
  TernaryTensor t;
  const std::int64_t n = element_count(shape);
  t.shape = std::move(shape);
  t.data = Eigen::Vector<Trit, Eigen::Dynamic>::Zero(n);
  return t;
}

TernaryTensor make_tensor(std::vector<Eigen::Index> shape,
                          std::vector<Trit> data) {
  TernaryTensor t = make_tensor(std::move(shape));
  if (static_cast<std::int64_t>(data.size()) != t.size())
    throw ShapeMismatchError("tensor data length does not match shape");
  for (Eigen::Index i = 0; i < t.size(); ++i)
    t.data[i] = data[static_cast<std::size_t>(i)];
  return t;
}

PackedTensor pack_tensor(const TernaryTensor& t) {
  PackedTensor p;
  p.shape = t.shape;
  const std::int64_t n = t.size();
  p.payload.reserve(static_cast<std::size_t>(packed_byte_count(n)));
  for (std::int64_t base = 0; base < n; base += kTritsPerByte) {
    TritBlock block{};  // tail pads with zero trits
    const std::int64_t take = std::min<std::int64_t>(kTritsPerByte, n - base);
    for (std::int64_t i = 0; i < take; ++i)
      block[static_cast<std::size_t>(i)] = t.data[base + i];
    p.payload.push_back(encode_block(block));
  }
  return p;
}

TernaryTensor unpack_tensor(const PackedTensor& p) {
  const std::int64_t n = element_count(p.shape);
  const std::int64_t expected_bytes = packed_byte_count(n);
  if (static_cast<std::int64_t>(p.payload.size()) != expected_bytes) {
    std::ostringstream msg;
    msg << "payload holds " << p.payload.size() << " bytes but shape needs "
        << expected_bytes;
    throw ShapeMismatchError(msg.str());
  }
  TernaryTensor t = make_tensor(p.shape);
  for (std::int64_t b = 0; b < expected_bytes; ++b) {
    TritBlock block;
    try {
      block = decode_block(p.payload[static_cast<std::size_t>(b)]);
    } catch (const InvalidCodeError&) {
      std::ostringstream msg;
      msg << "invalid packed code "
          << unsigned{p.payload[static_cast<std::size_t>(b)]}
          << " at payload byte offset " << b;
      throw InvalidCodeError(msg.str());
    }
    const std::int64_t base = b * kTritsPerByte;
    const std::int64_t take = std::min<std::int64_t>(kTritsPerByte, n - base);
    for (std::int64_t i = 0; i < take; ++i)
      t.data[base + i] = block[static_cast<std::size_t>(i)];
  }
  return t;
}

namespace {

constexpr char kMagic[4] = {'T', 'E', 'R', '1'};
constexpr std::uint16_t kFormatVersion = 1;

void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const std::uint8_t b = static_cast<std::uint8_t>(value >> (8 * i));
    write_bytes(os, &b, 1);
  }
}

class Reader {
 public:
  Reader(std::istream& is, const std::string& path) : is_(is), path_(path) {}

  std::int64_t offset() const { return offset_; }

  void read_bytes(void* p, std::size_t n, const char* what) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      std::ostringstream msg;
      msg << path_ << ": truncated while reading " << what << " at offset "
          << offset_;
      throw TruncatedPayloadError(msg.str());
    }
    offset_ += static_cast<std::int64_t>(n);
  }

  template <class T>
  T read_le(const char* what) {
    static_assert(std::is_unsigned_v<T>);
    std::uint8_t buf[sizeof(T)];
    read_bytes(buf, sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      value |= static_cast<T>(T{buf[i]} << (8 * i));
    return value;
  }

 private:
  std::istream& is_;
  std::string path_;
  std::int64_t offset_ = 0;
};

}  // namespace

void write_weight_file(const std::string& path,
                       const std::vector<NamedPackedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_bytes(os, kMagic, 4);
  write_le<std::uint16_t>(os, kFormatVersion);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw IoError("tensor name too long: " + name);
    write_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    write_bytes(os, name.data(), name.size());
    write_le<std::uint8_t>(os, static_cast<std::uint8_t>(tensor.shape.size()));
    for (Eigen::Index dim : tensor.shape)
      write_le<std::uint32_t>(os, static_cast<std::uint32_t>(dim));
    write_le<std::uint64_t>(os, tensor.payload.size());
    write_bytes(os, tensor.payload.data(), tensor.payload.size());
  }
  if (!os) throw IoError("write failed for " + path);
}

std::vector<NamedPackedTensor> read_weight_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path + " for reading");
  Reader r(is, path);

  char magic[4];
  r.read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError(path + ": bad magic (expected \"TER1\")");
  const auto version = r.read_le<std::uint16_t>("version");
  if (version != kFormatVersion) {
    std::ostringstream msg;
    msg << path << ": unsupported format version " << version;
    throw UnsupportedVersionError(msg.str());
  }
  const auto count = r.read_le<std::uint32_t>("tensor count");

  std::vector<NamedPackedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.read_le<std::uint16_t>("name length");
    std::string name(name_len, '\0');
    if (name_len > 0) r.read_bytes(name.data(), name_len, "name");
    const auto rank = r.read_le<std::uint8_t>("rank");
    PackedTensor tensor;
    tensor.shape.reserve(rank);
    for (std::uint8_t d = 0; d < rank; ++d)
      tensor.shape.push_back(
          static_cast<Eigen::Index>(r.read_le<std::uint32_t>("dimension")));
    const auto payload_len = r.read_le<std::uint64_t>("payload length");
    const std::int64_t expected = packed_byte_count(tensor.element_count());
    if (static_cast<std::int64_t>(payload_len) != expected) {
      std::ostringstream msg;
      msg << path << ": tensor \"" << name << "\" declares " << payload_len
          << " payload bytes but its shape needs " << expected;
      throw ShapeMismatchError(msg.str());
    }
    tensor.payload.resize(payload_len);
    const std::int64_t payload_start = r.offset();
    if (payload_len > 0)
      r.read_bytes(tensor.payload.data(), payload_len, "payload");
    for (std::size_t b = 0; b < tensor.payload.size(); ++b) {
      if (tensor.payload[b] >= kPackedCodeCount) {
        std::ostringstream msg;
        msg << path << ": tensor \"" << name << "\": invalid packed code "
            << unsigned{tensor.payload[b]} << " at file byte offset "
            << payload_start + static_cast<std::int64_t>(b);
        throw InvalidCodeError(msg.str());
      }
    }
    tensors.emplace_back(std::move(name), std::move(tensor));
  }
  return tensors;
}

}  // namespace ternsim
