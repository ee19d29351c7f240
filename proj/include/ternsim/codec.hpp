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
//
// Ternary weight codec: trits {-1, 0, 1} are stored at 1.6 bits/weight by
// encoding blocks of 5 trits (3^5 = 243 states) into one byte (256 states),
// and expanded to 2-bit compute codes on decode. Also defines the packed
// weight file format ("TER1").

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ternsim/errors.hpp"

namespace ternsim {

/// A ternary digit; valid values are -1, 0, 1.
using Trit = std::int8_t;

/// Five trits, the granularity of the 1.6-bit encoding.
using TritBlock = std::array<Trit, 5>;

/// Number of valid packed byte values (3^5). Codes 243..255 are invalid.
inline constexpr unsigned kPackedCodeCount = 243;

/// Trits per packed byte.
inline constexpr Eigen::Index kTritsPerByte = 5;

/// 2-bit compute codes: 0b01 -> +1, 0b11 -> -1, 0b00 -> 0. 0b10 never occurs.
enum class TwoBitCode : std::uint8_t {
  kZero = 0b00,
  kPlusOne = 0b01,
  kMinusOne = 0b11,
};

/// Dense tensor of trits. `data` is the row-major flattening of `shape`.
struct TernaryTensor {
  std::vector<Eigen::Index> shape;
  Eigen::Vector<Trit, Eigen::Dynamic> data;

  Eigen::Index size() const { return data.size(); }

  /// Rows/cols of a rank-2 tensor (throws ShapeMismatchError otherwise).
  Eigen::Index rows() const;
  Eigen::Index cols() const;

  /// Row-major matrix view of a rank-2 tensor.
  Eigen::Map<const Eigen::Matrix<Trit, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  matrix() const;
};

/// 1.6-bit packed form: one byte per 5 trits, trailing block zero-padded.
struct PackedTensor {
  std::vector<Eigen::Index> shape;
  std::vector<std::uint8_t> payload;

  Eigen::Index element_count() const;
};

/// Number of payload bytes for n trits: ceil(n / 5).
constexpr std::int64_t packed_byte_count(std::int64_t n) {
  return (n + 4) / 5;
}

/// Encodes 5 trits into the canonical base-243 code. The first trit is the
/// most significant digit; digit map 0 -> 0, 1 -> 1, -1 -> 2.
std::uint8_t encode_block(const TritBlock& block);

/// Exact inverse of encode_block. Throws InvalidCodeError for code >= 243.
TritBlock decode_block(std::uint8_t code);

/// Decodes a byte directly to the five 2-bit compute codes.
std::array<TwoBitCode, 5> decode_to_2bit(std::uint8_t code);

/// Maps a single trit to its 2-bit compute code.
TwoBitCode trit_to_2bit(Trit t);

TernaryTensor make_tensor(std::vector<Eigen::Index> shape);
TernaryTensor make_tensor(std::vector<Eigen::Index> shape,
                          std::vector<Trit> data);

/// Packs a tensor blockwise in row-major order, zero-padding the tail block.
PackedTensor pack_tensor(const TernaryTensor& t);

/// Inverse of pack_tensor. Throws InvalidCodeError (naming the byte offset)
/// or ShapeMismatchError if payload length != ceil(n/5).
TernaryTensor unpack_tensor(const PackedTensor& p);

/// One record of a packed weight file.
using NamedPackedTensor = std::pair<std::string, PackedTensor>;

// Packed weight file, binary little-endian:
//   magic "TER1" (4 bytes), version u16 = 1, tensor count u32;
//   per tensor: name length u16, UTF-8 name, rank u8, dims u32 each,
//   payload length u64, payload bytes. No alignment padding.
void write_weight_file(const std::string& path,
                       const std::vector<NamedPackedTensor>& tensors);
std::vector<NamedPackedTensor> read_weight_file(const std::string& path);

}  // namespace ternsim
