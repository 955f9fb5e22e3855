// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "selnet/selectornet.hpp"

namespace selnet {

// Binary layout (all integers and reals little-endian):
//   "SELNET1"                      7 bytes magic
//   version                        u8 (kCheckpointVersion)
//   feature_dim, steps, embed_dim  u64 x 3
//   selector, fab, resblock,
//   fab_step_input variants        u8 x 4
//   seed                           u64
//   record count                   u64
//   per record: name length u32, name bytes, rows u64, cols u64,
//               rows*cols IEEE-754 binary64 values
// Records cover every parameter and every batch-norm running statistic.

inline constexpr char kCheckpointMagic[7] = {'S', 'E', 'L', 'N', 'E', 'T', '1'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CheckpointMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
/// Structurally invalid content: unknown enum values, missing, duplicate or
/// unexpected records, shape disagreement, trailing bytes.
class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

std::string serialize_checkpoint(const SelectorNet& model);
SelectorNet deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const SelectorNet& model, const std::filesystem::path& path);
SelectorNet load_checkpoint(const std::filesystem::path& path);

}  // namespace selnet
