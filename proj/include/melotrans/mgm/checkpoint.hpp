/**
 * @file checkpoint.hpp
 * @brief Binary model checkpoints.
 *
 * Layout (little-endian): "MTCK", u32 version (1), the model config, u8 kind,
 * u32 parameter count, then per parameter a u32-length name, u32 rows,
 * u32 cols and rows*cols doubles in row-major order.
 */

#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "melotrans/mgm/model.hpp"

namespace melotrans::mgm {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const EncoderDecoder& model, const std::string& path);

/// Rebuilds the model from the stored config and copies every parameter in.
/// Throws CheckpointError on a bad magic, version, name or shape.
std::unique_ptr<EncoderDecoder> load_checkpoint(const std::string& path);

}  // namespace melotrans::mgm
