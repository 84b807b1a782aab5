#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rgan/gan/model.hpp"

namespace rgan::gan {

/// Checkpoint layout (all integers and floats little-endian):
///
///   bytes 0..7   magic "RGANCKPT"
///   u32          format version (kCheckpointVersion)
///   u32          feature dim, u32 noise dim, u32 shared flag
///   u64          metadata length, then that many bytes of UTF-8 JSON
///                (config echo and normalization, opaque to this module)
///   for each network in the order generator, critic trunk, critic head,
///   regressor head, regressor trunk (0 layers when shared):
///     u32 layer count, then per layer u32 in, u32 out
///   f64 blocks in the same network order: per layer the weight (in x out,
///   row-major) followed by the bias (out)
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RganModel model;
  std::string metadata;
};

void save_checkpoint(const std::filesystem::path& path, const RganModel& model,
                     const std::string& metadata);

/// Rejects a bad magic string, another format version, or (when given) a
/// feature/noise dimension different from the expected one.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::size_t> expected_feature_dim = std::nullopt,
                           std::optional<std::size_t> expected_noise_dim = std::nullopt,
                           double slope = 0.01);

}  // namespace rgan::gan
