#pragma once

// Weight file layout (little-endian):
//   "TNTW", u32 version = 1, u32 T, u32 d_ap, u32 C, u32 fc_hidden,
//   then per tensor in NetWeights::for_each_tensor order:
//   u32 rank, rank x u32 dims, f32 data (row-major).

#include <filesystem>

#include "tnt/trackletnet.hpp"

namespace tnt {

inline constexpr std::uint32_t kWeightsVersion = 1;

void save_weights(const NetWeights& w, const std::filesystem::path& path);

// Throws kIo if unreadable, kFormat on bad magic/version/truncation or a
// tensor whose shape disagrees with the header.
NetWeights load_weights(const std::filesystem::path& path);

// Additionally throws kShape when the header disagrees with expected
// (seed excluded).
NetWeights load_weights(const std::filesystem::path& path, const NetConfig& expected);

}  // namespace tnt
