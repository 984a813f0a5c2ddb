#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emoface/nn/layers.hpp"

namespace emoface::nn {

inline constexpr std::uint32_t kArchiveVersion = 1;

/// Named tensors plus string metadata. Binary layout (little-endian):
///   "EFCK" | u32 version | u32 M | M x (u32 len, key, u32 len, value)
///   | u32 N | N x (u32 len, name, u32 ndim, ndim x i32 dim, float32 data)
///   | u64 FNV-1a of every preceding byte
struct Archive {
  std::vector<std::pair<std::string, std::string>> metadata;
  StateDict tensors;

  /// Value for `key`, or empty when absent.
  std::string meta(const std::string& key) const;
  const Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

std::vector<std::uint8_t> serialize_archive(const Archive& archive, std::uint32_t version = kArchiveVersion);
/// Throws FormatError (with byte offset) on corruption and VersionError on a
/// version other than kArchiveVersion.
Archive parse_archive(std::span<const std::uint8_t> bytes);

void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

}  // namespace emoface::nn
