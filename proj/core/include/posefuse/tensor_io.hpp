// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "posefuse/types.hpp"

namespace posefuse {

// Binary tensor layout (all integers u32 little-endian):
//   "PTNS" | version=1 | dtype=0 (f32) | ndim | ndim x dim | payload f32 LE
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::uint32_t kTensorDtypeF32 = 0;

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
/// Writes through a temporary sibling file and renames it into place.
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

}  // namespace posefuse
