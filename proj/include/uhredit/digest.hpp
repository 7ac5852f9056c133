// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace uhredit {

/// Hex digest of `data` with a named algorithm ("md5", "sha1", "sha256").
std::string hex_digest(std::span<const std::byte> data, std::string_view algorithm = "md5");

inline std::string hex_digest(std::span<const std::uint8_t> data, std::string_view algorithm = "md5") {
  return hex_digest(std::as_bytes(data), algorithm);
}

inline std::string hex_digest(std::string_view text, std::string_view algorithm = "md5") {
  return hex_digest(std::as_bytes(std::span(text.data(), text.size())), algorithm);
}

bool is_supported_digest(std::string_view algorithm);

}  // namespace uhredit
