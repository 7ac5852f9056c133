// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/digest.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "uhredit/error.hpp"

namespace uhredit {

namespace {

const EVP_MD* lookup(std::string_view algorithm) {
  if (algorithm == "md5") return EVP_md5();
  if (algorithm == "sha1") return EVP_sha1();
  if (algorithm == "sha256") return EVP_sha256();
  return nullptr;
}

}  // namespace

bool is_supported_digest(std::string_view algorithm) { return lookup(algorithm) != nullptr; }

std::string hex_digest(std::span<const std::byte> data, std::string_view algorithm) {
  const EVP_MD* md = lookup(algorithm);
  if (md == nullptr) throw InvalidArgument("unsupported digest algorithm: " + std::string(algorithm));

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
    throw Error("digest computation failed");
  }

  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[out[i] >> 4]);
    hex.push_back(kHex[out[i] & 0xf]);
  }
  return hex;
}

}  // namespace uhredit
