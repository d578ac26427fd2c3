#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "lockstep/error.hpp"

namespace lockstep::proto {

/// SHA-256 over (big-endian proto_version || rules_identity), as 64 lowercase
/// hex digits. Clients exchange it before a game starts so that everyone in a
/// room is known to run the same rules.
inline std::string game_hash(std::string_view rules_identity, std::uint32_t proto_version) {
  if (rules_identity.empty()) throw InvalidArgument("game_hash: rules identity is empty");
  const std::array<unsigned char, 4> version{
      static_cast<unsigned char>(proto_version >> 24), static_cast<unsigned char>(proto_version >> 16),
      static_cast<unsigned char>(proto_version >> 8), static_cast<unsigned char>(proto_version)};

  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, version.data(), version.size()) == 1 &&
                  EVP_DigestUpdate(ctx, rules_identity.data(), rules_identity.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &md_len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("game_hash: SHA-256 failed");

  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * md_len);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace lockstep::proto
