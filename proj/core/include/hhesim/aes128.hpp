#pragma once

#include <array>
#include <cstdint>
#include <memory>

namespace hhesim {

using AesBlock = std::array<std::uint8_t, 16>;

/// AES-128 block encryption (ECB on one block), backed by libcrypto.
class Aes128 {
 public:
  explicit Aes128(const AesBlock& key);
  ~Aes128();
  Aes128(Aes128&&) noexcept;
  Aes128& operator=(Aes128&&) noexcept;
  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;

  AesBlock encrypt(const AesBlock& in) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hhesim
