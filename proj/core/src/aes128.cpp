#include "hhesim/aes128.hpp"

#include <openssl/evp.h>

#include "hhesim/error.hpp"

namespace hhesim {

struct Aes128::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Aes128::Aes128(const AesBlock& key) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, key.data(),
                         nullptr) != 1) {
    throw Error("AES-128 context initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
}

Aes128::~Aes128() = default;
Aes128::Aes128(Aes128&&) noexcept = default;
Aes128& Aes128::operator=(Aes128&&) noexcept = default;

AesBlock Aes128::encrypt(const AesBlock& in) const {
  AesBlock out{};
  int len = 0;
  if (EVP_EncryptUpdate(impl_->ctx, out.data(), &len, in.data(),
                        static_cast<int>(in.size())) != 1 ||
      len != 16) {
    throw Error("AES-128 encryption failed");
  }
  return out;
}

}  // namespace hhesim
