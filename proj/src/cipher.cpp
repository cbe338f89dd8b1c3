#include "memhard/cipher.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace memhard {

namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CtxPtr make_ctx(std::span<const std::uint8_t, 32> key, bool encrypt) {
  CtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::runtime_error("aes-256: context allocation failed");
  const int ok =
      encrypt ? EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr,
                                   key.data(), nullptr)
              : EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr,
                                   key.data(), nullptr);
  if (ok != 1) throw std::runtime_error("aes-256: key setup failed");
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  return ctx;
}

class Aes256 final : public BlockCipher {
 public:
  explicit Aes256(std::span<const std::uint8_t, 32> key)
      : enc_(make_ctx(key, true)), dec_(make_ctx(key, false)) {}

  void encrypt_block(const std::uint8_t in[kCipherBlockBytes],
                     std::uint8_t out[kCipherBlockBytes]) const override {
    int len = 0;
    if (EVP_EncryptUpdate(enc_.get(), out, &len, in,
                          static_cast<int>(kCipherBlockBytes)) != 1 ||
        len != static_cast<int>(kCipherBlockBytes))
      throw std::runtime_error("aes-256: encrypt failed");
  }

  void decrypt_block(const std::uint8_t in[kCipherBlockBytes],
                     std::uint8_t out[kCipherBlockBytes]) const override {
    int len = 0;
    if (EVP_DecryptUpdate(dec_.get(), out, &len, in,
                          static_cast<int>(kCipherBlockBytes)) != 1 ||
        len != static_cast<int>(kCipherBlockBytes))
      throw std::runtime_error("aes-256: decrypt failed");
  }

 private:
  CtxPtr enc_;
  CtxPtr dec_;
};

}  // namespace

std::unique_ptr<BlockCipher> make_cipher(std::uint8_t cipher_id,
                                         std::span<const std::uint8_t, 32> key) {
  if (cipher_id != kCipherAes256)
    throw std::invalid_argument("make_cipher: unknown cipher id");
  return std::make_unique<Aes256>(key);
}

}  // namespace memhard
