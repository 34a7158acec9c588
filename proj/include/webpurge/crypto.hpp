#ifndef WEBPURGE_CRYPTO_HPP
#define WEBPURGE_CRYPTO_HPP

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "webpurge/recipe.hpp"

namespace webpurge {

// Recipes leave the machine (backups, sync folders), so they are sealed
// client-side: scrypt for the key, ChaCha20-Poly1305 for the payload.
// The magic string versions the whole parameter set; any change to the
// layout or parameters below must bump it.
//
// Blob layout: magic(5) || salt(16) || nonce(12) || ciphertext || tag(16)

inline constexpr char kRecipeMagic[5] = {'W', 'R', 'C', 'P', '1'};
inline constexpr size_t kMagicLen = 5;
inline constexpr size_t kSaltLen = 16;
inline constexpr size_t kNonceLen = 12;
inline constexpr size_t kTagLen = 16;
inline constexpr size_t kKeyLen = 32;
// scrypt interactive parameters: 16 MiB memory cost.
inline constexpr std::uint64_t kScryptN = 16384;
inline constexpr std::uint64_t kScryptR = 8;
inline constexpr std::uint64_t kScryptP = 1;

class CryptoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Wrong passphrase and tampered blob are indistinguishable by design.
class AuthenticationError : public CryptoError {
  public:
    using CryptoError::CryptoError;
};

// Truncated or non-recipe input.
class BlobFormatError : public CryptoError {
  public:
    using CryptoError::CryptoError;
};

using EncryptedRecipe = std::vector<unsigned char>;

namespace detail {

inline std::vector<unsigned char> derive_key(const std::string& passphrase,
                                             const unsigned char* salt) {
    std::vector<unsigned char> key(kKeyLen);
    if (EVP_PBE_scrypt(passphrase.data(), passphrase.size(), salt, kSaltLen,
                       kScryptN, kScryptR, kScryptP, 64 * 1024 * 1024,
                       key.data(), key.size()) != 1)
        throw CryptoError("key derivation failed");
    return key;
}

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

}  // namespace detail

inline EncryptedRecipe encrypt_recipe(const Recipe& r, const std::string& passphrase) {
    if (passphrase.empty()) throw CryptoError("passphrase must not be empty");
    std::string plain = serialize_recipe(r);

    EncryptedRecipe blob(kMagicLen + kSaltLen + kNonceLen + plain.size() + kTagLen);
    unsigned char* magic = blob.data();
    unsigned char* salt = magic + kMagicLen;
    unsigned char* nonce = salt + kSaltLen;
    unsigned char* ct = nonce + kNonceLen;
    unsigned char* tag = ct + plain.size();

    std::memcpy(magic, kRecipeMagic, kMagicLen);
    if (RAND_bytes(salt, kSaltLen) != 1 || RAND_bytes(nonce, kNonceLen) != 1)
        throw CryptoError("random generator failure");

    auto key = detail::derive_key(passphrase, salt);

    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw CryptoError("cipher context allocation failed");
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, key.data(), nonce) != 1)
        throw CryptoError("cipher init failed");
    // Header (magic+salt+nonce) is bound as AAD so it cannot be swapped.
    if (EVP_EncryptUpdate(ctx.get(), nullptr, &len, blob.data(),
                          static_cast<int>(kMagicLen + kSaltLen + kNonceLen)) != 1)
        throw CryptoError("aad failed");
    if (EVP_EncryptUpdate(ctx.get(), ct, &len,
                          reinterpret_cast<const unsigned char*>(plain.data()),
                          static_cast<int>(plain.size())) != 1)
        throw CryptoError("encrypt failed");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), ct + len, &fin) != 1)
        throw CryptoError("encrypt finalize failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kTagLen, tag) != 1)
        throw CryptoError("tag retrieval failed");
    return blob;
}

inline Recipe decrypt_recipe(const EncryptedRecipe& blob, const std::string& passphrase,
                             const WarnSink& warn = {}) {
    if (blob.size() < kMagicLen + kSaltLen + kNonceLen + kTagLen)
        throw BlobFormatError("encrypted recipe is truncated");
    if (std::memcmp(blob.data(), kRecipeMagic, kMagicLen) != 0)
        throw BlobFormatError("not an encrypted recipe (bad magic)");

    const unsigned char* salt = blob.data() + kMagicLen;
    const unsigned char* nonce = salt + kSaltLen;
    const unsigned char* ct = nonce + kNonceLen;
    size_t ct_len = blob.size() - kMagicLen - kSaltLen - kNonceLen - kTagLen;
    const unsigned char* tag = ct + ct_len;

    auto key = detail::derive_key(passphrase, salt);

    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw CryptoError("cipher context allocation failed");
    int len = 0;
    if (EVP_DecryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, key.data(), nonce) != 1)
        throw CryptoError("cipher init failed");
    if (EVP_DecryptUpdate(ctx.get(), nullptr, &len, blob.data(),
                          static_cast<int>(kMagicLen + kSaltLen + kNonceLen)) != 1)
        throw CryptoError("aad failed");
    std::vector<unsigned char> plain(ct_len);
    if (ct_len > 0 &&
        EVP_DecryptUpdate(ctx.get(), plain.data(), &len, ct, static_cast<int>(ct_len)) != 1)
        throw CryptoError("decrypt failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kTagLen,
                            const_cast<unsigned char*>(tag)) != 1)
        throw CryptoError("tag set failed");
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &fin) != 1)
        throw AuthenticationError("recipe authentication failed (wrong passphrase or tampering)");
    return deserialize_recipe(std::string(plain.begin(), plain.end()), warn);
}

}  // namespace webpurge

#endif  // WEBPURGE_CRYPTO_HPP
