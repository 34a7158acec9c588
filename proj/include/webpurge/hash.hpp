#ifndef WEBPURGE_HASH_HPP
#define WEBPURGE_HASH_HPP

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "webpurge/util.hpp"

namespace webpurge {

inline constexpr std::uint64_t kDefaultPartialLen = 1048576;  // 1 MiB

class HashError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Incremental digest over OpenSSL EVP. Supported algorithms are a fixed
// allowlist; "sha256" is the format default.
class Hasher {
  public:
    explicit Hasher(const std::string& algo = "sha256") : algo_(to_lower(algo)) {
        const EVP_MD* md = nullptr;
        if (algo_ == "sha256") md = EVP_sha256();
        else if (algo_ == "sha512") md = EVP_sha512();
        if (!md) throw HashError("unsupported hash algorithm: " + algo);
        ctx_.reset(EVP_MD_CTX_new());
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), md, nullptr) != 1)
            throw HashError("digest init failed");
    }

    static bool supported(const std::string& algo) {
        std::string a = to_lower(algo);
        return a == "sha256" || a == "sha512";
    }

    void update(const void* data, size_t len) {
        if (EVP_DigestUpdate(ctx_.get(), data, len) != 1)
            throw HashError("digest update failed");
        total_ += len;
    }

    void update(std::string_view sv) { update(sv.data(), sv.size()); }

    std::uint64_t bytes_consumed() const { return total_; }

    // Finalizes a copy, so the hasher stays usable for further updates.
    std::string hex_digest() const {
        std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> copy(EVP_MD_CTX_new(),
                                                                     EVP_MD_CTX_free);
        if (!copy || EVP_MD_CTX_copy_ex(copy.get(), ctx_.get()) != 1)
            throw HashError("digest copy failed");
        unsigned char out[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(copy.get(), out, &len) != 1)
            throw HashError("digest final failed");
        return to_hex(out, len);
    }

    const std::string& algorithm() const { return algo_; }

  private:
    std::string algo_;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_{nullptr, EVP_MD_CTX_free};
    std::uint64_t total_ = 0;
};

inline std::string hash_hex(std::string_view data, const std::string& algo = "sha256") {
    Hasher h(algo);
    h.update(data);
    return h.hex_digest();
}

struct FileHashes {
    std::string hash_full;
    std::optional<std::string> partial_hash;  // digest of leading min(partial_len, size)
};

// Streams the file once; memory stays bounded regardless of size. The
// partial digest covers exactly min(partial_len, file size) leading bytes.
inline FileHashes hash_file(const std::filesystem::path& path,
                            const std::string& algo = "sha256",
                            std::uint64_t partial_len = kDefaultPartialLen) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw HashError("cannot open file for hashing: " + path.string());
    Hasher full(algo);
    Hasher partial(algo);
    std::uint64_t partial_fed = 0;
    std::vector<char> buf(256 * 1024);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::streamsize got = in.gcount();
        if (got <= 0) break;
        full.update(buf.data(), static_cast<size_t>(got));
        if (partial_len > 0 && partial_fed < partial_len) {
            std::uint64_t take = std::min<std::uint64_t>(partial_len - partial_fed,
                                                         static_cast<std::uint64_t>(got));
            partial.update(buf.data(), static_cast<size_t>(take));
            partial_fed += take;
        }
    }
    if (in.bad()) throw HashError("read error while hashing: " + path.string());
    FileHashes out;
    out.hash_full = full.hex_digest();
    if (partial_len > 0) out.partial_hash = partial.hex_digest();
    return out;
}

}  // namespace webpurge

#endif  // WEBPURGE_HASH_HPP
