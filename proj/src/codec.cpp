#include "cgvd/codec.hpp"

#include "cgvd/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cstdio>

namespace cgvd {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  int(bytes.size()));
    out.resize(std::size_t(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw Error(ErrorCode::ProtocolError, "base64 length not a multiple of 4");
    }
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  int(text.size()));
    if (n < 0) {
        throw Error(ErrorCode::ProtocolError, "malformed base64");
    }
    // EVP_DecodeBlock keeps the bytes that padding stands for.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') {
        ++pad;
        if (text.size() > 1 && text[text.size() - 2] == '=') {
            ++pad;
        }
    }
    out.resize(std::size_t(n) - pad);
    return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::string hex;
    hex.reserve(len * 2);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string image_digest(const Image& image) {
    std::vector<std::uint8_t> buf;
    buf.reserve(image.data().size() + 8);
    for (int v : {image.width(), image.height()}) {
        for (int s = 0; s < 32; s += 8) {
            buf.push_back(std::uint8_t((unsigned(v) >> s) & 0xff));
        }
    }
    buf.insert(buf.end(), image.data().begin(), image.data().end());
    return sha256_hex(buf);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace cgvd
