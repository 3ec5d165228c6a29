#include "atlaslab/sha1.hpp"

#include <array>
#include <cstring>

namespace atlaslab {

namespace {

inline uint32_t rol(uint32_t v, int bits) {
    return (v << bits) | (v >> (32 - bits));
}

struct Sha1State {
    uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                     0xC3D2E1F0u};

    void process(const unsigned char* block) {
        uint32_t w[80];
        for (int t = 0; t < 16; ++t) {
            w[t] = (static_cast<uint32_t>(block[t * 4]) << 24) |
                   (static_cast<uint32_t>(block[t * 4 + 1]) << 16) |
                   (static_cast<uint32_t>(block[t * 4 + 2]) << 8) |
                   static_cast<uint32_t>(block[t * 4 + 3]);
        }
        for (int t = 16; t < 80; ++t) {
            w[t] = rol(w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16], 1);
        }
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int t = 0; t < 80; ++t) {
            uint32_t f, k;
            if (t < 20) {
                f = (b & c) | ((~b) & d);
                k = 0x5A827999u;
            } else if (t < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (t < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const uint32_t tmp = rol(a, 5) + f + e + k + w[t];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }
};

}  // namespace

std::string sha1_hex(std::string_view data) {
    Sha1State state;
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t remaining = data.size();
    while (remaining >= 64) {
        state.process(bytes);
        bytes += 64;
        remaining -= 64;
    }
    unsigned char tail[128] = {0};
    std::memcpy(tail, bytes, remaining);
    tail[remaining] = 0x80;
    const std::size_t tail_len = remaining + 1 + 8 <= 64 ? 64 : 128;
    const uint64_t bit_len = static_cast<uint64_t>(data.size()) * 8;
    for (int b = 0; b < 8; ++b) {
        tail[tail_len - 1 - b] = static_cast<unsigned char>(bit_len >> (8 * b));
    }
    state.process(tail);
    if (tail_len == 128) state.process(tail + 64);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(40);
    for (uint32_t word : state.h) {
        for (int b = 7; b >= 0; --b) {
            out.push_back(hex[(word >> (4 * b)) & 0xF]);
        }
    }
    return out;
}

std::string git_blob_hash(std::string_view data) {
    std::string framed = "blob " + std::to_string(data.size());
    framed.push_back('\0');
    framed.append(data);
    return sha1_hex(framed);
}

}  // namespace atlaslab
