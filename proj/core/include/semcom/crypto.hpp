#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcom {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex); // ParseError on odd length / non-hex

bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// 256-bit symmetric key held by transmitter and receiver only; never written
// into transcripts adversaries can see.
struct SharedSecret {
    std::array<std::uint8_t, 32> key{};

    static SharedSecret derive(std::uint64_t seed);

    bool operator==(const SharedSecret&) const = default;
};

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

} // namespace semcom
