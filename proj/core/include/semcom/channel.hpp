#pragma once

#include <cstdint>
#include <optional>

#include "semcom/codec.hpp"

namespace semcom {

struct ChannelConfig {
    double flip_probability = 0.0;
    std::uint64_t rng_seed = 0;
    bool eavesdrop_tap = false;
};

struct TransmitResult {
    BitFrame received;
    std::optional<BitFrame> tapped;
};

// Binary symmetric channel. The receiver's copy and the eavesdropper's tap
// are independent draws through the same flip probability; both generators
// derive from (rng_seed, frame_id) so parallel frames never share state.
TransmitResult transmit(const BitFrame& frame, const ChannelConfig& cfg,
                        std::uint64_t frame_id = 0);

} // namespace semcom
