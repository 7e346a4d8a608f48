#include "semcom/channel.hpp"

#include "semcom/rng.hpp"

namespace semcom {

namespace {

constexpr std::uint64_t kTapStream = 0x7461702d64726177ull; // distinct tap draw

BitFrame flip_bits(const BitFrame& frame, double p, std::uint64_t seed) {
    BitFrame out = frame;
    Rng rng(seed);
    for (std::uint8_t& bit : out.bits)
        if (rng.bernoulli(p)) bit ^= 1u;
    return out;
}

} // namespace

TransmitResult transmit(const BitFrame& frame, const ChannelConfig& cfg,
                        std::uint64_t frame_id) {
    if (!(cfg.flip_probability >= 0.0 && cfg.flip_probability <= 1.0))
        raise(Errc::validation_error, "flip probability must lie in [0, 1]");

    std::uint64_t frame_seed = mix_seed(cfg.rng_seed, frame_id);
    TransmitResult result;
    result.received = flip_bits(frame, cfg.flip_probability, frame_seed);
    if (cfg.eavesdrop_tap)
        result.tapped =
            flip_bits(frame, cfg.flip_probability, mix_seed(frame_seed, kTapStream));
    return result;
}

} // namespace semcom
