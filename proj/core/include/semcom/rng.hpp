#pragma once

#include <cstdint>
#include <random>

namespace semcom {

// splitmix64 step; used for seed mixing so derived streams never collide
// with each other for distinct inputs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    std::uint64_t x = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
    return splitmix64(s);
}

// Deterministic RNG with portable derived draws. mt19937_64 output is
// pinned by the standard; the bounded/bernoulli draws below avoid
// std::uniform_int_distribution, whose mapping is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Lemire multiply-shift map onto [0, n). Bias is < n/2^64, irrelevant here;
    // determinism across platforms is what matters.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        const double scaled = p * 18446744073709551616.0; // 2^64
        return next_u64() < static_cast<std::uint64_t>(scaled);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace semcom
