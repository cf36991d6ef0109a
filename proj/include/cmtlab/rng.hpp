#pragma once

#include <cstdint>
#include <limits>

namespace cmtlab {

// Portable random stream used by every stochastic component.
//
// The generator is SplitMix64: a 64-bit Weyl sequence
//     state += 0x9E3779B97F4A7C15
// passed through the finalizer
//     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//     z =  z ^ (z >> 31)
//
// Substreams: the stream with identifier `id` under master seed `seed`
// starts from state  mix64(seed ^ mix64(id + 0x632BE59BD9B4E019)),
// where mix64 is the finalizer above applied to its argument. Every
// consumer derives its own substream (one per coded packet, one per
// Monte Carlo trial, ...) so results never depend on evaluation order.
//
// Derived quantities:
//   uniform01()       = (next() >> 11) * 2^-53
//   uniform_below(n)  = rejection sampling: draw x until x >= (2^64 - n) mod n,
//                       return x mod n
//   next_bits         = next() consumed least-significant bit first

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t substream_state(std::uint64_t seed, std::uint64_t id) noexcept {
    return mix64(seed ^ mix64(id + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t state) noexcept : state_(state) {}

    /// Substream `id` of master seed `seed`.
    constexpr Rng(std::uint64_t seed, std::uint64_t id) noexcept : state_(substream_state(seed, id)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    constexpr result_type operator()() noexcept { return next(); }

    constexpr double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr std::uint64_t uniform_below(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) {
                return x % n;
            }
        }
    }

    constexpr bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Fresh substream keyed off this generator's next output.
    constexpr Rng split(std::uint64_t id) noexcept { return Rng(next(), id); }

private:
    std::uint64_t state_;
};

// Reserved stream identifiers.
namespace streams {
inline constexpr std::uint64_t kPrecode = 0x8000000000000000ULL;
inline constexpr std::uint64_t kFixPacketBase = 0x4000000000000000ULL;
inline constexpr std::uint64_t kTrialBase = 0x2000000000000000ULL;
inline constexpr std::uint64_t kSimArrivals = 0x1000000000000001ULL;
inline constexpr std::uint64_t kSimActions = 0x1000000000000002ULL;
inline constexpr std::uint64_t kSimChannel = 0x1000000000000003ULL;
inline constexpr std::uint64_t kSimSource = 0x1000000000000004ULL;
inline constexpr std::uint64_t kSimCodecBase = 0x0800000000000000ULL;
}  // namespace streams

}  // namespace cmtlab
