#pragma once

#include <cstdint>
#include <random>

namespace cvilab {

// Stream identifiers used with derive_seed so that each consumer of the run
// seed draws from its own independent sequence.
enum class Stream : std::uint64_t {
    synth = 0x5359'4e54,
    fcm = 0x4643'4d00,
    perturb = 0x5045'5254,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e37'79b9'7f4a'7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58'476d'1ce4'e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d0'49bb'1331'11ebULL;
    return z ^ (z >> 31);
}

// Splitting rule: child = mix64(parent XOR index). Used per trial and per
// restart so that results never depend on the order work is scheduled in.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(parent ^ index);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept {
    return mix64(parent ^ static_cast<std::uint64_t>(stream));
}

// mt19937_64 plus hand-written uniform and normal transforms. The standard
// distribution classes are implementation-defined, so they are avoided to
// keep output identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, n); n > 0. Rejects the tail to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cvilab
