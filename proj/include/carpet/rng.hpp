#pragma once

#include <cstdint>
#include <string_view>

namespace carpet {

// SplitMix64. Every stochastic choice uses a stream derived from the run
// seed and a fixed name, so adding a new consumer never shifts the others.
class Rng {
public:
    explicit Rng(std::uint64_t state) noexcept : state_(state) {}

    [[nodiscard]] static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t counter = 0) noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the name
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        Rng mix(seed ^ h);
        const std::uint64_t a = mix.next();
        Rng mix2(a ^ (counter * 0x9e3779b97f4a7c15ULL));
        return Rng(mix2.next());
    }

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do v = next();
        while (v >= limit);
        return v % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace carpet
