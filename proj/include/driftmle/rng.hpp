#pragma once

#include <cmath>
#include <cstdint>

namespace driftmle {

// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and stream derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of an independent substream from a base seed and a stream
// index. Pinned; simulation reproducibility depends on it.
inline std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t stream) {
    std::uint64_t s = base_seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    return splitmix64_next(s);
}

// xoshiro256++ 1.0 (Blackman, Vigna 2019). State seeded via SplitMix64.
// Bit-stable across platforms; this generator is pinned for the project.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        for (auto& w : s_) w = splitmix64_next(seed);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0,1), 53-bit resolution, never exactly 0.
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the Marsaglia polar method (pinned transform).
    // Generates pairs; the spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace driftmle
