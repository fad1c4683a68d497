#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace stochlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman & Vigna). 32 bytes of state, so one engine per
// trajectory stays cheap for large ensembles.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

// Seed of the substream owned by `index` under master `seed`. Independent of
// how the index range is split among workers.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t a = seed;
    const std::uint64_t h = splitmix64(a);
    std::uint64_t b = h ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(b);
}

// Gaussian stream attached to one trajectory.
struct NormalStream {
    Xoshiro256 engine;
    std::normal_distribution<double> normal{0.0, 1.0};

    NormalStream() = default;
    NormalStream(std::uint64_t seed, std::uint64_t index) : engine(substream_seed(seed, index)) {}
    double operator()() { return normal(engine); }
};

}  // namespace stochlab
