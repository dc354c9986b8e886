// Deterministic, stream-splittable random number generation.
//
// RngStream is a xoshiro256++ generator whose state is derived from a
// (seed, stream) pair through a splitmix64 counter sequence.  Identical
// (seed, stream) pairs always produce identical draw sequences; distinct
// stream ids start from decorrelated states, so independent chains can be
// run concurrently from one experiment seed.
#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace srp {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace detail

class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
        std::uint64_t init = seed ^ (0x6a09e667f3bcc909ULL * (stream + 1));
        for (auto& word : state_) word = detail::splitmix64(init);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() {
        std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) without modulo bias (Lemire rejection).
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
        std::uint64_t threshold = (-bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Child stream for hierarchical fan-out (per chain, per alpha, ...).
    RngStream child(std::uint64_t salt) const {
        std::uint64_t mix = seed_;
        mix ^= detail::splitmix64(mix) + 0x9e3779b97f4a7c15ULL * (stream_ + 1);
        return RngStream(mix, salt);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_[4];
};

}  // namespace srp
