#ifndef CRCARTAN_RNG_HPP
#define CRCARTAN_RNG_HPP

#include <cstdint>
#include <string_view>

namespace crcartan {

/// Deterministic, implementation-pinned RNG (splitmix64). std:: distributions are
/// implementation-defined, which would break bit-reproducible reports.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t x = (state_ += 0x9E3779B97F4A7C15ull);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    /// Uniform in [lo, hi], inclusive; unbiased via rejection.
    int64_t uniform(int64_t lo, int64_t hi) {
        uint64_t range = uint64_t(hi - lo) + 1;
        uint64_t limit = ~0ull - (~0ull % range);
        uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + int64_t(x % range);
    }

  private:
    uint64_t state_;
};

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

/// Deterministic sub-seed for a named task within a run.
inline uint64_t derive_seed(uint64_t seed, std::string_view label) {
    uint64_t x = seed ^ fnv1a(label);
    x = (x ^ (x >> 33)) * 0xFF51AFD7ED558CCDull;
    x = (x ^ (x >> 33)) * 0xC4CEB9FE1A85EC53ull;
    return x ^ (x >> 33);
}

}  // namespace crcartan

#endif
