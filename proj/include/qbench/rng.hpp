#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace qbench {

// Deterministic generator with explicitly coded distributions so that
// streams are reproducible across platforms and standard library versions.
// Core is xoshiro256** seeded through splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection-free multiply-shift; bias is negligible for n << 2^64 but
        // we keep the strict rejection loop anyway for determinism clarity.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

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
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Independent sub-stream for worker `index`; used to keep trajectories
    // and record replicates decoupled from evaluation order.
    static std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
        std::uint64_t x = master ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
        splitmix64(x);
        return splitmix64(x);
    }

    static std::uint64_t hash_label(std::uint64_t master, const std::string& label) {
        std::uint64_t h = 1469598103934665603ULL ^ master;
        for (unsigned char c : label) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qbench
