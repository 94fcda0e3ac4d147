#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace tcsde {

// Philox4x32-10 counter-based generator. A stream is fully determined by its
// 64-bit key; there is no hidden state beyond the counter, so per-path streams
// can be created in any order on any thread.
class Philox {
  public:
    using result_type = std::uint64_t;

    explicit Philox(std::uint64_t key) : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        if (pos_ == 2) {
            refill();
        }
        return buf_[pos_++];
    }

    // uniform on the open interval (0, 1), 53 random bits
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    // Marsaglia polar method; second variate cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double exponential() { return -std::log(uniform()); }

    // Standard one-sided beta-stable variate with E[exp(-s S)] = exp(-s^beta),
    // 0 < beta < 1 (Kanter's representation of the Chambers-Mallows-Stuck method).
    double stable(double beta) {
        const double u = std::numbers::pi * uniform();
        const double w = exponential();
        const double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
        return a * std::pow(std::sin((1.0 - beta) * u) / w, (1.0 - beta) / beta);
    }

  private:
    void refill() {
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(ctr_), static_cast<std::uint32_t>(ctr_ >> 32), 0u, 0u};
        std::array<std::uint32_t, 2> k = key_;
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        ++ctr_;
        buf_[0] = (std::uint64_t{c[0]} << 32) | c[1];
        buf_[1] = (std::uint64_t{c[2]} << 32) | c[3];
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t ctr_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stream key for path `index` of a run with base `seed`. `channel` separates
// independent uses of the same path index (e.g. clock vs noise vs target ensemble).
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index, std::uint64_t channel = 0) {
    return mix64((mix64(seed) ^ index) + 0x9E3779B97F4A7C15ull * (channel + 1));
}

inline Philox make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t channel = 0) {
    return Philox(stream_key(seed, index, channel));
}

}  // namespace tcsde
