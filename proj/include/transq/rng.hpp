#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace transq {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Philox4x32 with 10 rounds. Output depends only on (key, counter).
std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);

// Counter-based stream identified by (seed, id). Two streams with different
// ids never share a counter block, so replications are independent of the
// order in which they run.
class RngStream {
public:
    using result_type = uint64_t;

    RngStream(uint64_t seed, uint64_t id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<uint64_t>::max(); }
    result_type operator()();

    uint64_t seed() const { return seed_; }
    uint64_t id() const { return id_; }

    // Independent stream keyed by a domain tag, for drivers that must not
    // share draws with the parent (e.g. the extra Brownian motion in Zhat).
    RngStream derive(uint64_t tag) const;

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on (0, 1).
    double uniform_open();
    double normal();
    double exponential(double rate);
    double gamma(double shape, double scale);

private:
    void refill();

    uint64_t seed_;
    uint64_t id_;
    std::array<uint32_t, 2> key_;
    uint64_t block_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
    std::normal_distribution<double> normal_;
};

}  // namespace transq
