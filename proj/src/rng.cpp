#include "transq/rng.hpp"

#include <stdexcept>

namespace transq {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53U;
constexpr uint32_t kMul1 = 0xCD9E8D57U;
constexpr uint32_t kWeyl0 = 0x9E3779B9U;
constexpr uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

}  // namespace

std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RngStream::RngStream(uint64_t seed, uint64_t id) : seed_(seed), id_(id) {
    uint64_t k = splitmix64(seed);
    key_ = {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
}

RngStream RngStream::derive(uint64_t tag) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(tag + 0x5851F42D4C957F2DULL)), id_);
}

void RngStream::refill() {
    std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
                                   static_cast<uint32_t>(id_), static_cast<uint32_t>(id_ >> 32)};
    buf_ = philox4x32_10(ctr, key_);
    ++block_;
    pos_ = 0;
}

RngStream::result_type RngStream::operator()() {
    if (pos_ >= 4) refill();
    uint64_t v = (static_cast<uint64_t>(buf_[pos_]) << 32) | buf_[pos_ + 1];
    pos_ += 2;
    return v;
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open() { return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52; }

double RngStream::normal() { return normal_(*this); }

double RngStream::exponential(double rate) { return std::exponential_distribution<double>(rate)(*this); }

double RngStream::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw std::invalid_argument("gamma: shape and scale must be positive");
    return std::gamma_distribution<double>(shape, scale)(*this);
}

}  // namespace transq
