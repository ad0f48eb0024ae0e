#pragma once

#include <cmath>
#include <cstdint>

namespace tpplab {

// Counter-based generator: SplitMix64 finalizer applied to a keyed counter.
// Every draw is mix(key + n*GAMMA) for the n-th call, so the stream is a pure
// function of (seed, stream index, counter) and reproduces bit-for-bit across
// platforms. Substream rule: substream i of seed s has key mix(s) ^ mix(GAMMA*(i+1)),
// one substream per sequence index everywhere batches are simulated.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ kGamma)) {}

    static CounterRng substream(std::uint64_t seed, std::uint64_t stream) {
        CounterRng r(0);
        r.key_ = mix(seed ^ kGamma) ^ mix(kGamma * (stream + 1));
        r.counter_ = 0;
        return r;
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    // uniform on the open interval (0,1); never returns 0 or 1, so logs are safe
    double uniform01() {
        const std::uint64_t bits = next_u64() >> 11;        // 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    // Box-Muller; one value per call keeps the call sequence position-independent
    double normal() {
        const double u = uniform01();
        const double v = uniform01();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
    }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace tpplab
