#pragma once

#include <array>
#include <cstdint>

namespace mabs {

/// Philox4x32-10 counter-based block cipher (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3", SC 2011). One call produces four 32-bit
/// words from a (key, counter) pair; distinct counters give independent
/// words, so streams can be indexed rather than seeded sequentially.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t counter_hi,
                                        std::uint64_t counter_lo);

/// Deterministic stream of standard normal draws for one Monte Carlo path.
/// The stream is a pure function of (seed, path): partitioning paths across
/// workers cannot change any draw. Box-Muller on 53-bit uniforms, two
/// normals per Philox block.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path)
        : seed_(seed), path_(path), block_(0), have_spare_(false), spare_(0.0) {}

    double next();

private:
    std::uint64_t seed_;
    std::uint64_t path_;
    std::uint64_t block_;
    bool have_spare_;
    double spare_;
};

}  // namespace mabs
