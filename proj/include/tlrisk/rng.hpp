#pragma once

#include <cstdint>
#include <initializer_list>

namespace tlrisk {

// Counter-based 64-bit generator (splitmix64 output function over an
// incrementing counter).  Streams with different seeds are independent for
// practical purposes, which lets samplers derive one stream per role and stay
// order-independent across sweep cells.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double next_double();

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double next_gaussian();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Hashes (seed, tags...) into a new stream seed.  Every dataset, task pair and
// optimizer init draws from a stream derived this way, so results depend only
// on the tags and never on iteration order.
std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

} // namespace tlrisk
