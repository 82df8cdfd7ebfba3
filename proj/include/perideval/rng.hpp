#pragma once

#include <cstdint>
#include <random>

namespace perideval {

/// mt19937_64 with a platform-independent mapping to doubles, so seeded runs
/// produce byte-identical outputs everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 engine_;
};

} // namespace perideval
