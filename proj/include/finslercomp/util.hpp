// Small shared utilities: portable RNG mapping, thread fan-out.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace finslercomp {

// mt19937_64 with a fixed mapping to doubles so samples are identical
// across standard libraries (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 eng_;
};

// Worker count from FINSLERCOMP_THREADS (default: hardware concurrency).
int worker_count();

// Runs body(i) for i in [0, count) across worker_count() threads.
// Results must be written to per-index slots by the caller.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace finslercomp
