#pragma once

#include <cstdint>
#include <random>

namespace trimap {

// Deterministic stream of draws.  Every randomized routine takes one of these
// by reference so that a fixed seed reproduces a run byte for byte.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform draw from [0, n) by rejection, so the stream never depends on
    // library-specific distribution internals.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t v = eng_();
            if (v < limit) return v % n;
        }
    }

    bool coin() { return (next() & 1u) != 0; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace trimap
