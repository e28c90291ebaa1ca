#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace hmc {

using cplx = std::complex<double>;

/// Identifies one replayable random stream.
///
/// A stream is a pure function of (root, replicate): the pair is expanded
/// through std::seed_seq into the state of a 64-bit Mersenne twister, so two
/// streams built from equal seeds emit identical draws on any thread.
struct Seed {
    std::uint64_t root = 0;
    std::uint64_t replicate_index = 0;

    friend bool operator==(const Seed&, const Seed&) = default;
};

/// Child seed for replicate `replicate` of an experiment rooted at `seed`.
Seed split(const Seed& seed, std::uint64_t replicate);

/// Forward-only source of the independent standard complex Gaussians X(k).
///
/// Draw k (1-based) is X(k): real and imaginary parts are independent
/// N(0, 1/2). Each complex draw consumes exactly two 64-bit words (one
/// Box-Muller pair), so stream positions line up across consumers.
class GaussianStream {
public:
    explicit GaussianStream(const Seed& seed);

    const Seed& seed() const { return seed_; }
    std::uint64_t position() const { return position_; }

    cplx next_complex_gaussian();

    // Real N(0, 1). Consumes one complex draw and returns sqrt(2) * Re X.
    double next_normal();

    // Uniform on (0, 1], 53-bit resolution.
    double next_uniform();

    // Uniform point on the unit circle.
    cplx next_unit_phase();

private:
    std::uint64_t next_word() { return engine_(); }

    Seed seed_;
    std::mt19937_64 engine_;
    std::uint64_t position_ = 0;
};

}  // namespace hmc
