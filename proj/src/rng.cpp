#include "hmc/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace hmc {

namespace {

std::mt19937_64 make_engine(const Seed& s) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.root),
                      static_cast<std::uint32_t>(s.root >> 32),
                      static_cast<std::uint32_t>(s.replicate_index),
                      static_cast<std::uint32_t>(s.replicate_index >> 32)};
    return std::mt19937_64(seq);
}

double to_unit_interval(std::uint64_t w) {
    // (0, 1]: never returns 0, so log() below is finite.
    return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

Seed split(const Seed& seed, std::uint64_t replicate) {
    // Domain tag keeps child roots disjoint from stream states of the parent.
    std::seed_seq seq{static_cast<std::uint32_t>(seed.root),
                      static_cast<std::uint32_t>(seed.root >> 32),
                      static_cast<std::uint32_t>(seed.replicate_index),
                      static_cast<std::uint32_t>(seed.replicate_index >> 32),
                      0x5EEDu};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    const std::uint64_t child_root = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    return Seed{child_root, replicate};
}

GaussianStream::GaussianStream(const Seed& seed) : seed_(seed), engine_(make_engine(seed)) {}

cplx GaussianStream::next_complex_gaussian() {
    const double u1 = to_unit_interval(next_word());
    const double u2 = to_unit_interval(next_word());
    // |X|^2 is Exp(1) for a standard complex Gaussian.
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    ++position_;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double GaussianStream::next_normal() {
    return std::numbers::sqrt2 * next_complex_gaussian().real();
}

double GaussianStream::next_uniform() {
    ++position_;
    return to_unit_interval(next_word());
}

cplx GaussianStream::next_unit_phase() {
    const double angle = 2.0 * std::numbers::pi * next_uniform();
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace hmc
