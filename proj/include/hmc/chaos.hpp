#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hmc/rng.hpp"
#include "hmc/series.hpp"
#include "hmc/stats.hpp"

namespace hmc {

/// Coefficients A(0..N) of F_K(z) = exp(sum_{k<=K} X(k) z^k / sqrt(k)).
struct ChaosSample {
    std::size_t N = 0;
    double K = 0.0;
    ComplexSeries coeffs;
    Seed seed{};
};

/// Draws X(1..count) in order.
std::vector<cplx> draw_gaussians(GaussianStream& stream, std::size_t count);

/// exp(sum_{k <= min(K, X.size())} X(k) z^k / sqrt(k)) to degree N; X[0] holds X(1).
ComplexSeries chaos_coefficients(std::span<const cplx> x, std::size_t N, double K,
                                 ExpEngine engine = ExpEngine::Automatic);

/// Samples A(0..N). Only X(1..min(N, floor K)) are drawn, so the result does
/// not change when K grows past N.
ChaosSample sample_A(std::size_t N, double K, GaussianStream& stream,
                     ExpEngine engine = ExpEngine::Automatic);

/// Monte Carlo estimate of E|A(N)|^{2q} over S replicates; replicate i draws
/// from split(seed, i) and uses K = N.
MomentEstimate estimate_moment(std::size_t N, double q, std::size_t samples, const Seed& seed,
                               unsigned workers = 0);

/// exp(sum_{k<=K} r^{2k}/k) = E|F_K(r e^{i theta})|^2 for every theta.
double circle_mean_closed_form(double K, double r);

/// Smallest D with r^{2D} / (1 - r^2) < tol; requires 0 < r < 1.
std::size_t circle_truncation_degree(double r, double tol = 1e-9);

struct CircleAverage {
    double value = 0.0;
    std::size_t degree = 0;
    bool truncated = false;  // true at r = 1: value is the integral of the degree-D truncation
};

/// One sample of (1/2pi) int |F_K(r e^{i theta})|^2 d theta via Parseval.
/// For r < 1 the degree defaults to circle_truncation_degree(r); an explicit
/// degree below it is rejected. At r = 1 the degree must be supplied.
CircleAverage circle_average_sample(double K, double r, GaussianStream& stream,
                                    std::optional<std::size_t> degree = std::nullopt);

struct DecayRow {
    std::size_t N = 0;
    MomentEstimate estimate;  // of E|A(N)|
    double compensated = 0.0; // estimate * (log N)^{1/4}
};

struct DecayTable {
    std::vector<DecayRow> rows;
    double band_ratio = 0.0;     // max/min of `compensated` over rows with N >= band_min_N
    double loglog_slope = 0.0;   // OLS slope of log E|A(N)| against log log N (informational)
    std::size_t band_min_N = 0;
};

/// First-moment estimates on an increasing grid of N >= 2 with per-N sample counts.
DecayTable fit_decay_band(std::span<const std::size_t> N_grid, std::span<const std::size_t> samples_per_N,
                          const Seed& seed, unsigned workers = 0, std::size_t band_min_N = 64);

/// The moment-shape normalizer ((1-q) sqrt(log N) + 1)^q.
double moment_shape(std::size_t N, double q);

/// Hoelder lower bound E[Y^q] >= (E Y)^{2-q} / (E Y^2)^{1-q} for Y >= 0, 0 <= q <= 1.
double holder_lower_bound(double first_moment, double second_moment, double q);

}  // namespace hmc
