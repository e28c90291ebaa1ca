#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "hmc/rng.hpp"
#include "hmc/stats.hpp"

namespace hmc {

// ---------------------------------------------------------------------------
// Barrier schedules and Gaussian ballot walks
// ---------------------------------------------------------------------------

/// Barrier A + offset(j) for checkpoints j = 1..n_max.
struct BarrierSpec {
    double A = 1.0;
    std::function<double(int)> offset = [](int) { return 0.0; };
    int n_max = 1;

    double level(int j) const { return A + offset(j); }

    /// Throws unless A >= 1, n_max >= 1 and |offset(j)| <= 10 log j on 1..n_max.
    void validate() const;

    static BarrierSpec flat(double A, int n_max);
    static BarrierSpec upper(double A, int n_max);  // A + 10 log j
    static BarrierSpec lower(double A, int n_max);  // A - 5 log j
};

/// P(sum_{m<=j} G_m <= A + offset(j) for all j <= n_max), G_m ~ N(0, variance_m)
/// independent. `variances` has n_max entries, or one entry used for every step;
/// each must lie in [1/20, 20].
MomentEstimate ballot_probability_mc(const BarrierSpec& spec, std::span<const double> variances,
                                     std::size_t samples, const Seed& seed, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Dyadic-log blocks e^{m-1} <= k < e^m
// ---------------------------------------------------------------------------

/// Largest integer k with k < e^n (0 for n = 0).
std::int64_t last_index_below_exp(int n);

/// Largest integer L with e^L <= min(-1/(4 log r), K); requires 0 < r < 1.
int log_K_r(double r, double K);

struct BlockMoments {
    int m = 0;
    std::int64_t k_first = 0;  // ceil(e^{m-1})
    std::int64_t k_last = 0;   // ceil(e^m) - 1
    double sigma2 = 0.0;       // sum r^{2k} / (2k)
    double covariance = 0.0;   // sum r^{2k} cos(k theta) / (2k)
    double rho = 0.0;          // covariance / sigma2
};

/// Variance and covariance of (Z_0(m), Z_theta(m)) by direct summation.
BlockMoments block_moments(double r, double theta, int m);

struct WalkBlocks {
    double r = 0.0;
    double theta = 0.0;
    double K = 0.0;
    int log_Kr = 0;
    double K_r = 0.0;
    int M = 0;                         // smallest integer with e^M >= min(10^3/|theta|, K_r/e)
    std::vector<BlockMoments> blocks;  // m = 1..log_Kr
};

/// Requires 0 < r < 1, |theta| <= pi and log K_r >= 2. theta = 0 uses the K_r/e branch for M.
WalkBlocks block_stats(double r, double theta, double K);

/// Head sums A_0(M), A_theta(M) and block increments Z_0(m), Z_theta(m) for
/// M < m <= log K_r, computed from one draw of X (X[0] = X(1)).
struct WalkIncrements {
    double head_0 = 0.0;
    double head_theta = 0.0;
    std::vector<double> z_0;
    std::vector<double> z_theta;
};
WalkIncrements walk_increments(const WalkBlocks& blocks, std::span<const cplx> x);

// ---------------------------------------------------------------------------
// Barrier events on a sample of X
// ---------------------------------------------------------------------------

/// Upper-bound event: for each 1 <= n <= log K,
///   sum_{k<e^n} (Re(X(k) r^k e^{ik theta}) / sqrt k - r^{2k}/k) <= A + 10 log n.
/// Requires K >= 3, 1 <= r <= e^{1/K}, 1 <= A <= sqrt(log K).
bool event_G_holds(std::span<const cplx> x, double r, double theta, double K, double A);

/// The same event required at every angle of a uniform grid of ceil(n e^n)
/// angles at checkpoint n, standing in for "all theta in [0, 2 pi)".
bool event_G_grid_holds(std::span<const cplx> x, double r, double K, double A);

/// Lower-bound event with barrier A - 5 log n for 1 <= n <= log K_r.
/// Requires K >= 10, e^{-1/40} <= r < 1, 1 <= A <= sqrt(log K_r).
bool event_L_holds(std::span<const cplx> x, double r, double theta, double K, double A);

/// Tilted expectation vs. shifted barrier probability:
///   left  = E[1_{G_r(A,0;K)} |F_K(r)|^2]
///   right = exp(sum_{k<=K} r^{2k}/k) P[sum_{k<e^n} y_k r^k / sqrt k <= A + 10 log n, all n]
/// with y_k ~ N(0, 1/2). Requires K >= 3, 1 <= r <= e^{1/K}, A >= 1.
std::pair<MomentEstimate, MomentEstimate> change_of_measure_check(double K, double r, double A,
                                                                  std::size_t samples_left,
                                                                  std::size_t samples_right, const Seed& seed,
                                                                  unsigned workers = 0);

// ---------------------------------------------------------------------------
// Bivariate normal domination
// ---------------------------------------------------------------------------

struct BivariateParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double var1 = 1.0;
    double var2 = 1.0;
    double rho = 0.0;
};

double bivariate_density(const BivariateParams& p, double x1, double x2);

/// sqrt((1+|rho|)/(1-|rho|)) times the density of independent normals with
/// variances var_i (1 + |rho|); pointwise >= bivariate_density.
double dominating_density(const BivariateParams& p, double x1, double x2);

/// One draw of (Y_1, Y_2).
std::pair<double, double> sample_bivariate(const BivariateParams& p, GaussianStream& stream);

// ---------------------------------------------------------------------------
// Two correlated walks past the head block
// ---------------------------------------------------------------------------

/// E[1_E prod_{M<m<=log K_r} exp(2 Z_0(m) + 2 Z_theta(m))], E: both tilted
/// partial sums from e^M stay <= B at every block end.
MomentEstimate two_walk_tilted_expectation(double r, double theta, double K, double B, std::size_t samples,
                                           const Seed& seed, unsigned workers = 0);

/// B -> infinity value: prod_{M<m<=log K_r} exp(4 sigma_m^2 (1 + rho_m)).
double two_walk_unconstrained(const WalkBlocks& blocks);

/// K_r^2 / e^{2M} * ((1 + max(0, B)) / sqrt(1 + log(K_r / e^M)))^2.
double two_walk_shape(const WalkBlocks& blocks, double B);

// ---------------------------------------------------------------------------
// Moments of the circle average restricted to the lower-bound set
// ---------------------------------------------------------------------------

struct RestrictedCircleMoments {
    MomentEstimate first;   // E[Y]
    MomentEstimate second;  // E[Y^2]
    MomentEstimate power;   // E[Y^q]
    double holder_bound = 0.0;  // first^{2-q} / second^{1-q}
};

/// Y = (1/grid) sum_j 1_{L(theta_j)} |F_K(r e^{i theta_j})|^2 on a uniform angle grid.
RestrictedCircleMoments restricted_circle_moments(double r, double K, double A, double q, std::size_t grid,
                                                  std::size_t samples, const Seed& seed, unsigned workers = 0);

}  // namespace hmc
