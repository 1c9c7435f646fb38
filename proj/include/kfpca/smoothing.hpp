#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/kernels.hpp"

namespace kfpca {

struct Bandwidths {
    double h_prime = 0.0; // donor pre-smoothing
    double h = 0.0;       // surface smoothing
    double h_mu = 0.0;    // mean smoothing

    void validate(const Domain& domain) const;
};

// One off-diagonal raw covariance observation at (s, t).
struct RawSurfacePoint {
    double s = 0.0;
    double t = 0.0;
    double value = 0.0;
    int subject_index = -1;
};

// Smoothed symmetric surface on a square grid.
struct SurfaceEstimate {
    Grid grid;
    Eigen::MatrixXd values; // G x G, symmetric

    double value_at(double s, double t) const; // bilinear, clamped to the domain
};

// Kernel-weighted average of the donor's observations at target_time.
// Empty when no donor observation receives positive weight (the infeasible
// case: nearest observation at least h_prime away).
std::optional<double> nw_estimate(const SparseSample& donor, double target_time, double h_prime,
                                  const Kernel& kernel);

struct MeanFit {
    Curve curve;
    // Grid nodes where the local design was degenerate and a weighted mean
    // was used instead of the local-linear intercept.
    std::vector<std::size_t> constant_fallback_nodes;
};

// Local-linear fit of the pooled observations at each grid node.
MeanFit local_linear_mean(const Dataset& dataset, const Grid& grid, double h_mu,
                          const Kernel& kernel);

// Bivariate local-linear surface smoother. At each node the intercept of the
// kernel-weighted plane fit is computed from the moment sums
//   S_pq = n^-1 sum_p ((s_p - s)/h)^p ((t_p - t)/h)^q K_h(s_p - s) K_h(t_p - t)
//   K_pq = same with the raw value as extra factor
// via  beta0 = (A1*K00 - A2*K10 - A3*K01) / B  with
//   A1 = S20*S02 - S11^2, A2 = S10*S02 - S01*S11, A3 = S01*S20 - S10*S11,
//   B  = A1*S00 - A2*S10 - A3*S01.
// Degenerate nodes fall back to the local-constant fit K00/S00; nodes with no
// effective local data raise BandwidthError. Output is symmetrized (V+V')/2.
SurfaceEstimate local_linear_surface(std::span<const RawSurfacePoint> points, const Grid& grid,
                                     double h, const Kernel& kernel);

struct GcvTraceEntry {
    double bandwidth = 0.0;
    double rss = 0.0;
    double df = 0.0; // effective degrees of freedom nu(h)
    double score = 0.0;
    bool feasible = false;
    std::string note;
};

struct GcvResult {
    double selected = 0.0;
    std::vector<GcvTraceEntry> trace;
};

// GCV(h) = RSS(h) / (1 - nu(h)/n)^2 with nu(h) = |T|^2 kappa(0)^2 / h^2.
// Fitted values are read off the smoothed grid by bilinear interpolation.
// Candidates with nu >= n or a failed fit score infinity; ties (including the
// all-interpolating zero-RSS case) resolve to the largest bandwidth.
GcvResult gcv_select_bandwidth(std::span<const RawSurfacePoint> points, const Grid& grid,
                               std::span<const double> candidates, const Kernel& kernel);

// 1-D analogue for the mean bandwidth: nu(h) = |T| kappa(0) / h.
GcvResult gcv_select_mean_bandwidth(const Dataset& dataset, const Grid& grid,
                                    std::span<const double> candidates, const Kernel& kernel);

// h' = |T| / median(m_i), clamped to [0.02 |T|, 0.25 |T|].
double default_h_prime(const Dataset& dataset);

// count points log-spaced between lo and hi inclusive.
std::vector<double> geometric_candidates(double lo, double hi, std::size_t count);

} // namespace kfpca
