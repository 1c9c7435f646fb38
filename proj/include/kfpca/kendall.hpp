#pragma once

#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/kernels.hpp"
#include "kfpca/smoothing.hpp"

namespace kfpca {

struct RawKendallResult {
    std::vector<RawSurfacePoint> points; // one per ordered off-diagonal pair (i,k,l)
    long dropped_comparisons = 0;
    // retained directed donor comparisons / N(N-1)
    double retained_fraction = 0.0;
};

// Raw Kendall's tau covariances. For each subject i with m_i >= 2, every
// donor j != i is evaluated at all of i's observation times by the
// Nadaraya-Watson pre-smoother. A comparison is dropped when any target time
// lacks kernel coverage, or when the mean squared residual falls below
// 1e-12 (identical curves carry no rank information). Retained comparisons
// accumulate r_k * r_l / (sum_q r_q^2 / m_i) and each subject's sums divide
// by its retained donor count.
RawKendallResult raw_kendall(const Dataset& dataset, double h_prime, const Kernel& kernel);

// Raw covariances for the covariance-smoothing baseline: centered products
// (Y_ik - mu(t_ik)) (Y_il - mu(t_il)) for every ordered off-diagonal pair,
// with the mean read off its grid by linear interpolation.
std::vector<RawSurfacePoint> raw_covariance_baseline(const Dataset& dataset,
                                                     const Curve& mean_on_grid);

} // namespace kfpca
