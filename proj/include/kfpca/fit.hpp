#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/kernels.hpp"
#include "kfpca/scores.hpp"

namespace kfpca {

struct FitOptions {
    std::size_t grid_size = 51;
    std::size_t n_components = 2;
    std::size_t truncation = 2; // L used by prediction
    Kernel kernel{KernelShape::epanechnikov};
    std::optional<double> h_prime;           // default: |T|/median(m_i) rule
    std::optional<double> h_surface;         // default: GCV over candidates
    std::optional<double> h_mean;            // default: GCV over mean candidates
    std::vector<double> surface_candidates;  // default: density-aware geometric grid
    std::vector<double> mean_candidates;     // default: geometric 0.05|T|..0.30|T|

    // Default surface candidates span [h_lo, 0.3|T|] with h_lo = 6.5|T|/sqrt(n),
    // i.e. the smallest bandwidth whose kernel window is expected to hold
    // about 170 raw pairs; below that the local-linear fit chases noise.
    std::vector<double> resolved_surface_candidates(const Domain& domain,
                                                    std::size_t n_points) const;
    std::vector<double> resolved_mean_candidates(const Domain& domain) const;
};

struct FitResult {
    FittedModel model;
    SurfaceEstimate surface;
};

// Kendall pipeline: raw Kendall covariances -> GCV -> local-linear surface ->
// eigendecomposition; the mean is smoothed separately for prediction.
FitResult fit_kfpca(const Dataset& dataset, const FitOptions& options);

// Covariance baseline: mean smoothing -> centered raw covariances -> the same
// surface smoother and eigensolver.
FitResult fit_baseline(const Dataset& dataset, const FitOptions& options);

} // namespace kfpca
