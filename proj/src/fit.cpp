#include "kfpca/fit.hpp"
#include <algorithm>
#include <cmath>

#include "kfpca/errors.hpp"
#include "kfpca/kendall.hpp"

namespace kfpca {

std::vector<double> FitOptions::resolved_surface_candidates(const Domain& domain,
                                                            std::size_t n_points) const {
    if (!surface_candidates.empty()) return surface_candidates;
    const double len = domain.length();
    const double density_floor = 6.5 * len / std::sqrt(static_cast<double>(n_points));
    const double lo = std::clamp(density_floor, 0.05 * len, 0.25 * len);
    return geometric_candidates(lo, 0.30 * len, 6);
}

std::vector<double> FitOptions::resolved_mean_candidates(const Domain& domain) const {
    if (!mean_candidates.empty()) return mean_candidates;
    const double len = domain.length();
    return geometric_candidates(0.05 * len, 0.30 * len, 6);
}

namespace {

struct MeanStage {
    Curve curve;
    double h_mu = 0.0;
    std::vector<GcvTraceEntry> trace;
    std::vector<std::size_t> fallback_nodes;
};

MeanStage fit_mean(const Dataset& dataset, const Grid& grid, const FitOptions& options) {
    MeanStage stage;
    if (options.h_mean) {
        stage.h_mu = *options.h_mean;
    } else {
        const auto candidates = options.resolved_mean_candidates(dataset.domain());
        GcvResult gcv = gcv_select_mean_bandwidth(dataset, grid, candidates, options.kernel);
        stage.h_mu = gcv.selected;
        stage.trace = std::move(gcv.trace);
    }
    MeanFit fit = local_linear_mean(dataset, grid, stage.h_mu, options.kernel);
    stage.curve = std::move(fit.curve);
    stage.fallback_nodes = std::move(fit.constant_fallback_nodes);
    return stage;
}

FitResult assemble(const Dataset& dataset, const FitOptions& options, const char* method,
                   std::vector<RawSurfacePoint> points, MeanStage mean_stage,
                   FitDiagnostics diagnostics) {
    const Grid grid(dataset.domain(), options.grid_size);
    double h_surface;
    if (options.h_surface) {
        h_surface = *options.h_surface;
    } else {
        const auto candidates =
            options.resolved_surface_candidates(dataset.domain(), points.size());
        GcvResult gcv = gcv_select_bandwidth(points, grid, candidates, options.kernel);
        h_surface = gcv.selected;
        diagnostics.surface_gcv_trace = std::move(gcv.trace);
    }
    diagnostics.chosen_h = h_surface;
    diagnostics.chosen_h_mu = mean_stage.h_mu;
    diagnostics.mean_gcv_trace = std::move(mean_stage.trace);
    diagnostics.mean_fallback_nodes = std::move(mean_stage.fallback_nodes);

    FitResult result;
    result.surface = local_linear_surface(points, grid, h_surface, options.kernel);
    result.model.method = method;
    result.model.mean = std::move(mean_stage.curve);
    result.model.eigen = eigendecompose(result.surface, options.n_components);
    result.model.truncation = options.truncation;
    result.model.bandwidths = {0.0, h_surface, mean_stage.h_mu}; // h_prime set by caller
    result.model.diagnostics = std::move(diagnostics);
    return result;
}

} // namespace

FitResult fit_kfpca(const Dataset& dataset, const FitOptions& options) {
    const Grid grid(dataset.domain(), options.grid_size);
    const double h_prime = options.h_prime ? *options.h_prime : default_h_prime(dataset);

    RawKendallResult raw = raw_kendall(dataset, h_prime, options.kernel);
    if (raw.points.empty())
        throw ValidationError("no off-diagonal Kendall pairs: all subjects have one observation?");

    MeanStage mean_stage = fit_mean(dataset, grid, options);
    FitDiagnostics diagnostics;
    diagnostics.dropped_comparisons = raw.dropped_comparisons;
    diagnostics.retained_fraction = raw.retained_fraction;

    FitResult result = assemble(dataset, options, "kfpca", std::move(raw.points),
                                std::move(mean_stage), std::move(diagnostics));
    result.model.bandwidths.h_prime = h_prime;
    return result;
}

FitResult fit_baseline(const Dataset& dataset, const FitOptions& options) {
    const Grid grid(dataset.domain(), options.grid_size);
    MeanStage mean_stage = fit_mean(dataset, grid, options);

    std::vector<RawSurfacePoint> points = raw_covariance_baseline(dataset, mean_stage.curve);
    if (points.empty())
        throw ValidationError("no off-diagonal covariance pairs: all subjects have one observation?");

    FitDiagnostics diagnostics;
    FitResult result = assemble(dataset, options, "baseline", std::move(points),
                                std::move(mean_stage), std::move(diagnostics));
    result.model.bandwidths.h_prime = options.h_prime ? *options.h_prime : default_h_prime(dataset);
    return result;
}

} // namespace kfpca
