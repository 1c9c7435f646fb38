#include "kfpca/kendall.hpp"

#include <cmath>

#include "kfpca/errors.hpp"

namespace kfpca {

namespace {
constexpr double kDegenerateDenominator = 1e-12;
}

RawKendallResult raw_kendall(const Dataset& dataset, double h_prime, const Kernel& kernel) {
    if (!(h_prime > 0.0))
        throw ValidationError("h_prime must be positive");
    const std::size_t n_subjects = dataset.size();

    RawKendallResult result;
    long retained_total = 0;
    bool any_retained = false;

    std::vector<double> residuals;
    std::vector<double> accum; // per (k,l) pair sums for the current subject

    for (std::size_t i = 0; i < n_subjects; ++i) {
        const SparseSample& target = dataset[i];
        const std::size_t m = target.size();
        if (m < 2) continue;

        accum.assign(m * m, 0.0);
        long retained = 0;

        for (std::size_t j = 0; j < n_subjects; ++j) {
            if (j == i) continue;
            const SparseSample& donor = dataset[j];

            residuals.clear();
            bool feasible = true;
            for (std::size_t q = 0; q < m; ++q) {
                const auto xhat = nw_estimate(donor, target.times[q], h_prime, kernel);
                if (!xhat) {
                    feasible = false;
                    break;
                }
                residuals.push_back(target.values[q] - *xhat);
            }
            if (!feasible) {
                ++result.dropped_comparisons;
                continue;
            }

            double denom = 0.0;
            for (double r : residuals) denom += r * r;
            denom /= static_cast<double>(m);
            if (denom < kDegenerateDenominator) {
                ++result.dropped_comparisons;
                continue;
            }

            for (std::size_t k = 0; k < m; ++k)
                for (std::size_t l = 0; l < m; ++l)
                    if (k != l)
                        accum[k * m + l] += residuals[k] * residuals[l] / denom;
            ++retained;
        }

        if (retained == 0) continue; // subject contributes no points
        any_retained = true;
        retained_total += retained;

        const double scale = 1.0 / static_cast<double>(retained);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                if (k != l)
                    result.points.push_back({target.times[k], target.times[l],
                                             accum[k * m + l] * scale, static_cast<int>(i)});
    }

    bool has_pairable_subject = false;
    for (const auto& s : dataset.samples())
        if (s.size() >= 2) has_pairable_subject = true;
    if (has_pairable_subject && !any_retained)
        throw BandwidthError("h_prime too small: every donor comparison was dropped");

    const double total_directed = static_cast<double>(n_subjects) * (n_subjects - 1);
    result.retained_fraction = static_cast<double>(retained_total) / total_directed;
    return result;
}

std::vector<RawSurfacePoint> raw_covariance_baseline(const Dataset& dataset,
                                                     const Curve& mean_on_grid) {
    std::vector<RawSurfacePoint> points;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const SparseSample& sample = dataset[i];
        const std::size_t m = sample.size();
        if (m < 2) continue;
        std::vector<double> centered(m);
        for (std::size_t j = 0; j < m; ++j)
            centered[j] = sample.values[j] - mean_on_grid.at(sample.times[j]);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                if (k != l)
                    points.push_back({sample.times[k], sample.times[l],
                                      centered[k] * centered[l], static_cast<int>(i)});
    }
    return points;
}

} // namespace kfpca
