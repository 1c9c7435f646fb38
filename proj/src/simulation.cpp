#include "kfpca/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Dense>

#include "kfpca/eigen_analysis.hpp"
#include "kfpca/errors.hpp"

namespace kfpca {

namespace {
constexpr double kDomainLower = 0.0;
constexpr double kDomainUpper = 10.0;
constexpr double kJitterVariance = 0.1;
constexpr int kAnchorCount = 51; // c_0..c_50
} // namespace

std::string to_string(EigenCase c) { return std::to_string(static_cast<int>(c)); }

std::string to_string(ScoreDistribution d) {
    switch (d) {
    case ScoreDistribution::gaussian: return "gaussian";
    case ScoreDistribution::mix_gaussian: return "mix_gaussian";
    case ScoreDistribution::ec2: return "ec2";
    case ScoreDistribution::skew_t: return "skew_t";
    }
    return "?";
}

std::string to_string(DesignDensity d) {
    return d == DesignDensity::dense ? "dense" : "sparse";
}

EigenCase eigen_case_from_int(int value) {
    if (value < 1 || value > 4)
        throw ValidationError("case must be 1, 2, 3 or 4");
    return static_cast<EigenCase>(value);
}

ScoreDistribution score_distribution_from_string(const std::string& name) {
    if (name == "gaussian") return ScoreDistribution::gaussian;
    if (name == "mix_gaussian") return ScoreDistribution::mix_gaussian;
    if (name == "ec2") return ScoreDistribution::ec2;
    if (name == "skew_t") return ScoreDistribution::skew_t;
    throw ValidationError("unknown score distribution '" + name + "'");
}

DesignDensity design_density_from_string(const std::string& name) {
    if (name == "dense") return DesignDensity::dense;
    if (name == "sparse") return DesignDensity::sparse;
    throw ValidationError("unknown design '" + name + "'");
}

void SimulationSpec::validate() const {
    if (n_subjects < 2) throw ValidationError("n_subjects must be >= 2");
    if (n_runs < 1) throw ValidationError("n_runs must be >= 1");
    if (noise_variance < 0.0) throw ValidationError("noise_variance must be >= 0");
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw ValidationError("eigenvalues must be positive");
}

double simulation_mean(double t) { return t + std::sin(t); }

double true_phi(EigenCase c, int k, double t) {
    constexpr double inv_sqrt5 = 0.4472135954999579392818347337462552470881;
    const double pi = std::numbers::pi;
    switch (c) {
    case EigenCase::one:
        return (k == 1 ? std::cos(pi * t / 10.0) : std::sin(pi * t / 10.0)) * inv_sqrt5;
    case EigenCase::two:
        return (k == 1 ? std::cos(pi * t / 10.0) : std::cos(pi * t / 5.0)) * inv_sqrt5;
    case EigenCase::three:
        return (k == 1 ? std::cos(pi * t / 5.0) : std::sin(pi * t / 5.0)) * inv_sqrt5;
    case EigenCase::four:
        return (k == 1 ? std::cos(pi * t / 5.0) : std::sin(2.0 * pi * t / 5.0)) * inv_sqrt5;
    }
    throw ValidationError("unknown case");
}

std::pair<Curve, Curve> true_eigenfunctions(EigenCase c, const Grid& grid) {
    if (grid.domain().lower != kDomainLower || grid.domain().upper != kDomainUpper)
        throw ValidationError("true eigenfunctions are defined on [0, 10]");
    std::vector<double> v1(grid.size()), v2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v1[i] = true_phi(c, 1, grid[i]);
        v2[i] = true_phi(c, 2, grid[i]);
    }
    return {Curve(grid, std::move(v1)), Curve(grid, std::move(v2))};
}

namespace {

// Standardized skew-t constants for shape alpha, df nu (Azzalini's family):
// delta = alpha/sqrt(1+alpha^2), b = sqrt(nu/pi) Gamma((nu-1)/2)/Gamma(nu/2),
// mean = b*delta, variance = nu/(nu-2) - mean^2.
struct SkewTConstants {
    double delta;
    double mean;
    double sd;
};

SkewTConstants skew_t_constants(double alpha, double nu) {
    SkewTConstants c{};
    c.delta = alpha / std::sqrt(1.0 + alpha * alpha);
    const double b = std::sqrt(nu / std::numbers::pi) *
                     std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
    c.mean = b * c.delta;
    c.sd = std::sqrt(nu / (nu - 2.0) - c.mean * c.mean);
    return c;
}

double draw_chi_squared(Rng& rng, int df) {
    double sum = 0.0;
    for (int i = 0; i < df; ++i) {
        const double z = rng.normal();
        sum += z * z;
    }
    return sum;
}

double draw_one_score(ScoreDistribution distribution, double eigenvalue, Rng& rng) {
    switch (distribution) {
    case ScoreDistribution::gaussian:
        return std::sqrt(eigenvalue) * rng.normal();
    case ScoreDistribution::mix_gaussian: {
        const double center = std::sqrt(eigenvalue / 2.0);
        const double sd = std::sqrt(eigenvalue / 2.0);
        const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
        return sign * center + sd * rng.normal();
    }
    case ScoreDistribution::ec2: {
        // t_4 scaled to unit variance, heavy tailed.
        const double z = rng.normal();
        const double chi2 = draw_chi_squared(rng, 4);
        const double t4 = z / std::sqrt(chi2 / 4.0);
        return std::sqrt(eigenvalue) * t4 / std::sqrt(2.0);
    }
    case ScoreDistribution::skew_t: {
        static const SkewTConstants c = skew_t_constants(5.0, 5.0);
        const double z0 = rng.normal();
        const double z1 = rng.normal();
        const double sn = c.delta * std::abs(z0) + std::sqrt(1.0 - c.delta * c.delta) * z1;
        const double chi2 = draw_chi_squared(rng, 5);
        const double t = sn / std::sqrt(chi2 / 5.0);
        return std::sqrt(eigenvalue) * (t - c.mean) / c.sd;
    }
    }
    throw ValidationError("unknown score distribution");
}

} // namespace

std::vector<double> draw_scores(ScoreDistribution distribution, double eigenvalue, std::size_t n,
                                Rng& rng) {
    if (!(eigenvalue > 0.0))
        throw ValidationError("eigenvalue must be positive");
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(draw_one_score(distribution, eigenvalue, rng));
    return out;
}

GeneratedDataset generate_dataset(const SimulationSpec& spec, Rng& rng) {
    spec.validate();
    const Domain domain(kDomainLower, kDomainUpper);
    const double jitter_sd = std::sqrt(kJitterVariance);

    // Jittered anchor grid, boundary-clamped.
    std::array<double, kAnchorCount> jittered{};
    for (int i = 0; i < kAnchorCount; ++i) {
        const double anchor = kDomainUpper * static_cast<double>(i) / (kAnchorCount - 1);
        jittered[static_cast<std::size_t>(i)] =
            std::clamp(anchor + jitter_sd * rng.normal(), kDomainLower, kDomainUpper);
    }

    const long m_lo = spec.design == DesignDensity::dense ? 8 : 2;
    const long m_hi = spec.design == DesignDensity::dense ? 12 : 5;
    constexpr int n_locations = kAnchorCount - 2; // interior jittered points s_1..s_49

    std::vector<SparseSample> samples;
    std::vector<std::array<double, 2>> true_scores;
    samples.reserve(static_cast<std::size_t>(spec.n_subjects));
    true_scores.reserve(static_cast<std::size_t>(spec.n_subjects));

    std::vector<int> indices(n_locations);
    const double noise_sd = std::sqrt(spec.noise_variance);
    for (int i = 0; i < spec.n_subjects; ++i) {
        const auto m = static_cast<std::size_t>(rng.uniform_int(m_lo, m_hi));

        std::vector<double> times;
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 1000)
                throw NumericalError("could not draw distinct observation times");
            for (int k = 0; k < n_locations; ++k) indices[static_cast<std::size_t>(k)] = k + 1;
            times.clear();
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t pick =
                    k + static_cast<std::size_t>(rng.uniform_index(
                            static_cast<std::uint64_t>(n_locations) - k));
                std::swap(indices[k], indices[pick]);
                times.push_back(jittered[static_cast<std::size_t>(indices[k])]);
            }
            std::sort(times.begin(), times.end());
            // Boundary clamping can duplicate 0 or 10; redraw the location set.
            if (std::adjacent_find(times.begin(), times.end()) == times.end()) break;
        }

        const double xi1 = draw_one_score(spec.distribution, spec.lambda1, rng);
        const double xi2 = draw_one_score(spec.distribution, spec.lambda2, rng);
        true_scores.push_back({xi1, xi2});

        SparseSample sample;
        sample.subject_id = "s" + std::to_string(i + 1);
        sample.times = times;
        sample.values.reserve(m);
        for (double t : times) {
            const double x = simulation_mean(t) + xi1 * true_phi(spec.eigen_case, 1, t) +
                             xi2 * true_phi(spec.eigen_case, 2, t);
            sample.values.push_back(x + noise_sd * rng.normal());
        }
        samples.push_back(std::move(sample));
    }

    return GeneratedDataset{Dataset(domain, std::move(samples)), std::move(true_scores)};
}

SurfaceEstimate population_kendall_oracle(EigenCase c, ScoreDistribution distribution,
                                          std::size_t n_pairs, const Grid& grid, Rng& rng,
                                          double lambda1, double lambda2) {
    if (n_pairs < 1)
        throw ValidationError("n_pairs must be >= 1");
    const std::size_t g = grid.size();
    Eigen::VectorXd phi1(g), phi2(g), w(g);
    const std::vector<double> weights = grid.trapezoid_weights();
    for (std::size_t i = 0; i < g; ++i) {
        phi1(static_cast<Eigen::Index>(i)) = true_phi(c, 1, grid[i]);
        phi2(static_cast<Eigen::Index>(i)) = true_phi(c, 2, grid[i]);
        w(static_cast<Eigen::Index>(i)) = weights[i];
    }

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g),
                                                static_cast<Eigen::Index>(g));
    std::size_t accepted = 0;
    while (accepted < n_pairs) {
        const double a1 = draw_one_score(distribution, lambda1, rng);
        const double a2 = draw_one_score(distribution, lambda2, rng);
        const double b1 = draw_one_score(distribution, lambda1, rng);
        const double b2 = draw_one_score(distribution, lambda2, rng);
        const Eigen::VectorXd diff = (a1 - b1) * phi1 + (a2 - b2) * phi2;
        const double norm_sq = diff.cwiseAbs2().dot(w);
        if (norm_sq < 1e-12) continue; // probability-zero tie, redraw
        sum.noalias() += (diff * diff.transpose()) / norm_sq;
        ++accepted;
    }
    sum /= static_cast<double>(n_pairs);

    SurfaceEstimate est;
    est.grid = grid;
    est.values = (sum + sum.transpose()) / 2.0;
    return est;
}

namespace {

RunMetrics score_against_truth(const EigenSystem& eigen, const Curve& truth1,
                               const Curve& truth2) {
    RunMetrics m;
    m.imse1 = imse(truth1, eigen.eigenfunctions.at(0));
    m.imse2 = imse(truth2, eigen.eigenfunctions.at(1));
    m.angle1 = angle_degrees(truth1, eigen.eigenfunctions.at(0));
    m.angle2 = angle_degrees(truth2, eigen.eigenfunctions.at(1));
    return m;
}

void normalize_quadrature(Curve& curve) {
    const std::vector<double> w = curve.grid.trapezoid_weights();
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        norm_sq += w[i] * curve.values[i] * curve.values[i];
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : curve.values) v *= inv;
}

void summarize(MethodSummary& summary) {
    const std::size_t n = summary.runs.size();
    if (n == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        summary.mean = {nan, nan, nan, nan};
        summary.std_error = {nan, nan, nan, nan};
        return;
    }
    auto aggregate = [&](auto proj) {
        double sum = 0.0;
        for (const auto& r : summary.runs) sum += proj(r);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : summary.runs) {
            const double d = proj(r) - mean;
            ss += d * d;
        }
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        return std::make_pair(mean, sd / std::sqrt(static_cast<double>(n)));
    };
    std::tie(summary.mean.imse1, summary.std_error.imse1) =
        aggregate([](const RunMetrics& r) { return r.imse1; });
    std::tie(summary.mean.imse2, summary.std_error.imse2) =
        aggregate([](const RunMetrics& r) { return r.imse2; });
    std::tie(summary.mean.angle1, summary.std_error.angle1) =
        aggregate([](const RunMetrics& r) { return r.angle1; });
    std::tie(summary.mean.angle2, summary.std_error.angle2) =
        aggregate([](const RunMetrics& r) { return r.angle2; });
}

struct RunOutcome {
    bool ok = false;
    RunMetrics kfpca;
    RunMetrics baseline;
    std::string error;
};

} // namespace

BenchmarkReport run_benchmark(const SimulationSpec& spec, const BenchOptions& options) {
    spec.validate();
    const Grid grid(Domain(kDomainLower, kDomainUpper), options.fit.grid_size);
    auto [truth1, truth2] = true_eigenfunctions(spec.eigen_case, grid);
    normalize_quadrature(truth1);
    normalize_quadrature(truth2);

    const int n_runs = spec.n_runs;
    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(n_runs));

    auto execute_run = [&](int run) {
        RunOutcome& out = outcomes[static_cast<std::size_t>(run)];
        try {
            Rng rng = Rng(spec.seed).substream(static_cast<std::uint64_t>(run));
            const GeneratedDataset gen = generate_dataset(spec, rng);
            const FitResult kf = fit_kfpca(gen.dataset, options.fit);
            const FitResult bl = fit_baseline(gen.dataset, options.fit);
            out.kfpca = score_against_truth(kf.model.eigen, truth1, truth2);
            out.baseline = score_against_truth(bl.model.eigen, truth1, truth2);
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        for (int run = 0; run < n_runs; ++run) execute_run(run);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (int run = w; run < n_runs; run += jobs) execute_run(run);
            });
        }
        for (auto& t : workers) t.join();
    }

    BenchmarkReport report;
    report.spec = spec;
    for (int run = 0; run < n_runs; ++run) {
        const RunOutcome& out = outcomes[static_cast<std::size_t>(run)];
        if (out.ok) {
            report.kfpca.runs.push_back(out.kfpca);
            report.baseline.runs.push_back(out.baseline);
        } else {
            report.failed_runs.push_back(run);
            report.failure_reasons.push_back(out.error);
        }
    }
    summarize(report.kfpca);
    summarize(report.baseline);
    return report;
}

} // namespace kfpca
