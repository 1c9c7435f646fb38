#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/fit.hpp"
#include "kfpca/rng.hpp"

namespace kfpca {

enum class EigenCase { one = 1, two = 2, three = 3, four = 4 };
enum class ScoreDistribution { gaussian, mix_gaussian, ec2, skew_t };
enum class DesignDensity { dense, sparse };

std::string to_string(EigenCase c);
std::string to_string(ScoreDistribution d);
std::string to_string(DesignDensity d);
EigenCase eigen_case_from_int(int value);
ScoreDistribution score_distribution_from_string(const std::string& name);
DesignDensity design_density_from_string(const std::string& name);

// One simulation cell: rank-2 model on [0,10] with mu(t) = t + sin(t).
struct SimulationSpec {
    EigenCase eigen_case = EigenCase::one;
    ScoreDistribution distribution = ScoreDistribution::gaussian;
    DesignDensity design = DesignDensity::dense;
    int n_subjects = 100;
    int n_runs = 100;
    double noise_variance = 0.1;
    double lambda1 = 9.0;
    double lambda2 = 1.5;
    std::uint64_t seed = 0;

    void validate() const;
};

// The case's (phi1, phi2) sampled on the grid. Domain must be [0, 10].
std::pair<Curve, Curve> true_eigenfunctions(EigenCase c, const Grid& grid);

// Pointwise evaluation of the case's eigenfunctions.
double true_phi(EigenCase c, int k, double t);

// Simulation mean mu(t) = t + sin(t).
double simulation_mean(double t);

// n independent draws with mean zero and variance `eigenvalue`:
//   gaussian      N(0, lambda)
//   mix_gaussian  equal mixture of N(+-sqrt(lambda/2), lambda/2)
//   ec2           sqrt(lambda) * t_4 / sqrt(2)   (unit-variance heavy tail)
//   skew_t        sqrt(lambda) * standardized skew-t (alpha=5, nu=5)
std::vector<double> draw_scores(ScoreDistribution distribution, double eigenvalue, std::size_t n,
                                Rng& rng);

struct GeneratedDataset {
    Dataset dataset;
    std::vector<std::array<double, 2>> true_scores; // per subject, hidden truth
};

// Jittered-grid design of the simulation study: 51 anchor points on [0,10],
// Gaussian jitter clamped to the interval, per-subject observation counts
// from {8..12} (dense) or {2..5} (sparse), locations drawn from the interior
// jittered points without replacement.
GeneratedDataset generate_dataset(const SimulationSpec& spec, Rng& rng);

// Monte-Carlo estimate of the population Kendall's tau surface: averages
// {X(s)-X~(s)}{X(t)-X~(t)} / ||X-X~||^2 over noiseless curve pairs, the norm
// taken by trapezoid quadrature on the grid. Output symmetrized.
SurfaceEstimate population_kendall_oracle(EigenCase c, ScoreDistribution distribution,
                                          std::size_t n_pairs, const Grid& grid, Rng& rng,
                                          double lambda1 = 9.0, double lambda2 = 1.5);

struct RunMetrics {
    double imse1 = 0.0;
    double imse2 = 0.0;
    double angle1 = 0.0;
    double angle2 = 0.0;
};

struct MethodSummary {
    std::vector<RunMetrics> runs; // per retained run, run order
    RunMetrics mean;
    RunMetrics std_error;
};

struct BenchmarkReport {
    SimulationSpec spec;
    MethodSummary kfpca;
    MethodSummary baseline;
    std::vector<int> failed_runs;
    std::vector<std::string> failure_reasons;
};

struct BenchOptions {
    FitOptions fit;
    int jobs = 1;
};

// Runs the full cell: per run, generate a dataset from a run-indexed
// substream, fit both methods, score both against the true eigenfunctions.
// Per-run failures are recorded and excluded rather than aborting the sweep.
BenchmarkReport run_benchmark(const SimulationSpec& spec, const BenchOptions& options = {});

} // namespace kfpca
