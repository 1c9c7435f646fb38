#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/eigen_analysis.hpp"
#include "kfpca/smoothing.hpp"

namespace kfpca {

struct FitDiagnostics {
    long dropped_comparisons = 0;
    double retained_fraction = 0.0;
    double chosen_h = 0.0;
    double chosen_h_mu = 0.0;
    std::vector<GcvTraceEntry> surface_gcv_trace;
    std::vector<GcvTraceEntry> mean_gcv_trace;
    std::vector<std::size_t> mean_fallback_nodes;
};

struct FittedModel {
    std::string method; // "kfpca" or "baseline"
    Curve mean;
    EigenSystem eigen;
    std::size_t truncation = 2; // L
    Bandwidths bandwidths;
    FitDiagnostics diagnostics;
};

struct ScoreEstimate {
    std::string subject_id;
    std::vector<double> scores; // length L, present only when usable
    bool usable = false;        // m_i > L
    bool rank_deficient = false;
};

// Least-squares component scores against the model's eigenfunctions,
// interpolated at the sample's times. The optional weights hook scales each
// residual equation; identity weights reproduce ordinary least squares.
ScoreEstimate estimate_scores(const FittedModel& model, const SparseSample& sample,
                              std::span<const double> weights = {});

// Truncated expansion mean(t) + sum_k score_k * phi_k(t) at the given times.
std::vector<double> predict_trajectory(const FittedModel& model, const ScoreEstimate& scores,
                                       std::span<const double> times);

// N'^-1 sum_i m_i^-1 sum_j (Y_ij - Xhat_i(t_ij))^2 over subjects with m_i > L.
double prediction_mse(const FittedModel& model, const Dataset& dataset);

// Subject-level split; returns (train, test). Deterministic in the seed.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed);

} // namespace kfpca
