#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/scores.hpp"
#include "kfpca/smoothing.hpp"

namespace kfpca {

// Long format: header "subject_id,time,value", one observation per row.
// Rows are grouped by subject (first-appearance order) and sorted by time
// within subject. Without an explicit domain, [min time, max time] is used.
Dataset read_long_csv(const std::filesystem::path& path,
                      std::optional<Domain> domain = std::nullopt);

// Emits >= 15 significant digits so a round-trip reproduces the dataset.
void write_long_csv(const Dataset& dataset, const std::filesystem::path& path);

// First row: grid points. Following rows: matrix rows.
void write_surface_csv(const SurfaceEstimate& surface, const std::filesystem::path& path);

// Header "s,t,value,subject_index".
void write_points_csv(std::span<const RawSurfacePoint> points, const std::filesystem::path& path);

// Header "time,value".
void write_curve_csv(const Curve& curve, const std::filesystem::path& path);

// Header "subject_id,score_1..score_L,usable".
void write_scores_csv(std::span<const ScoreEstimate> scores, std::size_t truncation,
                      const std::filesystem::path& path);

struct PredictionRow {
    std::string subject_id;
    double time = 0.0;
    double predicted = 0.0;
};

// Header "subject_id,time,predicted".
void write_predictions_csv(std::span<const PredictionRow> rows,
                           const std::filesystem::path& path);

} // namespace kfpca
