#pragma once

#include <filesystem>
#include <json.hpp>

#include "kfpca/domain.hpp"
#include "kfpca/eigen_analysis.hpp"
#include "kfpca/scores.hpp"
#include "kfpca/simulation.hpp"
#include "kfpca/smoothing.hpp"

namespace kfpca {

using json = nlohmann::json;

json to_json(const Grid& grid);
Grid grid_from_json(const json& j);

json to_json(const Curve& curve);
Curve curve_from_json(const json& j);

// {grid, values, bandwidth, kernel}
json surface_to_json(const SurfaceEstimate& surface, double bandwidth, KernelShape kernel);
SurfaceEstimate surface_from_json(const json& j);

// {grid, eigenvalues, eigenfunctions}
json to_json(const EigenSystem& system);
EigenSystem eigen_system_from_json(const json& j);

json to_json(const SimulationSpec& spec);
SimulationSpec simulation_spec_from_json(const json& j);

json to_json(const FitDiagnostics& diagnostics);

// Everything needed to score and predict later (and to refit on a subset
// with the same smoothing choices).
json model_to_json(const FittedModel& model, KernelShape kernel, std::size_t grid_size);
struct StoredModel {
    FittedModel model;
    KernelShape kernel = KernelShape::epanechnikov;
    std::size_t grid_size = 51;
};
StoredModel model_from_json(const json& j);

json to_json(const BenchmarkReport& report);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

} // namespace kfpca
