#include "kfpca/serialization.hpp"

#include <fstream>

#include "kfpca/errors.hpp"

namespace kfpca {

json to_json(const Grid& grid) {
    return {{"lower", grid.domain().lower},
            {"upper", grid.domain().upper},
            {"size", grid.size()}};
}

Grid grid_from_json(const json& j) {
    return Grid(Domain(j.at("lower").get<double>(), j.at("upper").get<double>()),
                j.at("size").get<std::size_t>());
}

json to_json(const Curve& curve) {
    return {{"grid", to_json(curve.grid)}, {"values", curve.values}};
}

Curve curve_from_json(const json& j) {
    return Curve(grid_from_json(j.at("grid")), j.at("values").get<std::vector<double>>());
}

json surface_to_json(const SurfaceEstimate& surface, double bandwidth, KernelShape kernel) {
    json values = json::array();
    for (Eigen::Index a = 0; a < surface.values.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < surface.values.cols(); ++b)
            row.push_back(surface.values(a, b));
        values.push_back(std::move(row));
    }
    return {{"grid", to_json(surface.grid)},
            {"values", std::move(values)},
            {"bandwidth", bandwidth},
            {"kernel", to_string(kernel)}};
}

SurfaceEstimate surface_from_json(const json& j) {
    SurfaceEstimate surface;
    surface.grid = grid_from_json(j.at("grid"));
    const auto& rows = j.at("values");
    const auto g = static_cast<Eigen::Index>(surface.grid.size());
    if (static_cast<Eigen::Index>(rows.size()) != g)
        throw ValidationError("surface values do not match the grid");
    surface.values.resize(g, g);
    for (Eigen::Index a = 0; a < g; ++a) {
        const auto& row = rows[static_cast<std::size_t>(a)];
        if (static_cast<Eigen::Index>(row.size()) != g)
            throw ValidationError("surface row length mismatch");
        for (Eigen::Index b = 0; b < g; ++b)
            surface.values(a, b) = row[static_cast<std::size_t>(b)].get<double>();
    }
    return surface;
}

json to_json(const EigenSystem& system) {
    json funcs = json::array();
    for (const auto& f : system.eigenfunctions) funcs.push_back(f.values);
    return {{"grid", to_json(system.grid)},
            {"eigenvalues", system.eigenvalues},
            {"eigenfunctions", std::move(funcs)},
            {"rank_deficient", system.rank_deficient}};
}

EigenSystem eigen_system_from_json(const json& j) {
    EigenSystem system;
    system.grid = grid_from_json(j.at("grid"));
    system.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    for (const auto& values : j.at("eigenfunctions"))
        system.eigenfunctions.emplace_back(system.grid, values.get<std::vector<double>>());
    system.rank_deficient = j.value("rank_deficient", false);
    return system;
}

json to_json(const SimulationSpec& spec) {
    return {{"case", static_cast<int>(spec.eigen_case)},
            {"distribution", to_string(spec.distribution)},
            {"design", to_string(spec.design)},
            {"n_subjects", spec.n_subjects},
            {"n_runs", spec.n_runs},
            {"noise_variance", spec.noise_variance},
            {"lambda1", spec.lambda1},
            {"lambda2", spec.lambda2},
            {"seed", spec.seed}};
}

SimulationSpec simulation_spec_from_json(const json& j) {
    SimulationSpec spec;
    spec.eigen_case = eigen_case_from_int(j.at("case").get<int>());
    spec.distribution = score_distribution_from_string(j.at("distribution").get<std::string>());
    spec.design = design_density_from_string(j.at("design").get<std::string>());
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.n_runs = j.value("n_runs", spec.n_runs);
    spec.noise_variance = j.value("noise_variance", spec.noise_variance);
    spec.lambda1 = j.value("lambda1", spec.lambda1);
    spec.lambda2 = j.value("lambda2", spec.lambda2);
    spec.seed = j.value("seed", spec.seed);
    spec.validate();
    return spec;
}

namespace {

json trace_to_json(const std::vector<GcvTraceEntry>& trace) {
    json out = json::array();
    for (const auto& e : trace)
        out.push_back({{"bandwidth", e.bandwidth},
                       {"rss", e.rss},
                       {"df", e.df},
                       {"score", e.score},
                       {"feasible", e.feasible},
                       {"note", e.note}});
    return out;
}

} // namespace

json to_json(const FitDiagnostics& diagnostics) {
    return {{"dropped_comparisons", diagnostics.dropped_comparisons},
            {"retained_fraction", diagnostics.retained_fraction},
            {"chosen_h", diagnostics.chosen_h},
            {"chosen_h_mu", diagnostics.chosen_h_mu},
            {"surface_gcv_trace", trace_to_json(diagnostics.surface_gcv_trace)},
            {"mean_gcv_trace", trace_to_json(diagnostics.mean_gcv_trace)},
            {"mean_fallback_nodes", diagnostics.mean_fallback_nodes}};
}

json model_to_json(const FittedModel& model, KernelShape kernel, std::size_t grid_size) {
    return {{"method", model.method},
            {"mean", to_json(model.mean)},
            {"eigen", to_json(model.eigen)},
            {"truncation", model.truncation},
            {"bandwidths",
             {{"h_prime", model.bandwidths.h_prime},
              {"h", model.bandwidths.h},
              {"h_mu", model.bandwidths.h_mu}}},
            {"kernel", to_string(kernel)},
            {"grid_size", grid_size}};
}

StoredModel model_from_json(const json& j) {
    StoredModel stored;
    stored.model.method = j.at("method").get<std::string>();
    stored.model.mean = curve_from_json(j.at("mean"));
    stored.model.eigen = eigen_system_from_json(j.at("eigen"));
    stored.model.truncation = j.at("truncation").get<std::size_t>();
    const auto& bw = j.at("bandwidths");
    stored.model.bandwidths.h_prime = bw.at("h_prime").get<double>();
    stored.model.bandwidths.h = bw.at("h").get<double>();
    stored.model.bandwidths.h_mu = bw.at("h_mu").get<double>();
    stored.kernel = kernel_shape_from_string(j.at("kernel").get<std::string>());
    stored.grid_size = j.at("grid_size").get<std::size_t>();
    return stored;
}

namespace {

json metrics_to_json(const RunMetrics& m) {
    return {{"imse1", m.imse1}, {"imse2", m.imse2}, {"angle1", m.angle1}, {"angle2", m.angle2}};
}

json summary_to_json(const MethodSummary& s) {
    json runs = json::array();
    for (const auto& r : s.runs) runs.push_back(metrics_to_json(r));
    return {{"runs", std::move(runs)},
            {"mean", metrics_to_json(s.mean)},
            {"std_error", metrics_to_json(s.std_error)}};
}

} // namespace

json to_json(const BenchmarkReport& report) {
    return {{"spec", to_json(report.spec)},
            {"kfpca", summary_to_json(report.kfpca)},
            {"baseline", summary_to_json(report.baseline)},
            {"failed_runs", report.failed_runs},
            {"failure_reasons", report.failure_reasons}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON in '") + path.string() + "': " + e.what(), 0);
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

} // namespace kfpca
