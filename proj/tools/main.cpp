#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kfpca/csv_io.hpp"
#include "kfpca/errors.hpp"
#include "kfpca/fit.hpp"
#include "kfpca/kendall.hpp"
#include "kfpca/serialization.hpp"
#include "kfpca/simulation.hpp"

namespace fs = std::filesystem;
using kfpca::json;

namespace {

// Config/usage problems exit with code 1; they are distinct from data (2)
// and numerical (3) failures raised by the library.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit_error(const std::string& type, const std::string& message, int code) {
    json err = {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
    std::cerr << err.dump() << std::endl;
}

// Shared flags and config-file handling. Flag values win over config keys,
// which win over defaults.
struct CommonOptions {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
    std::optional<int> jobs;
    std::optional<std::string> out;
    bool dump_config = false;

    json config; // loaded file, if any

    void load() {
        if (config_path) {
            try {
                config = kfpca::read_json_file(*config_path);
            } catch (const kfpca::DataError& e) {
                throw UsageError(e.what());
            }
            if (!config.is_object())
                throw UsageError("config file must hold a JSON object");
        }
    }

    template <typename T>
    T resolve(const std::optional<T>& flag, const char* key, T fallback) const {
        if (flag) return *flag;
        if (config.contains(key)) {
            try {
                return config.at(key).get<T>();
            } catch (const json::exception& e) {
                throw UsageError(std::string("config key '") + key + "': " + e.what());
            }
        }
        return fallback;
    }

    std::uint64_t resolve_seed() const { return resolve<std::uint64_t>(seed, "seed", 0); }
    std::size_t resolve_grid() const { return resolve<std::size_t>(grid, "grid", 51); }
    int resolve_jobs() const { return resolve<int>(jobs, "jobs", 1); }
    fs::path resolve_out() const {
        return fs::path(resolve<std::string>(out, "out", "."));
    }
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file; flags override its keys");
    cmd->add_option("--seed", opts.seed, "root RNG seed");
    cmd->add_option("--grid", opts.grid, "grid size G (default 51)");
    cmd->add_option("--jobs", opts.jobs, "parallel workers (default 1)");
    cmd->add_option("--out", opts.out, "output directory (default .)");
    cmd->add_flag("--dump-config", opts.dump_config, "print the resolved configuration");
}

fs::path prepare_out_dir(const CommonOptions& opts) {
    const fs::path dir = opts.resolve_out();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw kfpca::IoError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw UsageError("cannot parse number '" + tok + "' in list");
        }
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (out.empty()) throw UsageError("empty list");
    return out;
}

std::optional<kfpca::Domain> resolve_domain(const CommonOptions& common,
                                            const std::optional<std::string>& flag) {
    std::string text = common.resolve<std::string>(flag, "domain", "");
    if (text.empty()) return std::nullopt;
    const auto parts = parse_double_list(text);
    if (parts.size() != 2)
        throw UsageError("--domain expects 'lower,upper'");
    try {
        return kfpca::Domain(parts[0], parts[1]);
    } catch (const kfpca::ValidationError& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    CommonOptions common;
    std::optional<int> eigen_case;
    std::optional<std::string> distribution;
    std::optional<std::string> design;
    std::optional<int> n_subjects;
    std::optional<double> noise_variance;
    std::optional<double> lambda1, lambda2;
};

kfpca::SimulationSpec resolve_spec(const CommonOptions& common,
                                   const std::optional<int>& eigen_case,
                                   const std::optional<std::string>& distribution,
                                   const std::optional<std::string>& design,
                                   const std::optional<int>& n_subjects,
                                   const std::optional<int>& n_runs,
                                   const std::optional<double>& noise_variance,
                                   const std::optional<double>& lambda1,
                                   const std::optional<double>& lambda2) {
    kfpca::SimulationSpec spec;
    try {
        spec.eigen_case = kfpca::eigen_case_from_int(common.resolve<int>(eigen_case, "case", 1));
        spec.distribution = kfpca::score_distribution_from_string(
            common.resolve<std::string>(distribution, "distribution", "gaussian"));
        spec.design = kfpca::design_density_from_string(
            common.resolve<std::string>(design, "design", "dense"));
        spec.n_subjects = common.resolve<int>(n_subjects, "n_subjects", 100);
        spec.n_runs = common.resolve<int>(n_runs, "n_runs", 100);
        spec.noise_variance = common.resolve<double>(noise_variance, "noise_variance", 0.1);
        spec.lambda1 = common.resolve<double>(lambda1, "lambda1", 9.0);
        spec.lambda2 = common.resolve<double>(lambda2, "lambda2", 1.5);
        spec.seed = common.resolve_seed();
        spec.validate();
    } catch (const kfpca::ValidationError& e) {
        throw UsageError(e.what());
    }
    return spec;
}

int cmd_simulate(SimulateOptions& opts) {
    opts.common.load();
    const kfpca::SimulationSpec spec =
        resolve_spec(opts.common, opts.eigen_case, opts.distribution, opts.design,
                     opts.n_subjects, std::optional<int>(1), opts.noise_variance, opts.lambda1,
                     opts.lambda2);
    const std::size_t grid_size = opts.common.resolve_grid();
    const fs::path out_dir = prepare_out_dir(opts.common);

    json resolved = kfpca::to_json(spec);
    resolved["grid"] = grid_size;
    resolved["out"] = out_dir.string();
    if (opts.common.dump_config) std::cout << resolved.dump(2) << std::endl;

    // The emitted dataset is run 0 of the seed, matching the benchmark's
    // first run for the same spec.
    kfpca::Rng rng = kfpca::Rng(spec.seed).substream(0);
    const kfpca::GeneratedDataset gen = kfpca::generate_dataset(spec, rng);
    kfpca::write_long_csv(gen.dataset, out_dir / "dataset.csv");

    const kfpca::Grid grid(gen.dataset.domain(), grid_size);
    auto [phi1, phi2] = kfpca::true_eigenfunctions(spec.eigen_case, grid);
    json truth = {{"spec", kfpca::to_json(spec)},
                  {"grid", kfpca::to_json(grid)},
                  {"phi1", phi1.values},
                  {"phi2", phi2.values},
                  {"mean", [&] {
                       std::vector<double> mu(grid.size());
                       for (std::size_t i = 0; i < grid.size(); ++i)
                           mu[i] = kfpca::simulation_mean(grid[i]);
                       return mu;
                   }()}};
    json scores = json::array();
    for (std::size_t i = 0; i < gen.true_scores.size(); ++i)
        scores.push_back({{"subject_id", gen.dataset[i].subject_id},
                          {"xi1", gen.true_scores[i][0]},
                          {"xi2", gen.true_scores[i][1]}});
    truth["true_scores"] = std::move(scores);
    kfpca::write_json_file(truth, out_dir / "truth.json");

    std::cout << "wrote " << (out_dir / "dataset.csv").string() << " ("
              << gen.dataset.size() << " subjects, " << gen.dataset.total_observations()
              << " observations) and truth.json" << std::endl;
    return 0;
}

// --------------------------------------------------------------------- fit

struct FitCmdOptions {
    CommonOptions common;
    std::optional<std::string> input;
    std::optional<double> h_prime;
    std::optional<double> h_surface;
    std::optional<double> h_mean;
    std::optional<std::string> h_candidates;
    std::optional<std::string> mean_candidates;
    std::optional<int> components;
    std::optional<int> truncation;
    std::optional<std::string> kernel;
    std::optional<std::string> domain;
    bool baseline = false;
};

kfpca::FitOptions resolve_fit_options(const CommonOptions& common,
                                      const FitCmdOptions& cmd_opts) {
    kfpca::FitOptions fit;
    try {
        fit.grid_size = common.resolve_grid();
        fit.n_components = static_cast<std::size_t>(
            common.resolve<int>(cmd_opts.components, "components", 2));
        fit.truncation =
            static_cast<std::size_t>(common.resolve<int>(cmd_opts.truncation, "L", 2));
        fit.kernel = kfpca::Kernel(kfpca::kernel_shape_from_string(
            common.resolve<std::string>(cmd_opts.kernel, "kernel", "epanechnikov")));
        if (cmd_opts.h_prime || common.config.contains("h_prime"))
            fit.h_prime = common.resolve<double>(cmd_opts.h_prime, "h_prime", 0.0);
        if (cmd_opts.h_surface || common.config.contains("h"))
            fit.h_surface = common.resolve<double>(cmd_opts.h_surface, "h", 0.0);
        if (cmd_opts.h_mean || common.config.contains("h_mu"))
            fit.h_mean = common.resolve<double>(cmd_opts.h_mean, "h_mu", 0.0);
        if (cmd_opts.h_candidates)
            fit.surface_candidates = parse_double_list(*cmd_opts.h_candidates);
        else if (common.config.contains("h_candidates"))
            fit.surface_candidates = common.config.at("h_candidates").get<std::vector<double>>();
        if (cmd_opts.mean_candidates)
            fit.mean_candidates = parse_double_list(*cmd_opts.mean_candidates);
        else if (common.config.contains("mean_candidates"))
            fit.mean_candidates = common.config.at("mean_candidates").get<std::vector<double>>();
    } catch (const kfpca::ValidationError& e) {
        throw UsageError(e.what());
    }
    return fit;
}

void write_fit_outputs(const kfpca::FitResult& result, const kfpca::FitOptions& fit,
                       const fs::path& out_dir, const std::string& prefix) {
    kfpca::write_surface_csv(result.surface, out_dir / (prefix + "surface.csv"));
    kfpca::write_json_file(
        kfpca::surface_to_json(result.surface, result.model.bandwidths.h, fit.kernel.shape()),
        out_dir / (prefix + "surface.json"));
    kfpca::write_json_file(kfpca::to_json(result.model.eigen),
                           out_dir / (prefix + "eigensystem.json"));
    for (std::size_t k = 0; k < result.model.eigen.eigenfunctions.size(); ++k)
        kfpca::write_curve_csv(result.model.eigen.eigenfunctions[k],
                               out_dir /
                                   (prefix + "eigenfunction_" + std::to_string(k + 1) + ".csv"));
    kfpca::write_curve_csv(result.model.mean, out_dir / (prefix + "mean.csv"));
    kfpca::write_json_file(kfpca::model_to_json(result.model, fit.kernel.shape(), fit.grid_size),
                           out_dir / (prefix + "model.json"));
    kfpca::write_json_file(kfpca::to_json(result.model.diagnostics),
                           out_dir / (prefix + "diagnostics.json"));
}

int cmd_fit(FitCmdOptions& opts) {
    opts.common.load();
    const std::string input =
        opts.common.resolve<std::string>(opts.input, "input", "");
    if (input.empty()) throw UsageError("fit requires --input CSV");
    const kfpca::FitOptions fit = resolve_fit_options(opts.common, opts);
    const fs::path out_dir = prepare_out_dir(opts.common);

    if (opts.common.dump_config) {
        json resolved = {{"input", input},
                         {"grid", fit.grid_size},
                         {"components", fit.n_components},
                         {"L", fit.truncation},
                         {"kernel", kfpca::to_string(fit.kernel.shape())},
                         {"baseline", opts.baseline},
                         {"out", out_dir.string()}};
        if (fit.h_prime) resolved["h_prime"] = *fit.h_prime;
        if (fit.h_surface) resolved["h"] = *fit.h_surface;
        if (fit.h_mean) resolved["h_mu"] = *fit.h_mean;
        std::cout << resolved.dump(2) << std::endl;
    }

    const kfpca::Dataset dataset = kfpca::read_long_csv(input, resolve_domain(opts.common, opts.domain));
    const kfpca::FitResult kf = kfpca::fit_kfpca(dataset, fit);
    write_fit_outputs(kf, fit, out_dir, "");
    std::cout << "kfpca fit: h'=" << kf.model.bandwidths.h_prime
              << " h=" << kf.model.bandwidths.h << " h_mu=" << kf.model.bandwidths.h_mu
              << " dropped=" << kf.model.diagnostics.dropped_comparisons << std::endl;

    if (opts.baseline) {
        const kfpca::FitResult bl = kfpca::fit_baseline(dataset, fit);
        write_fit_outputs(bl, fit, out_dir, "baseline_");
        std::cout << "baseline fit: h=" << bl.model.bandwidths.h
                  << " h_mu=" << bl.model.bandwidths.h_mu << std::endl;
    }
    return 0;
}

// ----------------------------------------------------------------- predict

struct PredictOptions {
    CommonOptions common;
    std::optional<std::string> input;
    std::optional<std::string> model_path;
    std::optional<int> truncation;
    std::optional<std::string> split_raw; // "--split" alone means fraction 0.2
    std::optional<std::uint64_t> split_seed;
    std::optional<std::string> domain;
    bool do_split = false;

    std::optional<double> split_fraction() const {
        if (!split_raw) return std::nullopt;
        if (split_raw->empty()) return 0.2;
        try {
            return std::stod(*split_raw);
        } catch (const std::exception&) {
            throw UsageError("cannot parse --split fraction '" + *split_raw + "'");
        }
    }
};

kfpca::FittedModel refit_on(const kfpca::Dataset& dataset, const kfpca::StoredModel& stored) {
    kfpca::FitOptions fit;
    fit.grid_size = stored.grid_size;
    fit.n_components = stored.model.eigen.eigenfunctions.size();
    fit.truncation = stored.model.truncation;
    fit.kernel = kfpca::Kernel(stored.kernel);
    fit.h_prime = stored.model.bandwidths.h_prime;
    fit.h_surface = stored.model.bandwidths.h;
    fit.h_mean = stored.model.bandwidths.h_mu;
    return (stored.model.method == "baseline" ? kfpca::fit_baseline(dataset, fit)
                                              : kfpca::fit_kfpca(dataset, fit))
        .model;
}

json evaluate_predictions(const kfpca::FittedModel& model, const kfpca::Dataset& dataset,
                          std::vector<kfpca::ScoreEstimate>& scores,
                          std::vector<kfpca::PredictionRow>& rows) {
    for (const auto& sample : dataset.samples()) {
        kfpca::ScoreEstimate est = kfpca::estimate_scores(model, sample);
        if (est.usable) {
            const std::vector<double> pred =
                kfpca::predict_trajectory(model, est, sample.times);
            for (std::size_t j = 0; j < sample.size(); ++j)
                rows.push_back({sample.subject_id, sample.times[j], pred[j]});
        }
        scores.push_back(std::move(est));
    }
    return {{"mse", kfpca::prediction_mse(model, dataset)},
            {"n_subjects", dataset.size()}};
}

int cmd_predict(PredictOptions& opts) {
    opts.common.load();
    const std::string input = opts.common.resolve<std::string>(opts.input, "input", "");
    const std::string model_path =
        opts.common.resolve<std::string>(opts.model_path, "model", "");
    if (input.empty() || model_path.empty())
        throw UsageError("predict requires --input CSV and --model JSON");
    const fs::path out_dir = prepare_out_dir(opts.common);

    kfpca::StoredModel stored = kfpca::model_from_json(kfpca::read_json_file(model_path));
    if (opts.truncation || opts.common.config.contains("L"))
        stored.model.truncation =
            static_cast<std::size_t>(opts.common.resolve<int>(opts.truncation, "L", 2));

    const bool split_requested =
        opts.do_split || opts.split_raw.has_value() || opts.common.config.contains("split");
    const double split_fraction =
        opts.common.resolve<double>(opts.split_fraction(), "split", 0.2);
    const std::uint64_t split_seed =
        opts.common.resolve<std::uint64_t>(opts.split_seed, "split_seed", 0);

    if (opts.common.dump_config) {
        json resolved = {{"input", input},
                         {"model", model_path},
                         {"L", stored.model.truncation},
                         {"out", out_dir.string()}};
        if (split_requested) {
            resolved["split"] = split_fraction;
            resolved["split_seed"] = split_seed;
        }
        std::cout << resolved.dump(2) << std::endl;
    }

    std::optional<kfpca::Domain> domain = resolve_domain(opts.common, opts.domain);
    if (!domain) domain = stored.model.mean.grid.domain();
    const kfpca::Dataset dataset = kfpca::read_long_csv(input, domain);
    std::vector<kfpca::ScoreEstimate> scores;
    std::vector<kfpca::PredictionRow> rows;
    json mse;

    if (split_requested) {
        // Section-5 style protocol: refit on the training subjects with the
        // stored smoothing choices, then score both partitions.
        const auto [train, test] = kfpca::train_test_split(dataset, split_fraction, split_seed);
        const kfpca::FittedModel model = refit_on(train, stored);
        mse["train"] = evaluate_predictions(model, train, scores, rows);
        mse["test"] = evaluate_predictions(model, test, scores, rows);
        mse["split"] = split_fraction;
        mse["split_seed"] = split_seed;
    } else {
        mse["overall"] = evaluate_predictions(stored.model, dataset, scores, rows);
    }

    kfpca::write_scores_csv(scores, stored.model.truncation, out_dir / "scores.csv");
    kfpca::write_predictions_csv(rows, out_dir / "predictions.csv");
    kfpca::write_json_file(mse, out_dir / "mse.json");
    std::cout << mse.dump(2) << std::endl;
    return 0;
}

// ------------------------------------------------------------------- bench

struct BenchOptions {
    CommonOptions common;
    std::optional<std::string> cases;
    std::optional<std::string> distributions;
    std::optional<std::string> designs;
    std::optional<int> n_subjects;
    std::optional<int> n_runs;
    std::optional<double> noise_variance;
};

std::string format_cell(const kfpca::SimulationSpec& spec) {
    return "case" + kfpca::to_string(spec.eigen_case) + "_" +
           kfpca::to_string(spec.distribution) + "_" + kfpca::to_string(spec.design);
}

void append_flat_rows(std::ostream& out, const kfpca::SimulationSpec& spec,
                      const std::string& method, const kfpca::MethodSummary& summary) {
    const char* metric_names[4] = {"imse1", "imse2", "angle1", "angle2"};
    for (std::size_t run = 0; run < summary.runs.size(); ++run) {
        const auto& r = summary.runs[run];
        const double values[4] = {r.imse1, r.imse2, r.angle1, r.angle2};
        for (int m = 0; m < 4; ++m) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", values[m]);
            out << static_cast<int>(spec.eigen_case) << ',' << kfpca::to_string(spec.distribution)
                << ',' << kfpca::to_string(spec.design) << ',' << run << ',' << method << ','
                << metric_names[m] << ',' << buf << '\n';
        }
    }
}

void append_summary_rows(std::ostream& out, const kfpca::SimulationSpec& spec,
                         const std::string& method, const kfpca::MethodSummary& summary) {
    const char* metric_names[4] = {"imse1", "imse2", "angle1", "angle2"};
    const double means[4] = {summary.mean.imse1, summary.mean.imse2, summary.mean.angle1,
                             summary.mean.angle2};
    const double ses[4] = {summary.std_error.imse1, summary.std_error.imse2,
                           summary.std_error.angle1, summary.std_error.angle2};
    for (int m = 0; m < 4; ++m) {
        char mean_buf[32], se_buf[32];
        std::snprintf(mean_buf, sizeof(mean_buf), "%.17g", means[m]);
        std::snprintf(se_buf, sizeof(se_buf), "%.17g", ses[m]);
        out << static_cast<int>(spec.eigen_case) << ',' << kfpca::to_string(spec.distribution)
            << ',' << kfpca::to_string(spec.design) << ',' << method << ',' << metric_names[m]
            << ',' << mean_buf << ',' << se_buf << '\n';
    }
}

int cmd_bench(BenchOptions& opts) {
    opts.common.load();

    std::vector<int> cases;
    std::vector<std::string> distributions, designs;
    try {
        if (opts.cases)
            for (const auto& c : parse_string_list(*opts.cases)) cases.push_back(std::stoi(c));
        else if (opts.common.config.contains("cases"))
            cases = opts.common.config.at("cases").get<std::vector<int>>();
        else
            cases = {opts.common.resolve<int>(std::nullopt, "case", 1)};
        if (opts.distributions)
            distributions = parse_string_list(*opts.distributions);
        else if (opts.common.config.contains("distributions"))
            distributions = opts.common.config.at("distributions").get<std::vector<std::string>>();
        else
            distributions = {
                opts.common.resolve<std::string>(std::nullopt, "distribution", "gaussian")};
        if (opts.designs)
            designs = parse_string_list(*opts.designs);
        else if (opts.common.config.contains("designs"))
            designs = opts.common.config.at("designs").get<std::vector<std::string>>();
        else
            designs = {opts.common.resolve<std::string>(std::nullopt, "design", "dense")};
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot resolve the benchmark matrix: ") + e.what());
    }

    const fs::path out_dir = prepare_out_dir(opts.common);
    kfpca::BenchOptions bench;
    bench.fit.grid_size = opts.common.resolve_grid();
    bench.jobs = opts.common.resolve_jobs();

    std::ofstream flat(out_dir / "bench_results.csv");
    std::ofstream summary(out_dir / "bench_summary.csv");
    if (!flat || !summary)
        throw kfpca::IoError("cannot write benchmark CSVs in '" + out_dir.string() + "'");
    flat << "case,distribution,design,run,method,metric,value\n";
    summary << "case,distribution,design,method,metric,mean,std_error\n";

    for (int c : cases) {
        for (const auto& dist : distributions) {
            for (const auto& design : designs) {
                const kfpca::SimulationSpec spec = resolve_spec(
                    opts.common, c, dist, design, opts.n_subjects, opts.n_runs,
                    opts.noise_variance, std::nullopt, std::nullopt);
                if (opts.common.dump_config)
                    std::cout << kfpca::to_json(spec).dump(2) << std::endl;

                const kfpca::BenchmarkReport report = kfpca::run_benchmark(spec, bench);
                kfpca::write_json_file(
                    kfpca::to_json(report),
                    out_dir / ("bench_report_" + format_cell(spec) + ".json"));
                append_flat_rows(flat, spec, "kfpca", report.kfpca);
                append_flat_rows(flat, spec, "baseline", report.baseline);
                append_summary_rows(summary, spec, "kfpca", report.kfpca);
                append_summary_rows(summary, spec, "baseline", report.baseline);

                std::cout << format_cell(spec) << ": kfpca angle1=" << report.kfpca.mean.angle1
                          << " baseline angle1=" << report.baseline.mean.angle1
                          << " (failures: " << report.failed_runs.size() << ")" << std::endl;
            }
        }
    }
    if (!flat || !summary)
        throw kfpca::IoError("write failed for benchmark CSVs");
    return 0;
}

// --------------------------------------------------------- verify-theorem1

struct VerifyOptions {
    CommonOptions common;
    std::optional<int> eigen_case;
    std::optional<std::string> distributions;
    std::optional<std::size_t> n_pairs;
};

int cmd_verify_theorem1(VerifyOptions& opts) {
    opts.common.load();
    kfpca::EigenCase eigen_case;
    std::vector<std::string> distributions;
    try {
        eigen_case =
            kfpca::eigen_case_from_int(opts.common.resolve<int>(opts.eigen_case, "case", 1));
        if (opts.distributions)
            distributions = parse_string_list(*opts.distributions);
        else if (opts.common.config.contains("distributions"))
            distributions = opts.common.config.at("distributions").get<std::vector<std::string>>();
        else
            distributions = {"gaussian", "mix_gaussian", "ec2", "skew_t"};
    } catch (const kfpca::ValidationError& e) {
        throw UsageError(e.what());
    }
    const std::size_t n_pairs = opts.common.resolve<std::size_t>(opts.n_pairs, "n_pairs", 20000);
    const std::size_t grid_size = opts.common.resolve_grid();
    const std::uint64_t seed = opts.common.resolve_seed();
    const fs::path out_dir = prepare_out_dir(opts.common);

    if (opts.common.dump_config) {
        json resolved = {{"case", static_cast<int>(eigen_case)},
                         {"distributions", distributions},
                         {"n_pairs", n_pairs},
                         {"grid", grid_size},
                         {"seed", seed},
                         {"out", out_dir.string()}};
        std::cout << resolved.dump(2) << std::endl;
    }

    const kfpca::Grid grid(kfpca::Domain(0.0, 10.0), grid_size);
    auto [phi1, phi2] = kfpca::true_eigenfunctions(eigen_case, grid);
    // Quadrature-normalize the analytic truth for the metric contracts.
    for (kfpca::Curve* curve : {&phi1, &phi2}) {
        const auto w = grid.trapezoid_weights();
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            norm_sq += w[i] * curve->values[i] * curve->values[i];
        for (double& v : curve->values) v /= std::sqrt(norm_sq);
    }

    json per_dist = json::array();
    std::ofstream csv(out_dir / "theorem1.csv");
    if (!csv) throw kfpca::IoError("cannot write theorem1.csv");
    csv << "distribution,angle1_deg,angle2_deg,eigenvalue_order_ok,low_confidence\n";

    const bool low_confidence = n_pairs < 1000;
    for (const auto& name : distributions) {
        const kfpca::ScoreDistribution dist = kfpca::score_distribution_from_string(name);
        kfpca::Rng rng = kfpca::Rng(seed).substream("theorem1").substream(name);
        const kfpca::SurfaceEstimate oracle =
            kfpca::population_kendall_oracle(eigen_case, dist, n_pairs, grid, rng);
        const kfpca::EigenSystem eigen = kfpca::eigendecompose(oracle, 2);
        const double a1 = kfpca::angle_degrees(phi1, eigen.eigenfunctions[0]);
        const double a2 = kfpca::angle_degrees(phi2, eigen.eigenfunctions[1]);
        const bool order_ok = eigen.eigenvalues[0] > eigen.eigenvalues[1];
        per_dist.push_back({{"distribution", name},
                            {"angle1_deg", a1},
                            {"angle2_deg", a2},
                            {"eigenvalue_order_ok", order_ok},
                            {"eigenvalues", eigen.eigenvalues},
                            {"low_confidence", low_confidence}});
        csv << name << ',' << a1 << ',' << a2 << ',' << (order_ok ? "true" : "false") << ','
            << (low_confidence ? "true" : "false") << '\n';
        std::cout << name << ": angle1=" << a1 << " deg, angle2=" << a2
                  << " deg, order_ok=" << (order_ok ? "true" : "false") << std::endl;
    }
    json out = {{"case", static_cast<int>(eigen_case)},
                {"n_pairs", n_pairs},
                {"seed", seed},
                {"results", std::move(per_dist)}};
    kfpca::write_json_file(out, out_dir / "theorem1.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kendall functional principal component analysis for sparse longitudinal data"};
    app.require_subcommand(1);

    SimulateOptions sim_opts;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    add_common(sim, sim_opts.common);
    sim->add_option("--case", sim_opts.eigen_case, "eigenfunction case 1..4");
    sim->add_option("--distribution", sim_opts.distribution,
                    "gaussian|mix_gaussian|ec2|skew_t");
    sim->add_option("--design", sim_opts.design, "dense|sparse");
    sim->add_option("--n-subjects", sim_opts.n_subjects, "number of subjects");
    sim->add_option("--noise-variance", sim_opts.noise_variance, "measurement error variance");
    sim->add_option("--lambda1", sim_opts.lambda1, "first eigenvalue");
    sim->add_option("--lambda2", sim_opts.lambda2, "second eigenvalue");

    FitCmdOptions fit_opts;
    auto* fit = app.add_subcommand("fit", "fit the Kendall FPCA model to a dataset");
    add_common(fit, fit_opts.common);
    fit->add_option("--input", fit_opts.input, "long-format CSV dataset");
    fit->add_option("--h-prime", fit_opts.h_prime, "donor pre-smoothing bandwidth");
    fit->add_option("--h-surface", fit_opts.h_surface, "surface bandwidth (skips GCV)");
    fit->add_option("--h-mu", fit_opts.h_mean, "mean bandwidth (skips GCV)");
    fit->add_option("--h-candidates", fit_opts.h_candidates,
                    "comma list of GCV candidates for the surface");
    fit->add_option("--mean-candidates", fit_opts.mean_candidates,
                    "comma list of GCV candidates for the mean");
    fit->add_option("--components", fit_opts.components, "eigenpairs to keep (default 2)");
    fit->add_option("--L", fit_opts.truncation, "prediction truncation (default 2)");
    fit->add_option("--kernel", fit_opts.kernel, "epanechnikov|quartic|triangular");
    fit->add_option("--domain", fit_opts.domain, "explicit domain 'lower,upper' (default: inferred)");
    fit->add_flag("--baseline", fit_opts.baseline, "also fit the covariance baseline");

    PredictOptions pred_opts;
    auto* pred = app.add_subcommand("predict", "estimate scores and predict trajectories");
    add_common(pred, pred_opts.common);
    pred->add_option("--input", pred_opts.input, "long-format CSV dataset");
    pred->add_option("--model", pred_opts.model_path, "model.json from 'fit'");
    pred->add_option("--L", pred_opts.truncation, "truncation (default: model's)");
    pred->add_option("--split", pred_opts.split_raw,
                     "train/test protocol with this test fraction (default 0.2)")
        ->expected(0, 1);
    pred->add_option("--split-seed", pred_opts.split_seed, "split RNG seed");
    pred->add_option("--domain", pred_opts.domain, "explicit domain 'lower,upper' (default: the model's)");

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "run the simulation benchmark matrix");
    add_common(bench, bench_opts.common);
    bench->add_option("--cases", bench_opts.cases, "comma list of cases (default: 1)");
    bench->add_option("--distributions", bench_opts.distributions,
                      "comma list of distributions (default: gaussian)");
    bench->add_option("--designs", bench_opts.designs, "comma list of designs (default: dense)");
    bench->add_option("--n-subjects", bench_opts.n_subjects, "subjects per run");
    bench->add_option("--n-runs", bench_opts.n_runs, "simulation runs per cell");
    bench->add_option("--noise-variance", bench_opts.noise_variance, "error variance");

    VerifyOptions verify_opts;
    auto* verify = app.add_subcommand("verify-theorem1",
                                      "Monte-Carlo check that the population Kendall surface "
                                      "shares the model's eigenfunctions");
    add_common(verify, verify_opts.common);
    verify->add_option("--case", verify_opts.eigen_case, "eigenfunction case 1..4");
    verify->add_option("--distributions", verify_opts.distributions,
                       "comma list (default: all four)");
    verify->add_option("--n-pairs", verify_opts.n_pairs, "Monte-Carlo pairs (default 20000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0)
            emit_error("usage", e.what(), 1);
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts);
        if (fit->parsed()) return cmd_fit(fit_opts);
        if (pred->parsed()) {
            pred_opts.do_split = pred->count("--split") > 0;
            return cmd_predict(pred_opts);
        }
        if (bench->parsed()) return cmd_bench(bench_opts);
        if (verify->parsed()) return cmd_verify_theorem1(verify_opts);
        emit_error("usage", "no subcommand", 1);
        return 1;
    } catch (const UsageError& e) {
        emit_error("usage", e.what(), 1);
        return 1;
    } catch (const kfpca::DataError& e) {
        emit_error("data", e.what(), 2);
        return 2;
    } catch (const kfpca::NumericalError& e) {
        emit_error("numerical", e.what(), 3);
        return 3;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), 3);
        return 3;
    }
}
