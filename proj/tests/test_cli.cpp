#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef KFPCA_CLI_PATH
#error "KFPCA_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(KFPCA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("simulate -> fit -> predict pipeline") {
    const fs::path dir = fresh_dir("kfpca_cli_pipe");
    CHECK(run("simulate --case 1 --distribution gaussian --design dense --n-subjects 60 "
              "--seed 4 --out " +
              dir.string()) == 0);
    CHECK(fs::exists(dir / "dataset.csv"));
    CHECK(fs::exists(dir / "truth.json"));

    CHECK(run("fit --input " + (dir / "dataset.csv").string() + " --domain 0,10 --baseline --out " +
              dir.string()) == 0);
    for (const char* f : {"surface.csv", "surface.json", "eigensystem.json", "model.json",
                          "diagnostics.json", "eigenfunction_1.csv", "eigenfunction_2.csv",
                          "mean.csv", "baseline_model.json", "baseline_eigensystem.json"})
        CHECK(fs::exists(dir / f));

    CHECK(run("predict --input " + (dir / "dataset.csv").string() + " --model " +
              (dir / "model.json").string() + " --out " + dir.string()) == 0);
    for (const char* f : {"scores.csv", "predictions.csv", "mse.json"})
        CHECK(fs::exists(dir / f));
}

TEST_CASE("simulate is byte-identical for a repeated config") {
    const fs::path a = fresh_dir("kfpca_cli_det_a");
    const fs::path b = fresh_dir("kfpca_cli_det_b");
    const std::string spec = "simulate --case 2 --distribution skew_t --design sparse "
                             "--n-subjects 40 --seed 12 --out ";
    CHECK(run(spec + a.string()) == 0);
    CHECK(run(spec + b.string()) == 0);
    CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
    CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
}

TEST_CASE("config file keys are overridden by flags") {
    const fs::path dir = fresh_dir("kfpca_cli_cfg");
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"case": 1, "distribution": "gaussian", "design": "dense",)"
            << R"( "n_subjects": 30, "seed": 5})";
    }
    CHECK(run("simulate --config " + (dir / "config.json").string() + " --n-subjects 25 --out " +
              dir.string()) == 0);
    // 25 subjects (flag) rather than 30 (config): count data rows' subjects.
    std::ifstream in(dir / "dataset.csv");
    std::string line;
    std::getline(in, line); // header
    std::string last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    CHECK(last.substr(0, 4) == "s25,");
}

TEST_CASE("usage and data errors map to exit codes") {
    const fs::path dir = fresh_dir("kfpca_cli_err");
    CHECK(run("simulate --case 5 --out " + dir.string()) == 1);      // invalid case
    CHECK(run("bench --distributions nope --out " + dir.string()) == 1);
    CHECK(run("fit --out " + dir.string()) == 1);                    // missing input

    {
        std::ofstream csv(dir / "empty.csv");
    }
    CHECK(run("fit --input " + (dir / "empty.csv").string() + " --out " + dir.string()) == 2);

    {
        std::ofstream csv(dir / "bad.csv");
        csv << "subject_id,time,value\na,0.5,oops\nb,0.1,1\n";
    }
    CHECK(run("fit --input " + (dir / "bad.csv").string() + " --out " + dir.string()) == 2);

    CHECK(run("unknown-subcommand") == 1);
}

TEST_CASE("bench emits 8 flat rows for a single run") {
    const fs::path dir = fresh_dir("kfpca_cli_bench1");
    CHECK(run("bench --cases 1 --distributions gaussian --designs dense --n-runs 1 "
              "--n-subjects 30 --seed 2 --out " +
              dir.string()) == 0);
    std::ifstream in(dir / "bench_results.csv");
    std::string line;
    std::getline(in, line); // header
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 8); // 2 methods x 4 metrics x 1 run
}

#include <json.hpp>

#include "kfpca/domain.hpp"
#include "kfpca/serialization.hpp"
#include "kfpca/simulation.hpp"

namespace {

kfpca::Curve read_curve_csv(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line); // header
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        times.push_back(std::stod(line.substr(0, comma)));
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    const kfpca::Grid grid(kfpca::Domain(times.front(), times.back()), times.size());
    return kfpca::Curve(grid, values);
}

double curve_angle_degrees(const kfpca::Curve& a, const kfpca::Curve& b_any_grid) {
    // Interpolate b onto a's grid, quadrature-normalize both, take the angle.
    std::vector<double> b_values(a.grid.size());
    for (std::size_t i = 0; i < a.grid.size(); ++i) b_values[i] = b_any_grid.at(a.grid[i]);
    const auto w = a.grid.trapezoid_weights();
    double na = 0.0, nb = 0.0, inner = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        na += w[i] * a.values[i] * a.values[i];
        nb += w[i] * b_values[i] * b_values[i];
        inner += w[i] * a.values[i] * b_values[i];
    }
    const double cosine = std::min(1.0, std::abs(inner) / std::sqrt(na * nb));
    return std::acos(cosine) * 180.0 / 3.14159265358979323846;
}

} // namespace

TEST_CASE("fitted eigenfunctions track the truth and are grid-stable") {
    const fs::path dir = fresh_dir("kfpca_cli_gridstab");
    REQUIRE(run("simulate --case 1 --distribution gaussian --design dense --n-subjects 100 "
                "--seed 21 --out " +
                dir.string()) == 0);

    const fs::path g51 = dir / "g51", g26 = dir / "g26";
    fs::create_directories(g51);
    fs::create_directories(g26);
    REQUIRE(run("fit --input " + (dir / "dataset.csv").string() +
                " --domain 0,10 --grid 51 --out " + g51.string()) == 0);
    REQUIRE(run("fit --input " + (dir / "dataset.csv").string() +
                " --domain 0,10 --grid 26 --out " + g26.string()) == 0);

    const kfpca::Curve phi1_51 = read_curve_csv(g51 / "eigenfunction_1.csv");
    const kfpca::Curve phi1_26 = read_curve_csv(g26 / "eigenfunction_1.csv");
    CHECK(curve_angle_degrees(phi1_51, phi1_26) < 3.0);

    // Single-run angle against the generating truth (loose bound).
    const kfpca::json truth = kfpca::read_json_file(dir / "truth.json");
    const kfpca::Grid grid(kfpca::Domain(0.0, 10.0), 51);
    const kfpca::Curve phi1_truth(grid, truth.at("phi1").get<std::vector<double>>());
    CHECK(curve_angle_degrees(phi1_truth, phi1_51) < 15.0);
}

TEST_CASE("predict against a stored analytic model on noiseless rank-2 data") {
    const fs::path dir = fresh_dir("kfpca_cli_predict");

    // Build the model file directly: exact mean and Case-1 eigenfunctions.
    const kfpca::Grid grid(kfpca::Domain(0.0, 10.0), 51);
    kfpca::FittedModel model;
    model.method = "kfpca";
    std::vector<double> mu(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        mu[i] = kfpca::simulation_mean(grid[i]);
    model.mean = kfpca::Curve(grid, std::move(mu));
    auto [phi1, phi2] = kfpca::true_eigenfunctions(kfpca::EigenCase::one, grid);
    const auto w = grid.trapezoid_weights();
    for (kfpca::Curve* c : {&phi1, &phi2}) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            norm_sq += w[i] * c->values[i] * c->values[i];
        for (double& v : c->values) v /= std::sqrt(norm_sq);
    }
    model.eigen.grid = grid;
    model.eigen.eigenvalues = {9.0, 1.5};
    model.eigen.eigenfunctions = {phi1, phi2};
    model.truncation = 2;
    model.bandwidths = {1.0, 1.0, 1.0};
    kfpca::write_json_file(kfpca::model_to_json(model, kfpca::KernelShape::epanechnikov, 51),
                           dir / "model.json");

    // Noiseless responses from the model's own interpolated curves.
    {
        std::ofstream csv(dir / "data.csv");
        csv << "subject_id,time,value\n";
        for (int i = 0; i < 8; ++i) {
            const double xi1 = 0.5 * i - 2.0, xi2 = 0.3 * i - 1.0;
            for (int j = 0; j < 5; ++j) {
                const double t = 0.7 + 1.9 * j + 0.05 * i;
                const double y = model.mean.at(t) + xi1 * phi1.at(t) + xi2 * phi2.at(t);
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g", y);
                csv << "subj" << i << ',' << t << ',' << buf << '\n';
            }
        }
    }

    REQUIRE(run("predict --input " + (dir / "data.csv").string() + " --model " +
                (dir / "model.json").string() + " --out " + dir.string()) == 0);
    const kfpca::json mse = kfpca::read_json_file(dir / "mse.json");
    CHECK(mse.at("overall").at("mse").get<double>() < 1e-6);
}

TEST_CASE("predict with only unidentifiable subjects exits with a data error") {
    const fs::path dir = fresh_dir("kfpca_cli_unusable");
    {
        // Two observations per subject with gaps spread so the raw pairs
        // cover the whole (s,t) square at h = 4.
        const double design[12][2] = {{0.3, 2.3}, {2.0, 4.0}, {4.0, 6.0}, {6.0, 8.0},
                                      {7.7, 9.7}, {0.5, 5.5}, {2.5, 7.5}, {4.5, 9.5},
                                      {0.8, 9.2}, {1.5, 8.5}, {3.0, 9.8}, {0.2, 7.0}};
        std::ofstream csv(dir / "data.csv");
        csv << "subject_id,time,value\n";
        for (int i = 0; i < 12; ++i) {
            csv << 's' << i << ',' << design[i][0] << ',' << 1.0 + 0.1 * i << '\n';
            csv << 's' << i << ',' << design[i][1] << ',' << 0.5 - 0.1 * i << '\n';
        }
    }
    REQUIRE(run("fit --input " + (dir / "data.csv").string() + " --domain 0,10 --h-prime 4 "
                "--h-surface 4 --h-mu 4 --out " +
                dir.string()) == 0);
    CHECK(run("predict --input " + (dir / "data.csv").string() + " --model " +
              (dir / "model.json").string() + " --L 2 --out " + dir.string()) == 2);
}

TEST_CASE("predict split protocol is deterministic in the seed") {
    const fs::path dir = fresh_dir("kfpca_cli_split");
    REQUIRE(run("simulate --case 1 --distribution gaussian --design dense --n-subjects 50 "
                "--seed 31 --out " +
                dir.string()) == 0);
    REQUIRE(run("fit --input " + (dir / "dataset.csv").string() + " --domain 0,10 --out " +
                dir.string()) == 0);
    const fs::path a = dir / "a", b = dir / "b";
    fs::create_directories(a);
    fs::create_directories(b);
    const std::string cmd = "predict --input " + (dir / "dataset.csv").string() + " --model " +
                            (dir / "model.json").string() + " --split 0.2 --split-seed 5 --out ";
    REQUIRE(run(cmd + a.string()) == 0);
    REQUIRE(run(cmd + b.string()) == 0);
    CHECK(slurp(a / "mse.json") == slurp(b / "mse.json"));
    const kfpca::json mse = kfpca::read_json_file(a / "mse.json");
    CHECK(mse.contains("train"));
    CHECK(mse.contains("test"));
}

TEST_CASE("bench full matrix smoke run") {
    const fs::path dir = fresh_dir("kfpca_cli_matrix");
    CHECK(run("bench --cases 1,2,3,4 --distributions gaussian,mix_gaussian,ec2,skew_t "
              "--designs dense,sparse --n-runs 2 --seed 9 --jobs 2 --out " +
              dir.string()) == 0);
    std::ifstream in(dir / "bench_results.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 32 * 2 * 2 * 4); // cells x runs x methods x metrics
}

TEST_CASE("verify-theorem1 flags low-confidence runs") {
    const fs::path dir = fresh_dir("kfpca_cli_thm1");
    CHECK(run("verify-theorem1 --case 1 --distributions gaussian --n-pairs 10 --seed 3 --out " +
              dir.string()) == 0);
    const kfpca::json out = kfpca::read_json_file(dir / "theorem1.json");
    CHECK(out.at("results").at(0).at("low_confidence").get<bool>() == true);

    const fs::path dir2 = fresh_dir("kfpca_cli_thm2");
    CHECK(run("verify-theorem1 --case 1 --distributions gaussian --n-pairs 2000 --seed 3 --out " +
              dir2.string()) == 0);
    const kfpca::json out2 = kfpca::read_json_file(dir2 / "theorem1.json");
    CHECK(out2.at("results").at(0).at("low_confidence").get<bool>() == false);
    CHECK(out2.at("results").at(0).at("eigenvalue_order_ok").get<bool>() == true);
}
