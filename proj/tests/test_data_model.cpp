#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kfpca/csv_io.hpp"
#include "kfpca/domain.hpp"
#include "kfpca/errors.hpp"
#include "kfpca/rng.hpp"

using namespace kfpca;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_CASE("domain and grid invariants") {
    CHECK_THROWS_AS(Domain(1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(Domain(2.0, 1.0), ValidationError);

    const Grid grid(Domain(0.0, 10.0), 51);
    CHECK(grid.size() == 51);
    CHECK(grid[0] == 0.0);
    CHECK(grid[50] == 10.0);
    CHECK(grid.spacing() == doctest::Approx(0.2).epsilon(1e-12));
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i] - grid[i - 1] == doctest::Approx(grid.spacing()).epsilon(1e-12));

    const auto w = grid.trapezoid_weights();
    CHECK(w.front() == doctest::Approx(0.1));
    CHECK(w.back() == doctest::Approx(0.1));
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(10.0).epsilon(1e-12));

    CHECK_THROWS_AS(Grid(Domain(0.0, 1.0), 1), ValidationError);
}

TEST_CASE("grid interpolation is linear and clamped") {
    const Grid grid(Domain(0.0, 4.0), 5);
    const std::vector<double> values = {0.0, 1.0, 4.0, 9.0, 16.0};
    CHECK(grid.interpolate(values, 0.5) == doctest::Approx(0.5));
    CHECK(grid.interpolate(values, 2.0) == doctest::Approx(4.0));
    CHECK(grid.interpolate(values, 3.5) == doctest::Approx(12.5));
    CHECK(grid.interpolate(values, -1.0) == doctest::Approx(0.0));
    CHECK(grid.interpolate(values, 99.0) == doctest::Approx(16.0));
}

TEST_CASE("dataset validation") {
    const Domain domain(0.0, 1.0);
    SparseSample a{"a", {0.0, 0.5}, {1.0, 2.0}};
    SparseSample b{"b", {0.25}, {3.0}};

    CHECK_NOTHROW(Dataset(domain, {a, b}));
    CHECK_THROWS_AS(Dataset(domain, {a}), ValidationError);                  // N < 2
    CHECK_THROWS_AS(Dataset(domain, {a, a}), ValidationError);               // duplicate id
    SparseSample outside{"c", {2.0}, {0.0}};
    CHECK_THROWS_AS(Dataset(domain, {a, outside}), ValidationError);         // time outside
    SparseSample unsorted{"d", {0.5, 0.25}, {0.0, 0.0}};
    CHECK_THROWS_AS(Dataset(domain, {a, unsorted}), ValidationError);        // not increasing
    SparseSample duplicate_time{"e", {0.5, 0.5}, {0.0, 0.0}};
    CHECK_THROWS_AS(Dataset(domain, {a, duplicate_time}), ValidationError);  // duplicate time
    SparseSample mismatch{"f", {0.5}, {0.0, 1.0}};
    CHECK_THROWS_AS(Dataset(domain, {a, mismatch}), ValidationError);        // length mismatch
    SparseSample empty{"g", {}, {}};
    CHECK_THROWS_AS(Dataset(domain, {a, empty}), ValidationError);           // m_i = 0

    // Single-observation subjects are admitted.
    const Dataset ok(domain, {a, b});
    CHECK(ok.size() == 2);
    CHECK(ok.total_observations() == 3);
}

TEST_CASE("read_long_csv groups and infers the domain") {
    const auto path = temp_file("kfpca_read_basic.csv");
    write_file(path, "subject_id,time,value\na,0.0,1.0\na,1.0,2.0\nb,0.5,0.0\n");
    const Dataset d = read_long_csv(path);
    CHECK(d.size() == 2);
    CHECK(d[0].subject_id == "a");
    CHECK(d[0].size() == 2);
    CHECK(d[1].size() == 1);
    CHECK(d.domain().lower == 0.0);
    CHECK(d.domain().upper == 1.0);
}

TEST_CASE("read_long_csv error cases") {
    const auto path = temp_file("kfpca_read_err.csv");

    write_file(path, "subject_id,time,value\na,0.5,xyz\nb,0.5,1.0\n");
    try {
        read_long_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 1);
    }

    write_file(path, "subject_id,time,value\na,0.5,1.0\na,0.5,2.0\nb,0.1,0.0\n");
    CHECK_THROWS_AS(read_long_csv(path), ValidationError); // duplicate time within subject

    write_file(path, "subject_id,time,value\na,0.5,1.0\na,0.7,2.0\n");
    CHECK_THROWS_AS(read_long_csv(path), ValidationError); // fewer than 2 subjects

    write_file(path, "subject_id,time,value\na,0.5,1.0\nb,5.0,2.0\n");
    CHECK_THROWS_AS(read_long_csv(path, Domain(0.0, 1.0)), ValidationError); // outside domain

    write_file(path, "time,value\n0.5,1.0\n");
    CHECK_THROWS_AS(read_long_csv(path), ParseError); // bad header

    CHECK_THROWS_AS(read_long_csv(temp_file("kfpca_does_not_exist.csv")), IoError);
}

TEST_CASE("csv round-trip reproduces random datasets") {
    Rng rng(20240801);
    const auto path = temp_file("kfpca_roundtrip.csv");
    for (int trial = 0; trial < 20; ++trial) {
        const Domain domain(0.0, 10.0);
        std::vector<SparseSample> samples;
        const int n = 2 + static_cast<int>(rng.uniform_index(6));
        for (int i = 0; i < n; ++i) {
            SparseSample s;
            s.subject_id = "subj" + std::to_string(i);
            const int m = 1 + static_cast<int>(rng.uniform_index(5));
            double t = rng.uniform() * 2.0;
            for (int j = 0; j < m; ++j) {
                s.times.push_back(t);
                s.values.push_back((rng.uniform() - 0.5) * 2e3);
                t += 0.1 + rng.uniform();
            }
            samples.push_back(std::move(s));
        }
        const Dataset original(domain, samples);
        write_long_csv(original, path);
        const Dataset restored = read_long_csv(path, domain);

        REQUIRE(restored.size() == original.size());
        for (std::size_t i = 0; i < original.size(); ++i) {
            CHECK(restored[i].subject_id == original[i].subject_id);
            REQUIRE(restored[i].size() == original[i].size());
            for (std::size_t j = 0; j < original[i].size(); ++j) {
                CHECK(restored[i].times[j] == original[i].times[j]);
                const double rel = std::abs(restored[i].values[j] - original[i].values[j]) /
                                   std::max(1.0, std::abs(original[i].values[j]));
                CHECK(rel <= 1e-12);
            }
        }
    }
}

TEST_CASE("write_long_csv emits one row per observation") {
    const auto path = temp_file("kfpca_write_two.csv");
    const Dataset d(Domain(0.0, 1.0),
                    {SparseSample{"a", {0.2}, {1.5}}, SparseSample{"b", {0.8}, {-2.5}}});
    write_long_csv(d, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3); // header + 2 observations
}
