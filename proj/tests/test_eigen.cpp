#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "kfpca/eigen_analysis.hpp"
#include "kfpca/errors.hpp"
#include "kfpca/rng.hpp"
#include "kfpca/simulation.hpp"

using namespace kfpca;

namespace {

Curve normalized(Curve c) {
    const auto w = c.grid.trapezoid_weights();
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) norm_sq += w[i] * c.values[i] * c.values[i];
    for (double& v : c.values) v /= std::sqrt(norm_sq);
    return c;
}

SurfaceEstimate outer_surface(const Grid& grid, const std::vector<double>& f,
                              const std::vector<double>& g, double a, double b) {
    SurfaceEstimate surface;
    surface.grid = grid;
    const auto n = static_cast<Eigen::Index>(grid.size());
    surface.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            surface.values(i, j) = a * f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(j)] +
                                   b * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
    return surface;
}

} // namespace

TEST_CASE("rank-1 surface recovers its factor") {
    const Grid grid(Domain(0.0, 10.0), 51);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        f[i] = std::cos(std::numbers::pi * grid[i] / 10.0) / std::sqrt(5.0);
    const SurfaceEstimate surface = outer_surface(grid, f, f, 1.0, 0.0);

    const EigenSystem sys = eigendecompose(surface, 3);
    CHECK(std::abs(sys.eigenvalues[0] - 1.0) <= 2e-3);
    CHECK(std::abs(sys.eigenvalues[1]) <= 1e-8);

    const Curve truth = normalized(Curve(grid, f));
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        max_err = std::max(max_err, std::abs(std::abs(sys.eigenfunctions[0].values[i]) -
                                             std::abs(truth.values[i])));
    CHECK(max_err <= 1e-6);
}

TEST_CASE("zero surface flags rank deficiency and stays orthonormal") {
    const Grid grid(Domain(0.0, 10.0), 21);
    SurfaceEstimate surface;
    surface.grid = grid;
    surface.values = Eigen::MatrixXd::Zero(21, 21);
    const EigenSystem sys = eigendecompose(surface, 4);
    CHECK(sys.rank_deficient);
    const auto w = grid.trapezoid_weights();
    for (std::size_t k = 0; k < sys.eigenfunctions.size(); ++k) {
        CHECK(sys.eigenvalues[k] == 0.0);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            norm_sq += w[i] * sys.eigenfunctions[k].values[i] * sys.eigenfunctions[k].values[i];
        CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-8));
        for (std::size_t j = 0; j < k; ++j) {
            double inner = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i)
                inner += w[i] * sys.eigenfunctions[k].values[i] * sys.eigenfunctions[j].values[i];
            CHECK(std::abs(inner) <= 1e-6);
        }
    }
}

TEST_CASE("spectral surface recovers the planted eigensystem") {
    const Grid grid(Domain(0.0, 10.0), 51);
    auto [phi1, phi2] = true_eigenfunctions(EigenCase::one, grid);
    const SurfaceEstimate surface = outer_surface(grid, phi1.values, phi2.values, 9.0, 1.5);
    const EigenSystem sys = eigendecompose(surface, 2);

    CHECK(std::abs(sys.eigenvalues[0] - 9.0) <= 0.02);
    CHECK(std::abs(sys.eigenvalues[1] - 1.5) <= 0.02);
    CHECK(angle_degrees(normalized(phi1), sys.eigenfunctions[0]) <= 0.5);
    CHECK(angle_degrees(normalized(phi2), sys.eigenfunctions[1]) <= 0.5);
}

TEST_CASE("eigensystem invariants: ordering, normalization, orientation") {
    Rng rng(15);
    const Grid grid(Domain(0.0, 10.0), 31);
    SurfaceEstimate surface;
    surface.grid = grid;
    Eigen::MatrixXd noise = Eigen::MatrixXd::NullaryExpr(31, 31, [&] { return rng.normal(); });
    surface.values = (noise + noise.transpose()) / 2.0;

    const EigenSystem sys = eigendecompose(surface, 31);
    const auto w = grid.trapezoid_weights();
    for (std::size_t k = 0; k < sys.eigenfunctions.size(); ++k) {
        if (k > 0) CHECK(sys.eigenvalues[k] <= sys.eigenvalues[k - 1]);
        double norm_sq = 0.0, integral = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            norm_sq += w[i] * sys.eigenfunctions[k].values[i] * sys.eigenfunctions[k].values[i];
            integral += w[i] * sys.eigenfunctions[k].values[i];
        }
        CHECK(std::abs(norm_sq - 1.0) <= 1e-8);
        if (std::abs(integral) > 1e-9)
            CHECK(integral >= 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            double inner = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i)
                inner += w[i] * sys.eigenfunctions[k].values[i] * sys.eigenfunctions[j].values[i];
            CHECK(std::abs(inner) <= 1e-6);
        }
    }

    // Spectral reconstruction with all components reproduces the surface.
    Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(31, 31);
    for (std::size_t k = 0; k < sys.eigenfunctions.size(); ++k) {
        Eigen::Map<const Eigen::VectorXd> phi(sys.eigenfunctions[k].values.data(), 31);
        rebuilt += sys.eigenvalues[k] * phi * phi.transpose();
    }
    CHECK((rebuilt - surface.values).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("scaling the surface scales eigenvalues and fixes eigenfunctions") {
    const Grid grid(Domain(0.0, 10.0), 51);
    auto [phi1, phi2] = true_eigenfunctions(EigenCase::one, grid);
    const SurfaceEstimate surface = outer_surface(grid, phi1.values, phi2.values, 9.0, 1.5);
    SurfaceEstimate scaled = surface;
    const double c = 12.75;
    scaled.values *= c;

    const EigenSystem base = eigendecompose(surface, 2);
    const EigenSystem big = eigendecompose(scaled, 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(big.eigenvalues[k] == doctest::Approx(c * base.eigenvalues[k]).epsilon(1e-10));
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(big.eigenfunctions[k].values[i] - base.eigenfunctions[k].values[i]) <=
                  1e-10);
    }
}

TEST_CASE("eigendecompose rejects bad inputs") {
    const Grid grid(Domain(0.0, 1.0), 5);
    SurfaceEstimate surface;
    surface.grid = grid;
    surface.values = Eigen::MatrixXd::Zero(5, 5);
    surface.values(0, 4) = 1.0; // asymmetric
    CHECK_THROWS_AS(eigendecompose(surface, 2), NumericalError);

    surface.values.setZero();
    surface.values(2, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eigendecompose(surface, 2), NumericalError);

    surface.values.setZero();
    CHECK_THROWS_AS(eigendecompose(surface, 0), ValidationError);
    CHECK_THROWS_AS(eigendecompose(surface, 6), ValidationError);
}

TEST_CASE("imse and angle metric examples") {
    const Grid grid(Domain(0.0, 10.0), 51);
    auto [phi1_raw, phi2_raw] = true_eigenfunctions(EigenCase::one, grid);
    const Curve phi1 = normalized(phi1_raw);
    const Curve phi2 = normalized(phi2_raw);

    CHECK(imse(phi1, phi1) == doctest::Approx(0.0).epsilon(1e-12));
    Curve negated = phi1;
    for (double& v : negated.values) v = -v;
    CHECK(imse(phi1, negated) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(imse(phi1, phi2) - 2.0) <= 1e-3);

    CHECK(angle_degrees(phi1, phi1) == doctest::Approx(0.0));
    CHECK(angle_degrees(phi1, negated) == doctest::Approx(0.0));
    CHECK(std::abs(angle_degrees(phi1, phi2) - 90.0) <= 0.1);

    // Unit combination with inner product 1/2 against phi1 sits at 60 degrees.
    Curve combo = phi1;
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = 0.5 * phi1.values[i] + (std::sqrt(3.0) / 2.0) * phi2.values[i];
    combo = normalized(combo);
    CHECK(std::abs(angle_degrees(phi1, combo) - 60.0) <= 0.2);

    Curve other_grid(Grid(Domain(0.0, 10.0), 21), std::vector<double>(21, 0.1));
    CHECK_THROWS_AS(imse(phi1, other_grid), ValidationError);
    CHECK_THROWS_AS(angle_degrees(phi1, other_grid), ValidationError);
}

TEST_CASE("imse equals 2 - 2cos(angle) for normalized curves") {
    Rng rng(16);
    const Grid grid(Domain(0.0, 10.0), 41);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(grid.size()), b(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        const Curve ca = normalized(Curve(grid, a));
        const Curve cb = normalized(Curve(grid, b));
        const double m = imse(ca, cb);
        const double theta = angle_degrees(ca, cb);
        CHECK(m >= -1e-12);
        CHECK(m <= 4.0 + 1e-12);
        CHECK(theta >= 0.0);
        CHECK(theta <= 90.0);
        CHECK(std::abs(m - (2.0 - 2.0 * std::cos(theta * std::numbers::pi / 180.0))) <= 1e-6);
    }
}
