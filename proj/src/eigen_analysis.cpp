#include "kfpca/eigen_analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "kfpca/errors.hpp"

namespace kfpca {

EigenSystem eigendecompose(const SurfaceEstimate& surface, std::size_t n_components) {
    const auto g = static_cast<Eigen::Index>(surface.grid.size());
    if (surface.values.rows() != g || surface.values.cols() != g)
        throw ValidationError("surface matrix does not match its grid");
    if (n_components < 1 || n_components > static_cast<std::size_t>(g))
        throw ValidationError("n_components must lie in [1, G]");
    if (!surface.values.allFinite())
        throw NumericalError("surface contains non-finite entries");

    const double scale = surface.values.cwiseAbs().maxCoeff();
    const double asym = (surface.values - surface.values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, scale))
        throw NumericalError("surface is not symmetric");

    const std::vector<double> weights = surface.grid.trapezoid_weights();
    Eigen::VectorXd sqrt_w(g), inv_sqrt_w(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        sqrt_w(i) = std::sqrt(weights[static_cast<std::size_t>(i)]);
        inv_sqrt_w(i) = 1.0 / sqrt_w(i);
    }

    const Eigen::MatrixXd m = sqrt_w.asDiagonal() * surface.values * sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        ((m + m.transpose()) / 2.0).eval());
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigendecomposition failed to converge");

    // Eigen returns ascending order; take the top n_components from the back.
    EigenSystem sys;
    sys.grid = surface.grid;
    const double zero_tol = 1e-12 * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < n_components; ++k) {
        const Eigen::Index idx = g - 1 - static_cast<Eigen::Index>(k);
        const double value = solver.eigenvalues()(idx);
        Eigen::VectorXd phi = inv_sqrt_w.asDiagonal() * solver.eigenvectors().col(idx);

        // Unit Euclidean eigenvectors of M give unit quadrature norm already;
        // renormalize to absorb roundoff.
        double norm_sq = 0.0, integral = 0.0;
        for (Eigen::Index i = 0; i < g; ++i) {
            norm_sq += weights[static_cast<std::size_t>(i)] * phi(i) * phi(i);
            integral += weights[static_cast<std::size_t>(i)] * phi(i);
        }
        phi /= std::sqrt(norm_sq);
        integral /= std::sqrt(norm_sq);
        if (integral < 0.0 || (std::abs(integral) < 1e-9 && phi(0) < 0.0))
            phi = -phi;

        sys.eigenvalues.push_back(value);
        sys.eigenfunctions.emplace_back(surface.grid,
                                        std::vector<double>(phi.data(), phi.data() + g));
        if (std::abs(value) <= zero_tol) sys.rank_deficient = true;
    }
    return sys;
}

namespace {

void check_same_grid(const Curve& a, const Curve& b) {
    if (!(a.grid == b.grid))
        throw ValidationError("curves live on different grids");
}

double quadrature_inner(const Curve& a, const Curve& b) {
    const std::vector<double> w = a.grid.trapezoid_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        sum += w[i] * a.values[i] * b.values[i];
    return sum;
}

} // namespace

double imse(const Curve& truth, const Curve& estimate) {
    check_same_grid(truth, estimate);
    const double inner = quadrature_inner(truth, estimate);
    const double sign = inner < 0.0 ? -1.0 : 1.0;
    const std::vector<double> w = truth.grid.trapezoid_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = truth.values[i] - sign * estimate.values[i];
        sum += w[i] * d * d;
    }
    return sum;
}

double angle_degrees(const Curve& truth, const Curve& estimate) {
    check_same_grid(truth, estimate);
    const double inner = std::min(1.0, std::abs(quadrature_inner(truth, estimate)));
    return std::acos(inner) * 180.0 / std::numbers::pi;
}

} // namespace kfpca
