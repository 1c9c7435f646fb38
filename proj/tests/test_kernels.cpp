#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kfpca/errors.hpp"
#include "kfpca/kernels.hpp"

using namespace kfpca;

namespace {

// Midpoint-rule quadrature over [-1, 1].
double integrate(const Kernel& k, int power, int n = 200000) {
    const double dx = 2.0 / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = -1.0 + (i + 0.5) * dx;
        sum += std::pow(u, power) * k(u) * dx;
    }
    return sum;
}

} // namespace

TEST_CASE("kernels are symmetric densities on [-1, 1]") {
    for (auto shape : {KernelShape::epanechnikov, KernelShape::quartic, KernelShape::triangular}) {
        const Kernel k(shape);
        CHECK(integrate(k, 0) == doctest::Approx(1.0).epsilon(1e-6));
        for (double u : {0.1, 0.35, 0.77, 0.99})
            CHECK(k(u) == doctest::Approx(k(-u)).epsilon(1e-15));
        CHECK(k(1.0) == 0.0);
        CHECK(k(-1.2) == 0.0);
        CHECK(k(57.0) == 0.0);
        CHECK(k(0.0) > 0.0);
        CHECK(integrate(k, 2) == doctest::Approx(k.second_moment()).epsilon(1e-6));
        CHECK(k.second_moment() > 0.0);
    }
}

TEST_CASE("epanechnikov values") {
    const Kernel k(KernelShape::epanechnikov);
    CHECK(k(0.0) == doctest::Approx(0.75));
    CHECK(k(0.5) == doctest::Approx(0.75 * 0.75));
    CHECK(k.scaled(0.2, 0.5) == doctest::Approx(k(0.4) / 0.5));
    CHECK(k.second_moment() == doctest::Approx(0.2));
}

TEST_CASE("kernel names round-trip") {
    for (auto shape : {KernelShape::epanechnikov, KernelShape::quartic, KernelShape::triangular})
        CHECK(kernel_shape_from_string(to_string(shape)) == shape);
    CHECK_THROWS_AS(kernel_shape_from_string("gaussian"), ValidationError);
}
