#pragma once

#include <string>

namespace kfpca {

enum class KernelShape { epanechnikov, quartic, triangular };

// Symmetric density on [-1, 1]. Used both for the donor pre-smoothing weights
// k(.) and the surface smoothing weights kappa(.).
class Kernel {
public:
    explicit Kernel(KernelShape shape = KernelShape::epanechnikov) : shape_(shape) {}

    double operator()(double u) const;

    // k(t/h)/h
    double scaled(double t, double h) const { return (*this)(t / h) / h; }

    double at_zero() const { return (*this)(0.0); }

    // nu2 = int u^2 k(u) du, analytic per shape.
    double second_moment() const;

    KernelShape shape() const { return shape_; }

private:
    KernelShape shape_;
};

std::string to_string(KernelShape shape);
KernelShape kernel_shape_from_string(const std::string& name);

} // namespace kfpca
