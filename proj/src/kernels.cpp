#include "kfpca/kernels.hpp"

#include <cmath>

#include "kfpca/errors.hpp"

namespace kfpca {

double Kernel::operator()(double u) const {
    const double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    switch (shape_) {
    case KernelShape::epanechnikov:
        return 0.75 * (1.0 - u * u);
    case KernelShape::quartic: {
        const double w = 1.0 - u * u;
        return (15.0 / 16.0) * w * w;
    }
    case KernelShape::triangular:
        return 1.0 - a;
    }
    return 0.0;
}

double Kernel::second_moment() const {
    switch (shape_) {
    case KernelShape::epanechnikov:
        return 0.2;
    case KernelShape::quartic:
        return 1.0 / 7.0;
    case KernelShape::triangular:
        return 1.0 / 6.0;
    }
    return 0.0;
}

std::string to_string(KernelShape shape) {
    switch (shape) {
    case KernelShape::epanechnikov:
        return "epanechnikov";
    case KernelShape::quartic:
        return "quartic";
    case KernelShape::triangular:
        return "triangular";
    }
    return "?";
}

KernelShape kernel_shape_from_string(const std::string& name) {
    if (name == "epanechnikov") return KernelShape::epanechnikov;
    if (name == "quartic") return KernelShape::quartic;
    if (name == "triangular") return KernelShape::triangular;
    throw ValidationError("unknown kernel '" + name + "'");
}

} // namespace kfpca
