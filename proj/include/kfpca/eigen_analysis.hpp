#pragma once

#include <cstddef>
#include <vector>

#include "kfpca/domain.hpp"
#include "kfpca/smoothing.hpp"

namespace kfpca {

// Leading eigenpairs of the discretized surface operator. Eigenfunctions are
// quadrature-normalized (trapezoid weights), mutually quadrature-orthogonal,
// and oriented so that their integral is nonnegative (value at the left
// endpoint breaks near-zero-integral ties).
struct EigenSystem {
    Grid grid;
    std::vector<double> eigenvalues; // descending
    std::vector<Curve> eigenfunctions;
    bool rank_deficient = false; // some retained eigenvalue is numerically zero
};

// Solves the discretized eigenequations: with W = diag(trapezoid weights) and
// surface matrix V, the symmetric matrix M = W^1/2 V W^1/2 is decomposed and
// eigenvectors are mapped back through W^-1/2. Eigenvalues of M approximate
// the integral operator's eigenvalues.
EigenSystem eigendecompose(const SurfaceEstimate& surface, std::size_t n_components);

// Integrated squared error after sign alignment, by trapezoid quadrature.
double imse(const Curve& truth, const Curve& estimate);

// arccos |<truth, estimate>| in degrees, in [0, 90].
double angle_degrees(const Curve& truth, const Curve& estimate);

} // namespace kfpca
