#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kfpca {

// Closed observation interval [lower, upper].
struct Domain {
    double lower = 0.0;
    double upper = 1.0;

    Domain() = default;
    Domain(double lo, double hi);

    double length() const { return upper - lower; }
    bool contains(double t) const { return t >= lower && t <= upper; }
};

bool operator==(const Domain& a, const Domain& b);

// Equally spaced discretization of a Domain.
class Grid {
public:
    Grid() = default;
    Grid(const Domain& domain, std::size_t size);

    std::size_t size() const { return points_.size(); }
    double spacing() const { return spacing_; }
    const std::vector<double>& points() const { return points_; }
    double operator[](std::size_t i) const { return points_[i]; }
    const Domain& domain() const { return domain_; }

    // Trapezoid rule weights: spacing/2 at the ends, spacing inside.
    std::vector<double> trapezoid_weights() const;

    // Piecewise-linear interpolation of nodal values; t is clamped to the domain.
    double interpolate(std::span<const double> values, double t) const;

private:
    Domain domain_;
    std::vector<double> points_;
    double spacing_ = 0.0;
};

bool operator==(const Grid& a, const Grid& b);

// Function values on a grid.
struct Curve {
    Grid grid;
    std::vector<double> values;

    Curve() = default;
    Curve(Grid g, std::vector<double> v);

    double at(double t) const { return grid.interpolate(values, t); }
};

// One subject's irregular observations. Times strictly increasing.
struct SparseSample {
    std::string subject_id;
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const { return times.size(); }
};

// Validated collection of samples over a common domain.
class Dataset {
public:
    Dataset(Domain domain, std::vector<SparseSample> samples);

    const Domain& domain() const { return domain_; }
    const std::vector<SparseSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const SparseSample& operator[](std::size_t i) const { return samples_[i]; }

    std::size_t total_observations() const;

private:
    Domain domain_;
    std::vector<SparseSample> samples_;
};

// Throws ValidationError describing the first violated invariant.
void validate_sample(const SparseSample& sample, const Domain& domain);

} // namespace kfpca
