#include "kfpca/domain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "kfpca/errors.hpp"

namespace kfpca {

Domain::Domain(double lo, double hi) : lower(lo), upper(hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw ValidationError("domain bounds must be finite");
    if (!(hi > lo))
        throw ValidationError("domain upper bound must exceed lower bound");
}

bool operator==(const Domain& a, const Domain& b) {
    return a.lower == b.lower && a.upper == b.upper;
}

Grid::Grid(const Domain& domain, std::size_t size) : domain_(domain) {
    if (size < 2)
        throw ValidationError("grid needs at least 2 points");
    points_.resize(size);
    spacing_ = domain.length() / static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i)
        points_[i] = domain.lower + spacing_ * static_cast<double>(i);
    points_.front() = domain.lower;
    points_.back() = domain.upper;
}

std::vector<double> Grid::trapezoid_weights() const {
    std::vector<double> w(points_.size(), spacing_);
    w.front() = spacing_ / 2.0;
    w.back() = spacing_ / 2.0;
    return w;
}

double Grid::interpolate(std::span<const double> values, double t) const {
    if (t <= points_.front()) return values.front();
    if (t >= points_.back()) return values.back();
    const auto hi = std::upper_bound(points_.begin(), points_.end(), t);
    const std::size_t b = static_cast<std::size_t>(hi - points_.begin());
    const std::size_t a = b - 1;
    const double frac = (t - points_[a]) / (points_[b] - points_[a]);
    return values[a] + frac * (values[b] - values[a]);
}

bool operator==(const Grid& a, const Grid& b) {
    return a.domain() == b.domain() && a.points() == b.points();
}

Curve::Curve(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size())
        throw ValidationError("curve values must match grid size");
}

void validate_sample(const SparseSample& sample, const Domain& domain) {
    if (sample.subject_id.empty())
        throw ValidationError("empty subject_id");
    if (sample.times.empty())
        throw ValidationError("subject '" + sample.subject_id + "' has no observations");
    if (sample.times.size() != sample.values.size())
        throw ValidationError("subject '" + sample.subject_id + "': times/values length mismatch");
    for (std::size_t j = 0; j < sample.times.size(); ++j) {
        if (!std::isfinite(sample.times[j]) || !std::isfinite(sample.values[j]))
            throw ValidationError("subject '" + sample.subject_id + "': non-finite observation");
        if (!domain.contains(sample.times[j]))
            throw ValidationError("subject '" + sample.subject_id + "': time outside domain");
        if (j > 0 && !(sample.times[j] > sample.times[j - 1]))
            throw ValidationError("subject '" + sample.subject_id +
                                  "': times not strictly increasing (duplicate time?)");
    }
}

Dataset::Dataset(Domain domain, std::vector<SparseSample> samples)
    : domain_(domain), samples_(std::move(samples)) {
    if (samples_.size() < 2)
        throw ValidationError("dataset needs at least 2 subjects");
    std::unordered_set<std::string> seen;
    for (const auto& s : samples_) {
        validate_sample(s, domain_);
        if (!seen.insert(s.subject_id).second)
            throw ValidationError("duplicate subject_id '" + s.subject_id + "'");
    }
}

std::size_t Dataset::total_observations() const {
    std::size_t n = 0;
    for (const auto& s : samples_) n += s.size();
    return n;
}

} // namespace kfpca
