#include "kfpca/scores.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kfpca/errors.hpp"
#include "kfpca/rng.hpp"

namespace kfpca {

ScoreEstimate estimate_scores(const FittedModel& model, const SparseSample& sample,
                              std::span<const double> weights) {
    if (model.truncation < 1 || model.truncation > model.eigen.eigenfunctions.size())
        throw ValidationError("model truncation exceeds available eigenpairs");
    if (!weights.empty() && weights.size() != sample.size())
        throw ValidationError("weights length must match the sample");

    ScoreEstimate est;
    est.subject_id = sample.subject_id;
    const std::size_t m = sample.size();
    const std::size_t L = model.truncation;
    if (m <= L) return est; // identifiability: m_i > L required

    Eigen::MatrixXd design(m, L);
    Eigen::VectorXd response(m);
    for (std::size_t q = 0; q < m; ++q) {
        const double w = weights.empty() ? 1.0 : std::sqrt(weights[q]);
        for (std::size_t k = 0; k < L; ++k)
            design(q, k) = w * model.eigen.eigenfunctions[k].at(sample.times[q]);
        response(q) = w * (sample.values[q] - model.mean.at(sample.times[q]));
    }

    // SVD solve yields the minimum-norm solution when the design is
    // rank-deficient (near-duplicate observation times).
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    est.rank_deficient = static_cast<std::size_t>(svd.rank()) < L;
    const Eigen::VectorXd xi = svd.solve(response);

    est.scores.assign(xi.data(), xi.data() + L);
    est.usable = true;
    return est;
}

std::vector<double> predict_trajectory(const FittedModel& model, const ScoreEstimate& scores,
                                       std::span<const double> times) {
    if (!scores.usable)
        throw ValidationError("scores for subject '" + scores.subject_id + "' are not usable");
    const Domain& domain = model.mean.grid.domain();
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!domain.contains(t))
            throw ValidationError("prediction time outside domain");
        double value = model.mean.at(t);
        for (std::size_t k = 0; k < scores.scores.size(); ++k)
            value += scores.scores[k] * model.eigen.eigenfunctions[k].at(t);
        out.push_back(value);
    }
    return out;
}

double prediction_mse(const FittedModel& model, const Dataset& dataset) {
    double sum = 0.0;
    std::size_t usable = 0;
    for (const auto& sample : dataset.samples()) {
        const ScoreEstimate est = estimate_scores(model, sample);
        if (!est.usable) continue;
        const std::vector<double> pred = predict_trajectory(model, est, sample.times);
        double subject_sum = 0.0;
        for (std::size_t j = 0; j < sample.size(); ++j) {
            const double r = sample.values[j] - pred[j];
            subject_sum += r * r;
        }
        sum += subject_sum / static_cast<double>(sample.size());
        ++usable;
    }
    if (usable == 0)
        throw ValidationError("no subject has more than L observations");
    return sum / static_cast<double>(usable);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw ValidationError("test_fraction must lie in (0, 1)");
    const std::size_t n = dataset.size();
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));
    // Both sides must satisfy the dataset invariant of >= 2 subjects.
    if (n_test < 2 || n - n_test < 2)
        throw ValidationError("too few subjects for the requested split");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng(seed).substream("train-test-split");
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(i + 1)]);

    std::vector<SparseSample> test_samples, train_samples;
    for (std::size_t i = 0; i < n_test; ++i) test_samples.push_back(dataset[order[i]]);
    for (std::size_t i = n_test; i < n; ++i) train_samples.push_back(dataset[order[i]]);
    return {Dataset(dataset.domain(), std::move(train_samples)),
            Dataset(dataset.domain(), std::move(test_samples))};
}

} // namespace kfpca
