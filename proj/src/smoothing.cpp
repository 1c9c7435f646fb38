#include "kfpca/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kfpca/errors.hpp"

namespace kfpca {

namespace {

// Degeneracy test for local weighted least squares: the Gram determinant is
// compared against this fraction of its Hadamard bound (the product of the
// diagonal moments). Healthy 2-D windows sit above ~5e-2; sliver windows at
// domain corners fall orders of magnitude below and would otherwise
// extrapolate wildly, so they take the local-constant fallback instead.
constexpr double kDegenerateRel = 5e-3;

struct NodeWeight {
    std::size_t index;
    double u; // (x - node)/h
    double w; // kappa_h(x - node)
};

// Grid nodes receiving positive kernel weight from coordinate x.
void node_weights(const Grid& grid, double x, double h, const Kernel& kernel,
                  std::vector<NodeWeight>& out) {
    out.clear();
    const double lower = grid.domain().lower;
    const double dx = grid.spacing();
    const auto g = static_cast<long>(grid.size());
    long a = static_cast<long>(std::ceil((x - h - lower) / dx));
    long b = static_cast<long>(std::floor((x + h - lower) / dx));
    a = std::max(a, 0L);
    b = std::min(b, g - 1);
    for (long i = a; i <= b; ++i) {
        const double d = x - grid[static_cast<std::size_t>(i)];
        const double w = kernel.scaled(d, h);
        if (w > 0.0)
            out.push_back({static_cast<std::size_t>(i), d / h, w});
    }
}

} // namespace

void Bandwidths::validate(const Domain& domain) const {
    const double len = domain.length();
    for (double v : {h_prime, h, h_mu}) {
        if (!(v > 0.0) || !(v <= len))
            throw ValidationError("bandwidths must lie in (0, |T|]");
    }
}

double SurfaceEstimate::value_at(double s, double t) const {
    const auto& pts = grid.points();
    const double dx = grid.spacing();
    auto locate = [&](double x, std::size_t& lo, double& frac) {
        if (x <= pts.front()) {
            lo = 0;
            frac = 0.0;
        } else if (x >= pts.back()) {
            lo = pts.size() - 2;
            frac = 1.0;
        } else {
            lo = std::min(static_cast<std::size_t>((x - pts.front()) / dx), pts.size() - 2);
            if (x < pts[lo]) --lo;
            frac = (x - pts[lo]) / dx;
        }
    };
    std::size_t a, b;
    double fs, ft;
    locate(s, a, fs);
    locate(t, b, ft);
    const double v00 = values(a, b), v01 = values(a, b + 1);
    const double v10 = values(a + 1, b), v11 = values(a + 1, b + 1);
    return (1 - fs) * ((1 - ft) * v00 + ft * v01) + fs * ((1 - ft) * v10 + ft * v11);
}

std::optional<double> nw_estimate(const SparseSample& donor, double target_time, double h_prime,
                                  const Kernel& kernel) {
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < donor.size(); ++q) {
        const double w = kernel.scaled(target_time - donor.times[q], h_prime);
        num += w * donor.values[q];
        den += w;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

MeanFit local_linear_mean(const Dataset& dataset, const Grid& grid, double h_mu,
                          const Kernel& kernel) {
    if (dataset.total_observations() < 2)
        throw ValidationError("mean smoothing needs at least 2 pooled observations");
    if (!(h_mu > 0.0))
        throw ValidationError("h_mu must be positive");

    std::vector<std::pair<double, double>> obs;
    obs.reserve(dataset.total_observations());
    for (const auto& sample : dataset.samples())
        for (std::size_t j = 0; j < sample.size(); ++j)
            obs.emplace_back(sample.times[j], sample.values[j]);
    std::sort(obs.begin(), obs.end());

    MeanFit fit;
    std::vector<double> mu(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double s = grid[g];
        const auto lo = std::lower_bound(obs.begin(), obs.end(), std::make_pair(s - h_mu, -1e300));
        const auto hi = std::upper_bound(obs.begin(), obs.end(), std::make_pair(s + h_mu, 1e300));
        double s0 = 0, s1 = 0, s2 = 0, r0 = 0, r1 = 0;
        for (auto it = lo; it != hi; ++it) {
            const double w = kernel.scaled(it->first - s, h_mu);
            if (w <= 0.0) continue;
            const double u = it->first - s;
            s0 += w;
            s1 += w * u;
            s2 += w * u * u;
            r0 += w * it->second;
            r1 += w * u * it->second;
        }
        if (s0 <= 0.0)
            throw BandwidthError("mean bandwidth too small: no observation within h_mu of grid node " +
                                 std::to_string(g));
        const double det = s0 * s2 - s1 * s1;
        if (det <= kDegenerateRel * s0 * s2 || s2 == 0.0) {
            mu[g] = r0 / s0; // degenerate local design: weighted mean
            fit.constant_fallback_nodes.push_back(g);
        } else {
            mu[g] = (s2 * r0 - s1 * r1) / det;
        }
    }
    fit.curve = Curve(grid, std::move(mu));
    return fit;
}

SurfaceEstimate local_linear_surface(std::span<const RawSurfacePoint> points, const Grid& grid,
                                     double h, const Kernel& kernel) {
    if (points.empty())
        throw ValidationError("surface smoothing needs at least one raw point");
    if (!(h > 0.0))
        throw ValidationError("surface bandwidth must be positive");

    const std::size_t g = grid.size();
    // Moment sums per node: S00 S10 S01 S20 S11 S02 K00 K10 K01.
    std::vector<std::array<double, 9>> acc(g * g, {0, 0, 0, 0, 0, 0, 0, 0, 0});

    std::vector<NodeWeight> ws, wt;
    for (const auto& p : points) {
        node_weights(grid, p.s, h, kernel, ws);
        if (ws.empty()) continue;
        node_weights(grid, p.t, h, kernel, wt);
        if (wt.empty()) continue;
        for (const auto& a : ws) {
            const std::size_t row = a.index * g;
            for (const auto& b : wt) {
                auto& m = acc[row + b.index];
                const double w = a.w * b.w;
                const double uw = a.u * w;
                const double vw = b.u * w;
                m[0] += w;
                m[1] += uw;
                m[2] += vw;
                m[3] += a.u * uw;
                m[4] += a.u * vw;
                m[5] += b.u * vw;
                m[6] += p.value * w;
                m[7] += p.value * uw;
                m[8] += p.value * vw;
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(points.size());
    SurfaceEstimate est;
    est.grid = grid;
    est.values.resize(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = 0; b < g; ++b) {
            const auto& m = acc[a * g + b];
            const double s00 = m[0] * inv_n, s10 = m[1] * inv_n, s01 = m[2] * inv_n;
            const double s20 = m[3] * inv_n, s11 = m[4] * inv_n, s02 = m[5] * inv_n;
            const double k00 = m[6] * inv_n, k10 = m[7] * inv_n, k01 = m[8] * inv_n;
            if (s00 <= 0.0)
                throw BandwidthError("surface bandwidth too small: no raw point near grid node (" +
                                     std::to_string(a) + "," + std::to_string(b) + ")");
            const double a1 = s20 * s02 - s11 * s11;
            const double a2 = s10 * s02 - s01 * s11;
            const double a3 = s01 * s20 - s10 * s11;
            const double det = a1 * s00 - a2 * s10 - a3 * s01;
            // det is the Gram determinant of the local design; Hadamard's bound
            // det <= s00*s20*s02 makes the degeneracy test scale-free.
            if (det <= kDegenerateRel * s00 * s20 * s02 || s20 * s02 == 0.0) {
                est.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = k00 / s00;
            } else {
                est.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    (a1 * k00 - a2 * k10 - a3 * k01) / det;
            }
        }
    }
    est.values = ((est.values + est.values.transpose()) / 2.0).eval();
    return est;
}

namespace {

// Scores are >= 0; ties go to the largest bandwidth so the zero-residual
// degeneracy resolves through the df penalty.
double select_from_trace(const std::vector<GcvTraceEntry>& trace, const std::string& what) {
    const GcvTraceEntry* best = nullptr;
    for (const auto& e : trace) {
        if (!e.feasible) continue;
        if (best == nullptr) {
            best = &e;
            continue;
        }
        const double tol = 1e-12 * std::max(e.score, best->score);
        if (e.score < best->score - tol ||
            (e.score <= best->score + tol && e.bandwidth > best->bandwidth))
            best = &e;
    }
    if (best == nullptr) {
        std::ostringstream msg;
        msg << "no feasible GCV candidate for " << what << ":";
        for (const auto& e : trace)
            msg << " h=" << e.bandwidth << " (" << (e.note.empty() ? "infeasible" : e.note) << ")";
        throw BandwidthError(msg.str());
    }
    return best->bandwidth;
}

} // namespace

GcvResult gcv_select_bandwidth(std::span<const RawSurfacePoint> points, const Grid& grid,
                               std::span<const double> candidates, const Kernel& kernel) {
    if (candidates.empty())
        throw ValidationError("GCV needs at least one candidate bandwidth");
    if (points.empty())
        throw ValidationError("GCV needs raw points");

    const double n = static_cast<double>(points.size());
    const double len = grid.domain().length();
    const double k0 = kernel.at_zero();
    double sumsq = 0.0;
    for (const auto& p : points) sumsq += p.value * p.value;
    const double rss_floor = sumsq * 1e-20;

    GcvResult result;
    for (double h : candidates) {
        GcvTraceEntry e;
        e.bandwidth = h;
        e.df = len * len * k0 * k0 / (h * h);
        if (e.df >= n) {
            e.score = std::numeric_limits<double>::infinity();
            e.note = "nu(h) >= n";
            result.trace.push_back(e);
            continue;
        }
        try {
            const SurfaceEstimate fit = local_linear_surface(points, grid, h, kernel);
            double rss = 0.0;
            for (const auto& p : points) {
                const double r = p.value - fit.value_at(p.s, p.t);
                rss += r * r;
            }
            if (rss <= rss_floor) rss = 0.0;
            e.rss = rss;
            const double denom = 1.0 - e.df / n;
            e.score = rss / (denom * denom);
            e.feasible = true;
        } catch (const BandwidthError& err) {
            e.score = std::numeric_limits<double>::infinity();
            e.note = err.what();
        }
        result.trace.push_back(e);
    }
    result.selected = select_from_trace(result.trace, "the surface");
    return result;
}

GcvResult gcv_select_mean_bandwidth(const Dataset& dataset, const Grid& grid,
                                    std::span<const double> candidates, const Kernel& kernel) {
    if (candidates.empty())
        throw ValidationError("GCV needs at least one candidate bandwidth");

    const double n = static_cast<double>(dataset.total_observations());
    const double len = grid.domain().length();
    const double k0 = kernel.at_zero();
    double sumsq = 0.0;
    for (const auto& s : dataset.samples())
        for (double v : s.values) sumsq += v * v;
    const double rss_floor = sumsq * 1e-20;

    GcvResult result;
    for (double h : candidates) {
        GcvTraceEntry e;
        e.bandwidth = h;
        e.df = len * k0 / h;
        if (e.df >= n) {
            e.score = std::numeric_limits<double>::infinity();
            e.note = "nu(h) >= n";
            result.trace.push_back(e);
            continue;
        }
        try {
            const MeanFit fit = local_linear_mean(dataset, grid, h, kernel);
            double rss = 0.0;
            for (const auto& s : dataset.samples()) {
                for (std::size_t j = 0; j < s.size(); ++j) {
                    const double r = s.values[j] - fit.curve.at(s.times[j]);
                    rss += r * r;
                }
            }
            if (rss <= rss_floor) rss = 0.0;
            e.rss = rss;
            const double denom = 1.0 - e.df / n;
            e.score = rss / (denom * denom);
            e.feasible = true;
        } catch (const BandwidthError& err) {
            e.score = std::numeric_limits<double>::infinity();
            e.note = err.what();
        }
        result.trace.push_back(e);
    }
    result.selected = select_from_trace(result.trace, "the mean");
    return result;
}

double default_h_prime(const Dataset& dataset) {
    std::vector<double> counts;
    counts.reserve(dataset.size());
    for (const auto& s : dataset.samples())
        counts.push_back(static_cast<double>(s.size()));
    std::sort(counts.begin(), counts.end());
    const std::size_t n = counts.size();
    const double median =
        (n % 2 == 1) ? counts[n / 2] : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
    const double len = dataset.domain().length();
    return std::clamp(len / median, 0.02 * len, 0.25 * len);
}

std::vector<double> geometric_candidates(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0)
        throw ValidationError("invalid geometric candidate range");
    std::vector<double> out;
    out.reserve(count);
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(lo * std::exp(ratio * static_cast<double>(i)));
    out.back() = hi;
    return out;
}

} // namespace kfpca
