#include "kfpca/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "kfpca/errors.hpp"

namespace kfpca {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& field, long row, const char* what) {
    double value{};
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("row " + std::to_string(row) + ": cannot parse " + what + " '" +
                             field + "'",
                         row);
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Dataset read_long_csv(const std::filesystem::path& path, std::optional<Domain> domain) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty file '" + path.string() + "'", 0);
    {
        const auto header = split_csv(line);
        if (header.size() != 3 || header[0] != "subject_id" || header[1] != "time" ||
            header[2] != "value")
            throw ParseError("expected header 'subject_id,time,value'", 0);
    }

    // Subjects keep first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> by_subject;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw ParseError("row " + std::to_string(row) + ": expected 3 fields, got " +
                                 std::to_string(fields.size()),
                             row);
        if (fields[0].empty())
            throw ParseError("row " + std::to_string(row) + ": empty subject_id", row);
        const double t = parse_double(fields[1], row, "time");
        const double y = parse_double(fields[2], row, "value");
        if (domain && !domain->contains(t))
            throw ValidationError("row " + std::to_string(row) + ": time " + format_double(t) +
                                  " outside the explicit domain");
        auto [it, inserted] = by_subject.try_emplace(fields[0]);
        if (inserted) order.push_back(fields[0]);
        it->second.emplace_back(t, y);
    }
    if (order.size() < 2)
        throw ValidationError("dataset needs at least 2 subjects, found " +
                              std::to_string(order.size()));

    Domain resolved = domain.value_or(Domain{});
    if (!domain) {
        double lo = by_subject.begin()->second.front().first, hi = lo;
        for (const auto& [id, obs] : by_subject)
            for (const auto& [t, y] : obs) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        resolved = Domain(lo, hi);
    }

    std::vector<SparseSample> samples;
    samples.reserve(order.size());
    for (const auto& id : order) {
        auto& obs = by_subject[id];
        std::sort(obs.begin(), obs.end());
        SparseSample sample;
        sample.subject_id = id;
        for (std::size_t j = 0; j < obs.size(); ++j) {
            if (j > 0 && obs[j].first == obs[j - 1].first)
                throw ValidationError("subject '" + id + "': duplicate time " +
                                      format_double(obs[j].first));
            sample.times.push_back(obs[j].first);
            sample.values.push_back(obs[j].second);
        }
        samples.push_back(std::move(sample));
    }
    return Dataset(resolved, std::move(samples));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

} // namespace

void write_long_csv(const Dataset& dataset, const std::filesystem::path& path) {
    if (dataset.samples().empty())
        throw ValidationError("refusing to write a dataset with no samples");
    auto out = open_out(path);
    out << "subject_id,time,value\n";
    for (const auto& sample : dataset.samples())
        for (std::size_t j = 0; j < sample.size(); ++j)
            out << sample.subject_id << ',' << format_double(sample.times[j]) << ','
                << format_double(sample.values[j]) << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_surface_csv(const SurfaceEstimate& surface, const std::filesystem::path& path) {
    auto out = open_out(path);
    const auto& pts = surface.grid.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        out << (i ? "," : "") << format_double(pts[i]);
    out << '\n';
    for (Eigen::Index a = 0; a < surface.values.rows(); ++a) {
        for (Eigen::Index b = 0; b < surface.values.cols(); ++b)
            out << (b ? "," : "") << format_double(surface.values(a, b));
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_points_csv(std::span<const RawSurfacePoint> points,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "s,t,value,subject_index\n";
    for (const auto& p : points)
        out << format_double(p.s) << ',' << format_double(p.t) << ',' << format_double(p.value)
            << ',' << p.subject_index << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_curve_csv(const Curve& curve, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "time,value\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out << format_double(curve.grid[i]) << ',' << format_double(curve.values[i]) << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_scores_csv(std::span<const ScoreEstimate> scores, std::size_t truncation,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "subject_id";
    for (std::size_t k = 1; k <= truncation; ++k) out << ",score_" << k;
    out << ",usable\n";
    for (const auto& s : scores) {
        out << s.subject_id;
        for (std::size_t k = 0; k < truncation; ++k) {
            out << ',';
            if (s.usable) out << format_double(s.scores[k]);
        }
        out << ',' << (s.usable ? "true" : "false") << '\n';
    }
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_predictions_csv(std::span<const PredictionRow> rows,
                           const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "subject_id,time,predicted\n";
    for (const auto& r : rows)
        out << r.subject_id << ',' << format_double(r.time) << ',' << format_double(r.predicted)
            << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

} // namespace kfpca
