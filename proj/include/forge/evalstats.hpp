#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forge/geometry.hpp"

namespace forge {

struct ErrorSample {
    std::string frontier_id;
    std::string estimator;
    /// Signed error: estimate minus truth, in cells.
    double d = 0.0;

    double abs() const { return std::abs(d); }
};

/// Lower median: element ceil(n/2) of the sorted values (1-based).
inline double lower_median(std::vector<double> values)
{
    if (values.empty()) throw std::invalid_argument("median of an empty sample");
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

/// Fraction of `sorted` values <= x.
inline double empirical_cdf(std::span<const double> sorted, double x)
{
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

/// Two-sample Kolmogorov-Smirnov statistic: sup_x |F_a(x) - F_b(x)|,
/// evaluated exactly at every distinct sample value.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap (2.5 / 97.5) of the lower median. Trial t draws from
/// its own generator seeded by mixing `seed` and t.
inline ConfidenceInterval bootstrap_median_ci(std::span<const double> values, std::size_t trials, std::uint64_t seed,
                                              double level = 0.95)
{
    if (values.empty()) throw std::invalid_argument("bootstrap of an empty sample");
    std::vector<double> medians;
    medians.reserve(trials);
    std::vector<double> resample(values.size());
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + t + 1);
        for (auto& v : resample) v = values[rng() % values.size()];
        medians.push_back(lower_median(resample));
    }
    std::sort(medians.begin(), medians.end());
    const double tail = 0.5 * (1.0 - level);
    auto quantile = [&medians](double q) {
        const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(medians.size() - 1) + 0.5));
        return medians[std::min(idx, medians.size() - 1)];
    };
    if (medians.empty()) return {};
    return {quantile(tail), quantile(1.0 - tail)};
}

struct CdfPoint {
    double x;
    double f;
};

struct EstimatorSummary {
    std::string estimator;
    std::size_t count = 0;
    /// Median absolute error, cells.
    double mae = 0.0;
    ConfidenceInterval ci;
    double under = 0.0;
    double over = 0.0;
    double exact = 0.0;
    std::vector<double> abs_errors;  // sorted
};

struct KsEntry {
    std::string a;
    std::string b;
    double statistic;
};

struct EvalReport {
    std::vector<EstimatorSummary> estimators;
    std::vector<KsEntry> ks;
    std::vector<std::string> warnings;
};

/// Per-estimator MAE with bootstrap CI, under/over/exact frequencies and the
/// pairwise KS statistics of the absolute-error distributions.
inline EvalReport summarize(std::span<const ErrorSample> errors, std::size_t trials, std::uint64_t seed,
                            std::span<const std::string> estimators = {})
{
    std::map<std::string, std::vector<double>> signed_by;
    std::vector<std::string> order(estimators.begin(), estimators.end());
    for (const auto& e : errors) {
        if (!signed_by.contains(e.estimator) && std::find(order.begin(), order.end(), e.estimator) == order.end())
            order.push_back(e.estimator);
        signed_by[e.estimator].push_back(e.d);
    }

    EvalReport report;
    for (const auto& name : order) {
        const auto it = signed_by.find(name);
        if (it == signed_by.end() || it->second.empty()) {
            report.warnings.push_back("estimator " + name + " has no error samples; skipped");
            continue;
        }
        const auto& ds = it->second;
        EstimatorSummary s;
        s.estimator = name;
        s.count = ds.size();
        for (double d : ds) {
            s.abs_errors.push_back(std::abs(d));
            s.under += d < 0.0 ? 1.0 : 0.0;
            s.over += d > 0.0 ? 1.0 : 0.0;
            s.exact += d == 0.0 ? 1.0 : 0.0;
        }
        const double n = static_cast<double>(ds.size());
        s.under /= n;
        s.over /= n;
        s.exact /= n;
        std::sort(s.abs_errors.begin(), s.abs_errors.end());
        s.mae = lower_median(s.abs_errors);
        s.ci = bootstrap_median_ci(s.abs_errors, trials, seed);
        report.estimators.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < report.estimators.size(); ++i)
        for (std::size_t j = i + 1; j < report.estimators.size(); ++j)
            report.ks.push_back({report.estimators[i].estimator, report.estimators[j].estimator,
                                 ks_two_sample(report.estimators[i].abs_errors, report.estimators[j].abs_errors)});
    return report;
}

/// CDF of the sorted absolute errors at x_i = max * i / bins, i = 0..bins.
/// The last point is the maximum, where F = 1.
inline std::vector<CdfPoint> export_cdf(std::span<const double> sorted_abs, std::size_t bins)
{
    std::vector<CdfPoint> out;
    if (sorted_abs.empty()) return out;
    bins = std::max<std::size_t>(bins, 1);
    const double hi = sorted_abs.back();
    for (std::size_t i = 0; i <= bins; ++i) {
        const double x = i == bins ? hi : hi * static_cast<double>(i) / static_cast<double>(bins);
        out.push_back({x, empirical_cdf(sorted_abs, x)});
    }
    return out;
}

/// Fraction of total predicted length that lies strictly outside the closed
/// perimeter polygon. Segments are split where they cross the perimeter.
inline double outside_perimeter_fraction(std::span<const Segment> predicted, std::span<const Point> perimeter)
{
    if (perimeter.size() < 4 || perimeter.front() != perimeter.back())
        throw std::invalid_argument("perimeter must be a closed polyline");
    const auto polygon = perimeter.first(perimeter.size() - 1);
    double total = 0.0, outside = 0.0;
    for (const auto& s : predicted) {
        const double len = s.length();
        if (len == 0.0) continue;
        total += len;
        std::vector<double> cuts{0.0, 1.0};
        for (std::size_t i = 0; i + 1 < perimeter.size(); ++i)
            if (auto t = segment_intersection_param(s, {perimeter[i], perimeter[i + 1]})) cuts.push_back(*t);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (cuts[k + 1] <= cuts[k]) continue;
            const Point mid = s.at(0.5 * (cuts[k] + cuts[k + 1]));
            const bool on_boundary = point_polyline_distance(mid, perimeter) < 1e-9;
            if (!on_boundary && !point_in_polygon(mid, polygon)) outside += (cuts[k + 1] - cuts[k]) * len;
        }
    }
    return total > 0.0 ? outside / total : 0.0;
}

}  // namespace forge
