#include "transq/stats.hpp"

#include <algorithm>
#include <cmath>

#include "transq/error.hpp"

namespace transq {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (k >= 20 && term < 1e-17 * std::abs(sum)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double p_from_stat(double d, double ne) {
    const double s = std::sqrt(ne);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

KsResult ks_gaussian(std::span<const double> samples, double mean0, double var0) {
    if (samples.empty()) throw InputError("ks_gaussian: no samples");
    if (!(var0 > 0.0)) throw InputError("ks_gaussian: reference variance must be positive");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double sd = std::sqrt(var0);
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = normal_cdf((x[i] - mean0) / sd);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return {d, p_from_stat(d, n)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return {d, p_from_stat(d, n * m / (n + m))};
}

double mean(std::span<const double> v) {
    if (v.empty()) throw InputError("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw InputError("variance: need at least two samples");
    RunningStats rs;
    for (double x : v) rs.push(x);
    return rs.variance();
}

double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

double median(std::vector<double> v) {
    if (v.empty()) throw InputError("median: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void RunningStats::push(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

double RunningStats::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double RunningStats::sem() const { return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_)); }

}  // namespace transq
