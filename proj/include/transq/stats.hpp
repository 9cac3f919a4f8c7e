#pragma once

#include <span>
#include <vector>

namespace transq {

struct KsResult {
    double stat;
    double p;
};

double normal_cdf(double x);

// Q_KS(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), at least 20 terms.
double kolmogorov_q(double lambda);

// Two-sided one-sample KS against N(mean0, var0); asymptotic p-value with the
// Stephens small-sample correction of lambda.
KsResult ks_gaussian(std::span<const double> samples, double mean0, double var0);

// Two-sided two-sample KS with effective size nm/(n+m).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
// Unbiased (n-1) sample variance.
double variance(std::span<const double> v);
double stddev(std::span<const double> v);
double median(std::vector<double> v);

// Welford accumulator. Results depend on push order; callers push in
// replication order.
class RunningStats {
public:
    void push(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased
    double sem() const;       // standard error of the mean

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace transq
