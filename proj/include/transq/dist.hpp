#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "transq/rng.hpp"

namespace transq {

enum class ArrivalKind { uniform, triangular, piecewise_linear_cdf };

// Arrival-time distribution F supported on [t0, t_end] with t0 <= 0 < t_end.
// The piecewise-linear kind holds knots (t_i, F_i) with F nondecreasing from
// 0 to 1; the triangular kind keeps its mode in `mode`.
class ArrivalDist {
public:
    static ArrivalDist uniform(double t0, double t_end);
    static ArrivalDist triangular(double t0, double mode, double t_end);
    static ArrivalDist piecewise_linear_cdf(std::vector<std::pair<double, double>> knots);

    ArrivalKind kind() const { return kind_; }
    double t0() const { return t0_; }
    double t_end() const { return t_end_; }
    double mode() const { return mode_; }
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }

    double cdf(double t) const;
    // Right density; at a kink the density of the segment starting at t.
    double pdf(double t) const;
    // Left density; at a kink the density of the segment ending at t.
    double pdf_left(double t) const;
    double quantile(double u) const;
    double sup_density() const;

    std::string name() const;

private:
    ArrivalDist() = default;
    void validate_support() const;

    ArrivalKind kind_ = ArrivalKind::uniform;
    double t0_ = 0.0;
    double t_end_ = 1.0;
    double mode_ = 0.0;
    std::vector<std::pair<double, double>> knots_;
};

enum class ServiceKind { exponential, deterministic, gamma };

// Unscaled service law G with mean 1/mu and standard deviation sigma.
class ServiceDist {
public:
    static ServiceDist exponential(double mu);
    static ServiceDist deterministic(double mu);
    static ServiceDist gamma(double mu, double sigma);

    ServiceKind kind() const { return kind_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double sample(RngStream& rng) const;
    std::string name() const;

private:
    ServiceDist() = default;

    ServiceKind kind_ = ServiceKind::exponential;
    double mu_ = 1.0;
    double sigma_ = 1.0;
};

// Sorted order statistics T(1) <= ... <= T(n) of n i.i.d. draws from F.
std::vector<double> sample_arrival_times(const ArrivalDist& F, std::size_t n, RngStream& rng);
// Same construction from caller-supplied uniforms, for deterministic checks.
std::vector<double> arrival_times_from_uniforms(const ArrivalDist& F, std::span<const double> u);

// Unscaled service requirements nu_i; the queue serves nu_i / n.
std::vector<double> sample_service_times(const ServiceDist& G, std::size_t n, RngStream& rng);

struct OrderStatDecay {
    std::size_t n = 0;
    double median_gap = 0.0;  // median of T(1) - t0 over replications
};

// Replication r for population n draws from stream (seed, hash(n, r)).
std::vector<OrderStatDecay> first_order_statistic_decay(const ArrivalDist& F, std::span<const std::size_t> n_list,
                                                        std::size_t replications, uint64_t seed);

}  // namespace transq
