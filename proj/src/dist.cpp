#include "transq/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "transq/error.hpp"

namespace transq {

ArrivalDist ArrivalDist::uniform(double t0, double t_end) {
    ArrivalDist d;
    d.kind_ = ArrivalKind::uniform;
    d.t0_ = t0;
    d.t_end_ = t_end;
    d.validate_support();
    return d;
}

ArrivalDist ArrivalDist::triangular(double t0, double mode, double t_end) {
    ArrivalDist d;
    d.kind_ = ArrivalKind::triangular;
    d.t0_ = t0;
    d.t_end_ = t_end;
    d.mode_ = mode;
    d.validate_support();
    if (!(mode >= t0 && mode <= t_end)) throw InputError("triangular: mode must lie in [t0, t_end]");
    return d;
}

ArrivalDist ArrivalDist::piecewise_linear_cdf(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw InputError("piecewise_linear_cdf: need at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i].first > knots[i - 1].first)) throw InputError("piecewise_linear_cdf: knot times must increase");
        if (knots[i].second < knots[i - 1].second) throw InputError("piecewise_linear_cdf: cdf values must not decrease");
    }
    if (knots.front().second != 0.0 || knots.back().second != 1.0)
        throw InputError("piecewise_linear_cdf: cdf must run from 0 to 1");
    ArrivalDist d;
    d.kind_ = ArrivalKind::piecewise_linear_cdf;
    d.t0_ = knots.front().first;
    d.t_end_ = knots.back().first;
    d.knots_ = std::move(knots);
    d.validate_support();
    return d;
}

void ArrivalDist::validate_support() const {
    if (!std::isfinite(t0_) || !std::isfinite(t_end_)) throw InputError("arrival support must be finite");
    if (!(t0_ <= 0.0)) throw InputError("arrival support must start at or before 0 (t0 <= 0)");
    if (!(t_end_ > 0.0)) throw InputError("arrival support must end after 0 (t_end > 0)");
}

double ArrivalDist::cdf(double t) const {
    if (t <= t0_) return 0.0;
    if (t >= t_end_) return 1.0;
    switch (kind_) {
        case ArrivalKind::uniform:
            return (t - t0_) / (t_end_ - t0_);
        case ArrivalKind::triangular: {
            const double w = t_end_ - t0_;
            if (t <= mode_) return (t - t0_) * (t - t0_) / (w * (mode_ - t0_));
            return 1.0 - (t_end_ - t) * (t_end_ - t) / (w * (t_end_ - mode_));
        }
        case ArrivalKind::piecewise_linear_cdf: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                       [](double v, const auto& k) { return v < k.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            return lo.second + (hi.second - lo.second) * (t - lo.first) / (hi.first - lo.first);
        }
    }
    return 0.0;
}

double ArrivalDist::pdf(double t) const {
    if (t < t0_ || t >= t_end_) return 0.0;
    switch (kind_) {
        case ArrivalKind::uniform:
            return 1.0 / (t_end_ - t0_);
        case ArrivalKind::triangular: {
            const double w = t_end_ - t0_;
            if (t < mode_) return 2.0 * (t - t0_) / (w * (mode_ - t0_));
            return 2.0 * (t_end_ - t) / (w * (t_end_ - mode_));
        }
        case ArrivalKind::piecewise_linear_cdf: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                       [](double v, const auto& k) { return v < k.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            return (hi.second - lo.second) / (hi.first - lo.first);
        }
    }
    return 0.0;
}

double ArrivalDist::pdf_left(double t) const {
    if (t <= t0_ || t > t_end_) return 0.0;
    switch (kind_) {
        case ArrivalKind::uniform:
            return 1.0 / (t_end_ - t0_);
        case ArrivalKind::triangular: {
            const double w = t_end_ - t0_;
            if (t <= mode_) return 2.0 * (t - t0_) / (w * (mode_ - t0_));
            return 2.0 * (t_end_ - t) / (w * (t_end_ - mode_));
        }
        case ArrivalKind::piecewise_linear_cdf: {
            auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                                       [](const auto& k, double v) { return k.first < v; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            return (hi.second - lo.second) / (hi.first - lo.first);
        }
    }
    return 0.0;
}

double ArrivalDist::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw InputError("quantile: u must lie in [0, 1]");
    switch (kind_) {
        case ArrivalKind::uniform:
            return u >= 1.0 ? t_end_ : t0_ + u * (t_end_ - t0_);
        case ArrivalKind::triangular: {
            const double w = t_end_ - t0_;
            const double fc = (mode_ - t0_) / w;
            if (u <= fc) return t0_ + std::sqrt(u * w * (mode_ - t0_));
            return t_end_ - std::sqrt((1.0 - u) * w * (t_end_ - mode_));
        }
        case ArrivalKind::piecewise_linear_cdf: {
            // First knot segment whose upper cdf value reaches u; flat segments
            // are skipped so the quantile is the left-continuous inverse.
            auto it = std::lower_bound(knots_.begin() + 1, knots_.end(), u,
                                       [](const auto& k, double v) { return k.second < v; });
            if (it == knots_.end()) return t_end_;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            if (hi.second == lo.second) return lo.first;
            return lo.first + (u - lo.second) * (hi.first - lo.first) / (hi.second - lo.second);
        }
    }
    return t0_;
}

double ArrivalDist::sup_density() const {
    switch (kind_) {
        case ArrivalKind::uniform:
            return 1.0 / (t_end_ - t0_);
        case ArrivalKind::triangular:
            return 2.0 / (t_end_ - t0_);
        case ArrivalKind::piecewise_linear_cdf: {
            double m = 0.0;
            for (std::size_t i = 1; i < knots_.size(); ++i)
                m = std::max(m, (knots_[i].second - knots_[i - 1].second) / (knots_[i].first - knots_[i - 1].first));
            return m;
        }
    }
    return 0.0;
}

std::string ArrivalDist::name() const {
    std::ostringstream os;
    switch (kind_) {
        case ArrivalKind::uniform:
            os << "uniform[" << t0_ << "," << t_end_ << "]";
            break;
        case ArrivalKind::triangular:
            os << "triangular[" << t0_ << "," << mode_ << "," << t_end_ << "]";
            break;
        case ArrivalKind::piecewise_linear_cdf:
            os << "piecewise_linear_cdf[" << knots_.size() << " knots]";
            break;
    }
    return os.str();
}

ServiceDist ServiceDist::exponential(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("service: mu must be positive");
    ServiceDist g;
    g.kind_ = ServiceKind::exponential;
    g.mu_ = mu;
    g.sigma_ = 1.0 / mu;
    return g;
}

ServiceDist ServiceDist::deterministic(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("service: mu must be positive");
    ServiceDist g;
    g.kind_ = ServiceKind::deterministic;
    g.mu_ = mu;
    g.sigma_ = 0.0;
    return g;
}

ServiceDist ServiceDist::gamma(double mu, double sigma) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("service: mu must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("service: gamma sigma must be positive");
    ServiceDist g;
    g.kind_ = ServiceKind::gamma;
    g.mu_ = mu;
    g.sigma_ = sigma;
    return g;
}

double ServiceDist::sample(RngStream& rng) const {
    switch (kind_) {
        case ServiceKind::exponential:
            return rng.exponential(mu_);
        case ServiceKind::deterministic:
            return 1.0 / mu_;
        case ServiceKind::gamma: {
            // shape k and scale theta with k*theta = 1/mu, k*theta^2 = sigma^2
            const double theta = mu_ * sigma_ * sigma_;
            const double k = 1.0 / (mu_ * theta);
            return rng.gamma(k, theta);
        }
    }
    return 0.0;
}

std::string ServiceDist::name() const {
    std::ostringstream os;
    switch (kind_) {
        case ServiceKind::exponential:
            os << "exponential(mu=" << mu_ << ")";
            break;
        case ServiceKind::deterministic:
            os << "deterministic(mu=" << mu_ << ")";
            break;
        case ServiceKind::gamma:
            os << "gamma(mu=" << mu_ << ",sigma=" << sigma_ << ")";
            break;
    }
    return os.str();
}

std::vector<double> arrival_times_from_uniforms(const ArrivalDist& F, std::span<const double> u) {
    if (u.empty()) throw InputError("arrival population must be nonempty (n >= 1)");
    std::vector<double> t(u.size());
    std::transform(u.begin(), u.end(), t.begin(), [&](double v) { return F.quantile(v); });
    std::stable_sort(t.begin(), t.end());
    return t;
}

std::vector<double> sample_arrival_times(const ArrivalDist& F, std::size_t n, RngStream& rng) {
    if (n == 0) throw InputError("arrival population must be nonempty (n >= 1)");
    std::vector<double> u(n);
    for (auto& v : u) v = rng.uniform();
    return arrival_times_from_uniforms(F, u);
}

std::vector<double> sample_service_times(const ServiceDist& G, std::size_t n, RngStream& rng) {
    if (n == 0) throw InputError("service population must be nonempty (n >= 1)");
    std::vector<double> v(n);
    for (auto& x : v) x = G.sample(rng);
    return v;
}

std::vector<OrderStatDecay> first_order_statistic_decay(const ArrivalDist& F, std::span<const std::size_t> n_list,
                                                        std::size_t replications, uint64_t seed) {
    if (replications == 0) throw InputError("first_order_statistic_decay: replications must be >= 1");
    std::vector<OrderStatDecay> out;
    for (std::size_t n : n_list) {
        if (n == 0) throw InputError("arrival population must be nonempty (n >= 1)");
        std::vector<double> gaps(replications);
        for (std::size_t r = 0; r < replications; ++r) {
            RngStream rng(seed, splitmix64(static_cast<uint64_t>(n)) ^ r);
            double umin = 1.0;
            for (std::size_t i = 0; i < n; ++i) umin = std::min(umin, rng.uniform());
            gaps[r] = F.quantile(umin) - F.t0();
        }
        auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(replications / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        double med = *mid;
        if (replications % 2 == 0) med = 0.5 * (med + *std::max_element(gaps.begin(), mid));
        out.push_back({n, med});
    }
    return out;
}

}  // namespace transq
