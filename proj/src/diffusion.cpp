#include "transq/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transq/csv.hpp"
#include "transq/error.hpp"
#include "transq/stats.hpp"

namespace transq {

namespace {

// Cell increments of g below this magnitude are roundoff and read as zero.
constexpr double kIncrementRoundoff = 1e-12;

GridFunction brownian_path(const GridSpec& g, RngStream& rng) {
    std::vector<double> v(g.size(), 0.0);
    const double sd = std::sqrt(g.dt());
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + sd * rng.normal();
    return GridFunction(g, std::move(v), Interp::linear);
}

// Grid [0, H] with step dt, H the smallest multiple of dt covering `span`.
GridSpec horizon_grid(double span, double dt) {
    const auto cells = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(std::max(span, 0.0) / dt - 1e-9)));
    return GridSpec(0.0, static_cast<double>(cells) * dt, dt);
}

double sigma_mu32(const ServiceDist& G) { return G.sigma() * std::pow(G.mu(), 1.5); }

double max_minus_over(const NablaSet& nset, std::size_t k, const GridFunction& xhat, bool exclude_self) {
    double m = -std::numeric_limits<double>::infinity();
    for (const IndexRun& r : nset.runs(k))
        for (std::size_t s = r.lo; s <= r.hi; ++s)
            if (!(exclude_self && s == k)) m = std::max(m, -xhat.values[s]);
    return m;
}

}  // namespace

XhatMode parse_xhat_mode(const std::string& s) {
    if (s == "composition") return XhatMode::composition;
    if (s == "timechange") return XhatMode::timechange;
    throw InputError("unknown xhat mode '" + s + "' (expected composition or timechange)");
}

const char* xhat_mode_name(XhatMode m) { return m == XhatMode::composition ? "composition" : "timechange"; }

std::size_t default_bridge_cells(const GridSpec& grid) { return std::max<std::size_t>(1000, 4 * grid.cells()); }

BmDrivers sample_bm_bridge(const GridSpec& grid, RngStream& rng, std::size_t bridge_cells) {
    const std::size_t m = bridge_cells ? bridge_cells : default_bridge_cells(grid);
    if (m < 2) throw InputError("sample_bm_bridge: bridge needs at least 2 cells");
    GridFunction w = brownian_path(horizon_grid(grid.t_max(), grid.dt()), rng);
    GridFunction b = brownian_path(GridSpec(0.0, 1.0, 1.0 / static_cast<double>(m)), rng);
    const double b1 = b.values.back();
    for (std::size_t j = 0; j <= m; ++j) b.values[j] -= (static_cast<double>(j) / static_cast<double>(m)) * b1;
    b.values.front() = 0.0;
    b.values.back() = 0.0;
    return BmDrivers{std::move(w), std::move(b)};
}

GridFunction sample_xhat(const FluidSolution& fl, const ServiceDist& G, const BmDrivers& d) {
    const double c = sigma_mu32(G);
    const double h = d.w.grid.t_max();
    const double tol = 1e-9 * std::max(1.0, h);
    std::vector<double> v(fl.grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double b = fl.bbar.values[k];
        if (b < -tol || b > h + tol) throw InternalError("sample_xhat: busy time " + fmt(b) + " outside BM horizon");
        v[k] = d.w0(fl.F.cdf(fl.grid.at(k))) - c * d.w(std::clamp(b, 0.0, h));
    }
    return GridFunction(fl.grid, std::move(v), Interp::linear);
}

GridFunction sample_xhat_timechange(const FluidSolution& fl, const ServiceDist& G, RngStream& rng) {
    const VarianceEnvelope env = variance_envelopes(fl, G);
    std::vector<double> v(fl.grid.size(), 0.0);
    for (std::size_t k = 1; k < v.size(); ++k) {
        double dg = env.g.values[k] - env.g.values[k - 1];
        if (dg < 0.0) {
            if (dg < -kIncrementRoundoff)
                throw InputError("timechange mode needs nondecreasing g; it decreases at t=" + fmt(fl.grid.at(k)));
            dg = 0.0;
        }
        v[k] = v[k - 1] + std::sqrt(dg) * rng.normal();
    }
    return GridFunction(fl.grid, std::move(v), Interp::linear);
}

QhatPair sample_qhat(const FluidSolution& fl, const NablaSet& nset, const GridFunction& xhat) {
    GridFunction y = directional_derivative(fl.xbar, xhat, nset);
    GridFunction q = xhat + y;
    q.interp = y.interp;
    return QhatPair{std::move(y), std::move(q)};
}

GridFunction sample_bhat(const FluidSolution& fl, const GridFunction& ytilde) {
    GridFunction b = (1.0 / fl.mu) * ytilde;
    b.interp = ytilde.interp;
    return b;
}

GridFunction sample_zhat(const FluidSolution& fl, const ServiceDist& G, const GridFunction& qhat, RngStream& rng) {
    require_same_grid(fl.qbar, qhat, "sample_zhat");
    double top = 0.0;
    for (double q : fl.qbar.values) top = std::max(top, q / fl.mu);
    const GridFunction wstar = brownian_path(horizon_grid(top, fl.grid.dt()), rng);
    const double c = G.sigma() * std::sqrt(fl.mu);
    std::vector<double> v(qhat.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double s = fl.qbar.values[k] > fl.eps ? fl.qbar.values[k] / fl.mu : 0.0;
        v[k] = qhat.values[k] / fl.mu - (s > 0.0 ? c * wstar(s) : 0.0);
    }
    return GridFunction(fl.grid, std::move(v), qhat.interp);
}

std::vector<PointTag> realized_tags(const NablaSet& nset, const RegimeAnnotation& ann, const GridFunction& xhat) {
    std::vector<PointTag> out;
    for (std::size_t k : ann.discontinuity_points()) {
        const Continuity cap = ann.continuity[k];
        const double self = nset.contains(k, k) ? -xhat.values[k] : -std::numeric_limits<double>::infinity();
        const double others = max_minus_over(nset, k, xhat, true);
        Continuity tag = Continuity::continuous;
        switch (cap) {
            case Continuity::discontinuity_capable:
                tag = self > others ? Continuity::left_discontinuity : Continuity::right_discontinuity;
                break;
            case Continuity::left_discontinuity:
                if (self > others) tag = Continuity::left_discontinuity;
                break;
            case Continuity::right_discontinuity:
                if (others >= self) tag = Continuity::right_discontinuity;
                break;
            case Continuity::continuous:
                break;
        }
        out.push_back(PointTag{k, tag});
    }
    return out;
}

DiffusionSample sample_diffusion(const FluidSolution& fl, const ServiceDist& G, const NablaSet& nset,
                                 const RegimeAnnotation& ann, XhatMode mode, RngStream& rng) {
    std::optional<BmDrivers> drivers;
    std::optional<GridFunction> xhat;
    if (mode == XhatMode::composition) {
        drivers = sample_bm_bridge(fl.grid, rng);
        xhat = sample_xhat(fl, G, *drivers);
    } else {
        xhat = sample_xhat_timechange(fl, G, rng);
    }
    QhatPair qp = sample_qhat(fl, nset, *xhat);
    std::vector<PointTag> tags = realized_tags(nset, ann, *xhat);
    // The first realized jump decides which side the path is continuous from.
    Interp side = Interp::linear;
    for (const PointTag& t : tags) {
        if (t.tag == Continuity::left_discontinuity) {
            side = Interp::right_constant;
            break;
        }
        if (t.tag == Continuity::right_discontinuity) {
            side = Interp::left_constant;
            break;
        }
    }
    qp.ytilde.interp = side;
    qp.qhat.interp = side;
    GridFunction bhat = sample_bhat(fl, qp.ytilde);
    RngStream zrng = rng.derive(1);
    GridFunction zhat = sample_zhat(fl, G, qp.qhat, zrng);
    return DiffusionSample{std::move(drivers), std::move(*xhat), std::move(qp.ytilde), std::move(qp.qhat),
                           std::move(bhat),    std::move(zhat),  std::move(tags)};
}

VarianceEnvelope variance_envelopes(const FluidSolution& fl, const ServiceDist& G) {
    const double c = G.sigma() * G.sigma() * std::pow(fl.mu, 3.0);
    std::vector<double> g(fl.grid.size()), s2(fl.grid.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double F = fl.F.cdf(fl.grid.at(k));
        g[k] = F * (1.0 - F) + c * fl.bbar.values[k];
        s2[k] = fl.qbar.values[k] > fl.eps ? g[k] : 0.0;
    }
    return VarianceEnvelope{GridFunction(fl.grid, std::move(g)), GridFunction(fl.grid, std::move(s2))};
}

double usc_jump_tolerance(const FluidSolution& fl, const ServiceDist& G) {
    const double c = G.sigma() * G.sigma() * std::pow(fl.mu, 3.0);
    double worst = 0.0;
    for (std::size_t k = 1; k < fl.grid.size(); ++k) {
        const double dF = std::abs(fl.F.cdf(fl.grid.at(k)) - fl.F.cdf(fl.grid.at(k - 1)));
        const double dB = std::abs(fl.bbar.values[k] - fl.bbar.values[k - 1]);
        worst = std::max(worst, dF + c * dB);
    }
    return 8.0 * std::sqrt(worst);
}

double overloaded_initial(const NablaSet& nset, const GridFunction& xhat, std::size_t k_star) {
    return xhat.values.at(k_star) + max_minus_over(nset, k_star, xhat, false);
}

OverloadedPath approx_overloaded(const FluidSolution& fl, const ServiceDist& G, double t_star, double tau,
                                 std::size_t n, double initial, RngStream& rng) {
    if (n == 0) throw InputError("approx_overloaded: n must be positive");
    if (!(tau > t_star)) throw InputError("approx_overloaded: need t_star < tau");
    const GridSpec& gr = fl.grid;
    const std::size_t k0 = gr.floor_index(t_star);
    std::size_t k1 = gr.floor_index(tau);
    if (gr.at(k1) < tau - 1e-9 * gr.dt() && k1 + 1 < gr.size()) ++k1;
    if (k1 < k0 + 2) throw InputError("approx_overloaded: interval shorter than two grid cells");
    const GridSpec sub(gr.at(k0), gr.at(k1), gr.dt());
    const VarianceEnvelope env = variance_envelopes(fl, G);
    const double rn = std::sqrt(static_cast<double>(n));
    OverloadedPath out{GridFunction(sub, 0.0), {}};
    out.path.values[0] = initial;
    std::size_t coarse = 0, clipped = 0;
    for (std::size_t j = 1; j < sub.size(); ++j) {
        const std::size_t k = k0 + j;
        // Drift integrated over the cell; equals f(t_k) - mu 1{t_k >= 0} times dt
        // wherever f is constant on the cell.
        const double drift = rn * (fl.xbar.values[k] - fl.xbar.values[k - 1]);
        double dg = env.g.values[k] - env.g.values[k - 1];
        if (dg < 0.0) {
            if (dg < -kIncrementRoundoff) ++clipped;
            dg = 0.0;
        }
        if (std::abs(drift) > 0.1 * std::sqrt(dg)) ++coarse;
        out.path.values[j] = out.path.values[j - 1] + drift + std::sqrt(dg) * rng.normal();
    }
    if (coarse)
        out.warnings.push_back("step dt=" + fmt(gr.dt()) + " coarse relative to drift in " + fmt(coarse) + " of " +
                               fmt(sub.cells()) + " cells");
    if (clipped) out.warnings.push_back("g decreases in " + fmt(clipped) + " cells; noise set to 0 there");
    return out;
}

double approx_critical(const GridFunction& xhat, double t_star, double t) {
    if (t < t_star) throw InputError("approx_critical: need t >= t_star");
    const std::size_t k0 = xhat.grid.nearest(t_star);
    const std::size_t k1 = xhat.grid.nearest(t);
    double low = 0.0;
    for (std::size_t k = k0; k <= k1; ++k) low = std::min(low, xhat.values[k] - xhat.values[k0]);
    return xhat.values[k1] - xhat.values[k0] - low;
}

double EmptyingSummary::predicted_mean(std::size_t n) const {
    return time - mean / std::sqrt(static_cast<double>(n));
}

double EmptyingSummary::predicted_std(std::size_t n) const { return std / std::sqrt(static_cast<double>(n)); }

EmptyingSummary emptying_time(const FluidSolution& fl, const NablaSet& nset,
                              const std::vector<GridFunction>& xhat_samples, std::size_t k_end) {
    if (k_end >= fl.grid.size()) throw InputError("emptying_time: index outside grid");
    const double t = fl.grid.at(k_end);
    const double slope = fl.F.pdf_left(t) - fl.mu;
    if (std::abs(slope) <= 1e-12 * std::max(1.0, fl.mu))
        throw InputError("emptying_time: zero denominator, f(t-) equals mu at t=" + fmt(t));
    if (nset.count(k_end) < 2 || !nset.contains(k_end, k_end))
        throw InputError("emptying_time: t=" + fmt(t) + " is not an end of overloading");
    EmptyingSummary s{k_end, t, slope, {}, 0.0, 0.0};
    s.samples.reserve(xhat_samples.size());
    for (const GridFunction& x : xhat_samples) {
        require_same_grid(fl.xbar, x, "emptying_time");
        s.samples.push_back((x.values[k_end] + max_minus_over(nset, k_end, x, true)) / slope);
    }
    if (!s.samples.empty()) s.mean = mean(s.samples);
    if (s.samples.size() > 1) s.std = stddev(s.samples);
    return s;
}

std::optional<std::size_t> first_emptying_index(const FluidSolution& fl) {
    for (const Excursion& e : fl.excursions)
        if (e.end && e.last_index + 1 < fl.grid.size()) return e.last_index + 1;
    return std::nullopt;
}

}  // namespace transq
