#include "transq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transq/csv.hpp"
#include "transq/error.hpp"

namespace transq {

namespace {

double netput_at(const ArrivalDist& F, double mu, double t) { return F.cdf(t) - (t >= 0.0 ? mu * t : 0.0); }

void check_grid(const ArrivalDist& F, const GridSpec& grid) {
    const double tol = 1e-9 * std::max(1.0, std::abs(F.t0()));
    if (grid.t_min() > F.t0() + tol) throw InputError("grid must start at or before the arrival support start t0");
}

// Zero of X(t) + level on [a, b], with X(a) + level > 0 and X(b) + level <= 0.
double bisect_crossing(const ArrivalDist& F, double mu, double level, double a, double b) {
    if (netput_at(F, mu, b) + level > 0.0) return b;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        double m = 0.5 * (a + b);
        if (netput_at(F, mu, m) + level > 0.0)
            a = m;
        else
            b = m;
    }
    return b;
}

}  // namespace

GridFunction fluid_netput(const ArrivalDist& F, double mu, const GridSpec& grid, std::vector<std::string>* warnings) {
    if (!(mu > 0.0)) throw InputError("fluid_netput: mu must be positive");
    check_grid(F, grid);
    if (warnings && !(grid.t_max() > F.t_end()))
        warnings->push_back("horizon " + fmt(grid.t_max()) + " does not exceed arrival support end " +
                            fmt(F.t_end()) + "; the queue may not drain inside the window");
    GridFunction x(grid, 0.0, Interp::linear);
    for (std::size_t k = 0; k < grid.size(); ++k) x.values[k] = netput_at(F, mu, grid.at(k));
    return x;
}

FluidSolution solve_fluid(const ArrivalDist& F, double mu, const GridSpec& grid, std::optional<double> eps_in) {
    std::vector<std::string> warnings;
    GridFunction x = fluid_netput(F, mu, grid, &warnings);
    const double eps = eps_in ? *eps_in : default_nabla_eps(x);
    if (!(eps > 0.0)) throw InputError("solve_fluid: eps must be positive");
    GridFunction ps = psi(x);
    GridFunction q = phi(x);
    GridFunction b(grid, 0.0, Interp::linear);
    GridFunction z(grid, 0.0, Interp::linear);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.at(k);
        b.values[k] = (t >= 0.0 ? t : 0.0) - ps.values[k] / mu;
        z.values[k] = q.values[k] / mu - (t <= 0.0 ? t : 0.0);
    }

    std::vector<Excursion> exc;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (q.values[k] <= eps) continue;
        Excursion e{k == 0 ? grid.at(0) : grid.at(k - 1), std::nullopt, k, k};
        while (k + 1 < grid.size() && q.values[k + 1] > eps) ++k;
        e.last_index = k;
        if (k + 1 < grid.size())
            e.end = bisect_crossing(F, mu, ps.values[k], grid.at(k), grid.at(k + 1));
        else
            warnings.push_back("fluid queue still positive at the horizon " + fmt(grid.t_max()));
        exc.push_back(e);
    }

    std::optional<double> tau;
    if (!exc.empty() && exc.front().end) tau = exc.front().end;

    std::optional<double> t_tilde;
    const double T = F.t_end();
    if (T <= grid.t_max()) {
        bool busy_at_T = false;
        for (const auto& e : exc) {
            if (e.start < T && (!e.end || T < *e.end)) {
                busy_at_T = true;
                t_tilde = e.end;
            }
        }
        if (!busy_at_T) t_tilde = T;
    }

    GridFunction rp = traffic_intensity(F, mu, grid, RhoVariant::supremum, t_tilde);
    GridFunction re = traffic_intensity(F, mu, grid, RhoVariant::effective, t_tilde);
    return FluidSolution{F,
                         mu,
                         grid,
                         eps,
                         std::move(x),
                         std::move(ps),
                         std::move(q),
                         std::move(b),
                         std::move(z),
                         std::move(rp),
                         std::move(re),
                         tau,
                         t_tilde,
                         std::move(exc),
                         std::move(warnings)};
}

GridFunction traffic_intensity(const ArrivalDist& F, double mu, const GridSpec& grid, RhoVariant variant,
                               std::optional<double> t_tilde) {
    if (!(mu > 0.0)) throw InputError("traffic_intensity: mu must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> Fv(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) Fv[k] = F.cdf(grid.at(k));
    GridFunction rho(grid, 0.0, Interp::linear);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.at(k);
        if (t <= 0.0) {
            rho.values[k] = inf;
            continue;
        }
        if (variant == RhoVariant::supremum && t_tilde && t > *t_tilde) {
            rho.values[k] = 0.0;
            continue;
        }
        double best = F.pdf_left(t) / mu;
        const double Ft = Fv[k];
        if (variant == RhoVariant::supremum) {
            best = std::max(best, (Ft - F.cdf(0.0)) / (mu * t));
            for (std::size_t r = 0; r < k; ++r) {
                const double tr = grid.at(r);
                if (tr < 0.0) continue;
                best = std::max(best, (Ft - Fv[r]) / (mu * (t - tr)));
            }
        } else {
            for (std::size_t r = 0; r < k; ++r) {
                const double tr = grid.at(r);
                best = std::max(best, (Ft - Fv[r]) / (mu * (t - std::max(tr, 0.0))));
            }
        }
        rho.values[k] = best;
    }
    return rho;
}

}  // namespace transq
