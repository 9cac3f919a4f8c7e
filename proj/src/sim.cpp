#include "transq/sim.hpp"

#include <algorithm>
#include <cmath>

#include "transq/error.hpp"

namespace transq {

void validate_sim_config(const SimConfig& cfg) {
    if (cfg.n == 0) throw InputError("simulation population n must be >= 1");
    const double tol = 1e-9 * std::max(1.0, std::abs(cfg.F.t0()));
    if (cfg.grid.t_min() > cfg.F.t0() + tol) throw InputError("grid must start at or before the arrival support start");
    if (cfg.grid.t_max() < cfg.F.t_end()) throw InputError("grid must cover the arrival support");
}

namespace {

// Sweeps the piecewise-constant queue process forward in time. Events at the
// same instant are all applied before the state is read.
class Sweep {
public:
    Sweep(const QueueTrajectory& tr) : tr_(tr), cur_(tr.grid.t_min()) {
        prefix_.resize(tr.n + 1, 0.0);
        for (std::size_t i = 0; i < tr.n; ++i) prefix_[i + 1] = prefix_[i] + tr.service[i];
    }

    QueueState advance(double t) {
        for (;;) {
            const double ta = ia_ < tr_.n ? tr_.arrival[ia_] : INFINITY;
            const double td = id_ < tr_.n ? tr_.departure[id_] : INFINITY;
            const double next = std::min(ta, td);
            if (next > t) break;
            integrate(next);
            while (ia_ < tr_.n && tr_.arrival[ia_] == next) ++ia_;
            while (id_ < tr_.n && tr_.departure[id_] == next) ++id_;
        }
        integrate(t);
        QueueState s;
        s.A = static_cast<double>(ia_);
        s.SB = static_cast<double>(id_);
        s.Q = s.A - s.SB;
        s.B = busy_;
        s.I = t >= 0.0 ? t - busy_ : 0.0;
        s.Y = empty_;
        // Nonnegative in exact arithmetic; the clamp drops summation roundoff.
        s.Z = std::max(0.0, prefix_[ia_] - busy_ - (t <= 0.0 ? t : 0.0));
        return s;
    }

private:
    void integrate(double to) {
        if (to <= cur_) return;
        if (ia_ == id_)
            empty_ += to - cur_;
        else if (to > 0.0)
            busy_ += to - std::max(cur_, 0.0);
        cur_ = to;
    }

    const QueueTrajectory& tr_;
    std::vector<double> prefix_;
    double cur_;
    std::size_t ia_ = 0;
    std::size_t id_ = 0;
    double busy_ = 0.0;
    double empty_ = 0.0;
};

}  // namespace

QueueState QueueTrajectory::state_at(double t) const {
    Sweep sw(*this);
    return sw.advance(t);
}

double QueueTrajectory::first_empty_time(double from) const {
    if (state_at(from).Q == 0.0) return from;
    for (std::size_t i = 0; i < n; ++i) {
        if (departure[i] < from) continue;
        if (i + 1 == n || arrival[i + 1] > departure[i]) return departure[i];
    }
    return departure.empty() ? from : departure.back();
}

QueueTrajectory simulate_from(const GridSpec& grid, std::vector<double> arrivals, std::span<const double> nu) {
    const std::size_t n = arrivals.size();
    if (n == 0) throw InputError("simulation population n must be >= 1");
    if (nu.size() != n) throw InputError("simulate: one service requirement per arrival required");
    if (!std::is_sorted(arrivals.begin(), arrivals.end())) throw InputError("simulate: arrival times must be sorted");
    if (arrivals.front() < grid.t_min()) throw InputError("simulate: arrival before the grid start");
    QueueTrajectory tr{n,
                       grid,
                       std::move(arrivals),
                       std::vector<double>(n),
                       std::vector<double>(n),
                       std::vector<double>(n),
                       GridFunction(grid, 0.0, Interp::right_constant),
                       GridFunction(grid, 0.0, Interp::right_constant),
                       GridFunction(grid, 0.0, Interp::right_constant),
                       GridFunction(grid, 0.0, Interp::linear),
                       GridFunction(grid, 0.0, Interp::linear),
                       GridFunction(grid, 0.0, Interp::linear),
                       GridFunction(grid, 0.0, Interp::right_constant)};
    const double scale = 1.0 / static_cast<double>(n);
    double prev_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (nu[i] < 0.0) throw InputError("simulate: negative service requirement");
        tr.service[i] = nu[i] * scale;
        tr.start[i] = std::max({tr.arrival[i], 0.0, prev_d});
        tr.departure[i] = tr.start[i] + tr.service[i];
        prev_d = tr.departure[i];
    }
    Sweep sw(tr);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        QueueState s = sw.advance(grid.at(k));
        tr.A.values[k] = s.A;
        tr.SB.values[k] = s.SB;
        tr.Q.values[k] = s.Q;
        tr.B.values[k] = s.B;
        tr.I.values[k] = s.I;
        tr.Y.values[k] = s.Y;
        tr.Z.values[k] = s.Z;
    }
    return tr;
}

QueueTrajectory simulate(const SimConfig& cfg, uint64_t replication) {
    validate_sim_config(cfg);
    RngStream rng(cfg.seed, replication);
    std::vector<double> arrivals = sample_arrival_times(cfg.F, cfg.n, rng);
    std::vector<double> nu = sample_service_times(cfg.G, cfg.n, rng);
    return simulate_from(cfg.grid, std::move(arrivals), nu);
}

GridFunction idle_gap(const QueueTrajectory& traj) {
    GridFunction g = traj.Y - traj.I;
    g.interp = Interp::linear;
    return g;
}

// Y - I has derivative 1{Q = 0, t < 0} >= 0, so the sup over [T(1), horizon]
// is the horizon value.
double idle_gap_sup_after_first_arrival(const QueueTrajectory& traj) {
    return std::abs(traj.Y.values.back() - traj.I.values.back());
}

}  // namespace transq
