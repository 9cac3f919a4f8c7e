#include "transq/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "transq/csv.hpp"
#include "transq/error.hpp"
#include "transq/regimes.hpp"

namespace transq {

namespace {

// Replications are computed in blocks; each block's results are consumed in
// replication order, so the reduction does not depend on the worker count.
template <class Result, class Compute, class Consume>
void run_in_order(std::size_t count, std::size_t workers, Compute compute, Consume consume) {
    if (workers == 0) workers = default_workers();
    const std::size_t block = std::max<std::size_t>(64, 16 * workers);
    std::vector<Result> buf;
    for (std::size_t lo = 0; lo < count; lo += block) {
        const std::size_t hi = std::min(count, lo + block);
        buf.assign(hi - lo, Result{});
        const std::size_t w = std::min(workers, hi - lo);
        if (w <= 1) {
            for (std::size_t r = lo; r < hi; ++r) buf[r - lo] = compute(r);
        } else {
            std::vector<std::thread> pool;
            std::exception_ptr err;
            std::mutex err_mu;
            for (std::size_t j = 0; j < w; ++j) {
                pool.emplace_back([&, j] {
                    try {
                        for (std::size_t r = lo + j; r < hi; r += w) buf[r - lo] = compute(r);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(err_mu);
                        if (!err) err = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            if (err) std::rethrow_exception(err);
        }
        for (std::size_t r = lo; r < hi; ++r) consume(r, std::move(buf[r - lo]));
    }
}

struct RepResult {
    std::vector<double> q;
    std::vector<double> z;
    double empty = 0.0;
};

std::string sim_echo(const SimConfig& cfg, std::size_t replications) {
    return "arrival=" + cfg.F.name() + " service=" + cfg.G.name() + " n=" + fmt(cfg.n) + " seed=" + fmt(cfg.seed) +
           " R=" + fmt(replications) + " grid=[" + fmt(cfg.grid.t_min()) + "," + fmt(cfg.grid.t_max()) +
           "] dt=" + fmt(cfg.grid.dt());
}

void check_in_grid(const GridSpec& g, double t, const char* what) {
    if (!(t >= g.t_min() && t <= g.t_max()))
        throw InputError(std::string(what) + " " + fmt(t) + " outside the grid");
}

}  // namespace

std::size_t default_workers() {
    if (const char* s = std::getenv("TRANSQ_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

McReport mc_envelopes(const SimConfig& cfg, std::size_t replications, const McOptions& opt) {
    validate_sim_config(cfg);
    if (replications < 2) throw InputError("mc_envelopes: need at least 2 replications");
    const FluidSolution fl = solve_fluid(cfg.F, cfg.G.mu(), cfg.grid);
    const RegimeAnnotation ann = classify_continuity(fluid_nabla(fl), classify_regimes(fl));
    const VarianceEnvelope env = variance_envelopes(fl, cfg.G);
    const std::size_t m = cfg.grid.size();
    const double n = static_cast<double>(cfg.n);
    const double rn = std::sqrt(n);

    McReport rep{sim_echo(cfg, replications),
                 cfg.seed,
                 replications,
                 cfg.n,
                 cfg.grid,
                 fl.qbar.values,
                 env.sigma2.values,
                 fl.zbar.values,
                 std::vector<double>(m),
                 std::vector<double>(m),
                 std::vector<double>(m),
                 std::vector<double>(m),
                 std::vector<double>(m),
                 std::vector<double>(m),
                 std::vector<bool>(m, true),
                 0.0,
                 0.0,
                 {},
                 0.0,
                 0.0,
                 {},
                 replications < opt.min_reliable_r,
                 fl.warnings};
    for (std::size_t k : ann.discontinuity_points()) {
        const double c = cfg.grid.at(k);
        for (std::size_t j = 0; j < m; ++j)
            if (std::abs(cfg.grid.at(j) - c) < opt.exclusion) rep.compared[j] = false;
    }
    if (rep.wide_ci)
        rep.warnings.push_back("R=" + fmt(replications) + " below " + fmt(opt.min_reliable_r) +
                               ": confidence intervals are wide");
    std::vector<std::size_t> sample_idx;
    for (double t : opt.sample_times) {
        check_in_grid(cfg.grid, t, "mc_envelopes: sample time");
        sample_idx.push_back(cfg.grid.nearest(t));
        rep.samples.push_back(SampleColumn{cfg.grid.at(sample_idx.back()), {}});
    }

    std::vector<RunningStats> sq(m), sf(m), sz(m);
    rep.empty_times.reserve(replications);
    run_in_order<RepResult>(
        replications, opt.workers,
        [&](std::size_t r) {
            const QueueTrajectory tr = simulate(cfg, r);
            return RepResult{tr.Q.values, tr.Z.values, tr.first_empty_time(0.0)};
        },
        [&](std::size_t, RepResult res) {
            for (std::size_t k = 0; k < m; ++k) {
                sq[k].push(res.q[k] / n);
                sf[k].push((res.q[k] - n * rep.qbar[k]) / rn);
                sz[k].push(res.z[k]);
            }
            for (std::size_t j = 0; j < sample_idx.size(); ++j)
                rep.samples[j].fluct.push_back((res.q[sample_idx[j]] - n * rep.qbar[sample_idx[j]]) / rn);
            rep.empty_times.push_back(res.empty);
        });

    for (std::size_t k = 0; k < m; ++k) {
        rep.mean_q[k] = sq[k].mean();
        rep.var_q[k] = sq[k].variance() * n;
        rep.sem_q[k] = sq[k].sem();
        rep.mean_fluct[k] = sf[k].mean();
        rep.mean_z[k] = sz[k].mean();
        rep.sem_z[k] = sz[k].sem();
        if (!rep.compared[k]) continue;
        rep.sup_mean_distance = std::max(rep.sup_mean_distance, std::abs(rep.mean_q[k] - rep.qbar[k]));
        rep.sup_var_distance = std::max(rep.sup_var_distance, std::abs(rep.var_q[k] - rep.sigma2[k]));
    }
    rep.empty_mean = mean(rep.empty_times);
    rep.empty_std = stddev(rep.empty_times);
    return rep;
}

std::vector<KsRow> ks_at_times(const McReport& rep) {
    std::vector<KsRow> out;
    for (const SampleColumn& c : rep.samples) {
        const double v = rep.sigma2[rep.index_of(c.t)];
        if (!(v > 0.0)) {
            out.push_back(KsRow{c.t, 0.0, v, KsResult{std::numeric_limits<double>::quiet_NaN(),
                                                      std::numeric_limits<double>::quiet_NaN()}});
            continue;
        }
        out.push_back(KsRow{c.t, 0.0, v, ks_gaussian(c.fluct, 0.0, v)});
    }
    return out;
}

std::vector<LittleRow> little_law_rows(const McReport& rep, const std::vector<double>& times) {
    std::vector<LittleRow> out;
    for (double t : times) {
        check_in_grid(rep.grid, t, "little_law_rows: time");
        const std::size_t k = rep.index_of(t);
        const double target = rep.zbar[k];
        const double rel = target != 0.0 ? std::abs(rep.mean_z[k] - target) / std::abs(target)
                                         : std::numeric_limits<double>::quiet_NaN();
        out.push_back(LittleRow{rep.grid.at(k), target, rep.mean_z[k], rep.sem_z[k], rel});
    }
    return out;
}

std::vector<LittleRow> little_law_check(const SimConfig& cfg, std::size_t replications,
                                        const std::vector<double>& times, const McOptions& opt) {
    return little_law_rows(mc_envelopes(cfg, replications, opt), times);
}

IdleReport idle_equivalence_check(const SimConfig& base, const std::vector<std::size_t>& n_list,
                                  std::size_t replications, const McOptions& opt) {
    if (replications == 0) throw InputError("idle_equivalence_check: need at least 1 replication");
    IdleReport out{{}, true};
    for (std::size_t n : n_list) {
        SimConfig cfg = base;
        cfg.n = n;
        validate_sim_config(cfg);
        const double rn = std::sqrt(static_cast<double>(n));
        std::vector<double> stat;
        stat.reserve(replications);
        run_in_order<double>(
            replications, opt.workers,
            [&](std::size_t r) { return rn * idle_gap_sup_after_first_arrival(simulate(cfg, r)); },
            [&](std::size_t, double v) { stat.push_back(v); });
        out.rows.push_back(IdleRow{n, median(stat)});
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (!(out.rows[i].median < out.rows[i - 1].median)) out.strictly_decreasing = false;
    return out;
}

M1Report m1_convergence_check(const GridFunction& x, const GridFunction& y, double nabla_eps,
                              const std::vector<double>& n_list, const std::vector<Strip>& strips,
                              std::optional<J1Options> j1) {
    require_same_grid(x, y, "m1_convergence_check");
    const NablaSet nset = nabla(x, nabla_eps, true);
    GridFunction lim = directional_derivative(x, y, nset);
    M1Report rep{{}, Continuity::continuous, {}};
    if (j1) {
        const std::size_t k = j1->tau_index;
        if (k >= x.size()) throw InputError("m1_convergence_check: tau index outside grid");
        if (nset.count(k) >= 2) {
            const double self = nset.contains(k, k) ? -y[k] : -std::numeric_limits<double>::infinity();
            double others = -std::numeric_limits<double>::infinity();
            for (std::size_t s : nset.members(k))
                if (s != k) others = std::max(others, -y[s]);
            rep.limit_tag = self > others ? Continuity::left_discontinuity : Continuity::right_discontinuity;
        }
    }
    lim.interp = rep.limit_tag == Continuity::left_discontinuity    ? Interp::right_constant
                 : rep.limit_tag == Continuity::right_discontinuity ? Interp::left_constant
                                                                    : Interp::linear;
    for (const Strip& s : strips) rep.limit_visits.push_back(strip_visits(lim, s.t1, s.t2, s.alpha, s.beta));
    const GridFunction px = psi(x);
    for (double n : n_list) {
        if (!(n > 0.0)) throw InputError("m1_convergence_check: n must be positive");
        const double rn = std::sqrt(n);
        GridFunction yn = psi(rn * x + y) - rn * px;
        yn.interp = Interp::linear;
        M1Row row{n, {}, true, std::nullopt};
        for (std::size_t i = 0; i < strips.size(); ++i) {
            const Strip& s = strips[i];
            row.visits.push_back(strip_visits(yn, s.t1, s.t2, s.alpha, s.beta));
            if (row.visits.back() != rep.limit_visits[i]) row.visits_match = false;
        }
        if (j1) row.j1 = j1_distance_lower_bound(yn, lim, x.grid.at(j1->tau_index), j1->window, j1->warp_budget);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void write_report_csv(std::ostream& os, const McReport& rep) {
    CsvWriter w(os);
    w.comment(rep.config_echo);
    w.comment("variance columns use the unbiased (R-1) denominator");
    w.comment("seed=" + fmt(rep.seed) + " R=" + fmt(rep.replications) + " n=" + fmt(rep.n));
    w.fields("seed", "R", "n", "t", "qbar", "mean_q_over_n", "sem", "sigma2", "var_q_over_n", "mean_fluct",
             "zbar", "mean_z", "compared");
    for (std::size_t k = 0; k < rep.grid.size(); ++k)
        w.fields(rep.seed, rep.replications, rep.n, rep.grid.at(k), rep.qbar[k], rep.mean_q[k], rep.sem_q[k],
                 rep.sigma2[k], rep.var_q[k], rep.mean_fluct[k], rep.zbar[k], rep.mean_z[k],
                 rep.compared[k] ? 1 : 0);
}

void write_report_json(std::ostream& os, const McReport& rep, const std::vector<KsRow>& ks,
                       const std::vector<LittleRow>& little) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["config"] = rep.config_echo;
    j["seed"] = rep.seed;
    j["replications"] = rep.replications;
    j["n"] = rep.n;
    j["variance_denominator"] = "R-1";
    j["exclusion_applied"] = std::count(rep.compared.begin(), rep.compared.end(), false) > 0;
    j["sup_mean_distance"] = rep.sup_mean_distance;
    j["sup_var_distance"] = rep.sup_var_distance;
    j["emptying_time"] = {{"mean", rep.empty_mean}, {"std", rep.empty_std}};
    j["wide_ci"] = rep.wide_ci;
    j["warnings"] = rep.warnings;
    ordered_json ka = ordered_json::array();
    for (const KsRow& r : ks)
        ka.push_back({{"t", r.t}, {"mean0", r.mean0}, {"var0", r.var0}, {"stat", r.ks.stat}, {"p", r.ks.p}});
    j["ks"] = ka;
    ordered_json la = ordered_json::array();
    for (const LittleRow& r : little)
        la.push_back({{"t", r.t}, {"target", r.target}, {"mean_z", r.mean_z}, {"sem", r.sem},
                      {"rel_error", r.rel_error}});
    j["little_law"] = la;
    os << j.dump(2) << '\n';
}

}  // namespace transq
