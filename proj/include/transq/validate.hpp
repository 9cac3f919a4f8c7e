#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "transq/diffusion.hpp"
#include "transq/fluid.hpp"
#include "transq/gridfn.hpp"
#include "transq/sim.hpp"
#include "transq/stats.hpp"

namespace transq {

// Worker threads for replication loops: TRANSQ_WORKERS if set and positive,
// else hardware concurrency (at least 1).
std::size_t default_workers();

struct McOptions {
    std::size_t workers = 0;          // 0 selects default_workers()
    double exclusion = 3.0;           // half-width of the window dropped around discontinuity points
    std::vector<double> sample_times;  // per-replication samples kept here for KS
    std::size_t min_reliable_r = 30;  // below this the report flags wide intervals
};

struct SampleColumn {
    double t;
    std::vector<double> fluct;  // (Q(t) - n qbar(t)) / sqrt(n), replication order
};

struct McReport {
    std::string config_echo;
    uint64_t seed;
    std::size_t replications;
    std::size_t n;
    GridSpec grid;
    std::vector<double> qbar;
    std::vector<double> sigma2;
    std::vector<double> zbar;
    std::vector<double> mean_q;      // mean of Q/n
    std::vector<double> var_q;       // unbiased variance of Q, divided by n
    std::vector<double> sem_q;       // standard error of mean_q
    std::vector<double> mean_fluct;  // mean of (Q - n qbar)/sqrt(n)
    std::vector<double> mean_z;
    std::vector<double> sem_z;
    std::vector<bool> compared;  // outside every exclusion window
    double sup_mean_distance;    // over compared points
    double sup_var_distance;
    std::vector<double> empty_times;  // first time Q = 0 after t = 0, replication order
    double empty_mean;
    double empty_std;
    std::vector<SampleColumn> samples;
    bool wide_ci;
    std::vector<std::string> warnings;

    std::size_t index_of(double t) const { return grid.nearest(t); }
};

McReport mc_envelopes(const SimConfig& cfg, std::size_t replications, const McOptions& opt = {});

struct KsRow {
    double t;
    double mean0;
    double var0;
    KsResult ks;
};

// KS of the stored fluctuation samples against N(0, sigma2(t)).
std::vector<KsRow> ks_at_times(const McReport& rep);

struct LittleRow {
    double t;
    double target;  // qbar/mu - t 1{t <= 0}
    double mean_z;
    double sem;
    double rel_error;  // |mean_z - target| / |target|, NaN when target = 0
};

std::vector<LittleRow> little_law_rows(const McReport& rep, const std::vector<double>& times);
std::vector<LittleRow> little_law_check(const SimConfig& cfg, std::size_t replications,
                                        const std::vector<double>& times, const McOptions& opt = {});

struct IdleRow {
    std::size_t n;
    double median;  // median over replications of sqrt(n) sup |I - Y| after the first arrival
};

struct IdleReport {
    std::vector<IdleRow> rows;
    bool strictly_decreasing;
};

// Replication r of population n uses RngStream(seed, r) inside simulate with
// cfg.n = n.
IdleReport idle_equivalence_check(const SimConfig& base, const std::vector<std::size_t>& n_list,
                                  std::size_t replications, const McOptions& opt = {});

struct Strip {
    double t1, t2;
    double alpha, beta;
};

struct M1Row {
    double n;
    std::vector<std::size_t> visits;  // one per strip
    bool visits_match;
    std::optional<double> j1;  // lower bound on the J1 distance at tau
};

struct M1Report {
    std::vector<std::size_t> limit_visits;
    Continuity limit_tag;  // realized at tau_index
    std::vector<M1Row> rows;
};

struct J1Options {
    std::size_t tau_index;
    double window;
    double warp_budget;
};

// y_n = Psi(sqrt(n) x + y) - sqrt(n) Psi(x) against the limit
// directional_derivative(x, y, nabla(x)).
M1Report m1_convergence_check(const GridFunction& x, const GridFunction& y, double nabla_eps,
                              const std::vector<double>& n_list, const std::vector<Strip>& strips,
                              std::optional<J1Options> j1 = {});

void write_report_csv(std::ostream& os, const McReport& rep);
void write_report_json(std::ostream& os, const McReport& rep, const std::vector<KsRow>& ks,
                       const std::vector<LittleRow>& little);

}  // namespace transq
