#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transq/dist.hpp"
#include "transq/fluid.hpp"
#include "transq/gridfn.hpp"
#include "transq/regimes.hpp"
#include "transq/rng.hpp"

namespace transq {

enum class XhatMode { composition, timechange };

XhatMode parse_xhat_mode(const std::string& s);
const char* xhat_mode_name(XhatMode m);

struct BmDrivers {
    GridFunction w;   // standard BM on [0, H], H >= max(t_max, 0)
    GridFunction w0;  // standard Brownian bridge on [0, 1]
};

// Bridge resolution used when none is given: max(1000, 4N) cells.
std::size_t default_bridge_cells(const GridSpec& grid);

BmDrivers sample_bm_bridge(const GridSpec& grid, RngStream& rng, std::size_t bridge_cells = 0);

// Xhat(t) = w0(F(t)) - sigma*mu^(3/2) * w(Bbar(t)), both drivers evaluated by
// linear interpolation.
GridFunction sample_xhat(const FluidSolution& fl, const ServiceDist& G, const BmDrivers& drivers);

// Gaussian increments with variance g(t_{k+1}) - g(t_k). Throws InputError when
// g decreases, since no time change reproduces a shrinking variance.
GridFunction sample_xhat_timechange(const FluidSolution& fl, const ServiceDist& G, RngStream& rng);

struct QhatPair {
    GridFunction ytilde;
    GridFunction qhat;
};

QhatPair sample_qhat(const FluidSolution& fl, const NablaSet& nset, const GridFunction& xhat);
GridFunction sample_bhat(const FluidSolution& fl, const GridFunction& ytilde);
// qhat/mu - sigma*sqrt(mu) * W*(qbar/mu) with W* a fresh BM drawn from rng.
GridFunction sample_zhat(const FluidSolution& fl, const ServiceDist& G, const GridFunction& qhat, RngStream& rng);

struct PointTag {
    std::size_t index;
    Continuity tag;  // continuous, left_discontinuity or right_discontinuity
};

// Realized continuity type at every discontinuity-capable grid point. With
// M = max of -xhat over nabla_t minus {t}: left when -xhat(t) > M, right
// otherwise (for points that allow both).
std::vector<PointTag> realized_tags(const NablaSet& nset, const RegimeAnnotation& ann, const GridFunction& xhat);

struct DiffusionSample {
    std::optional<BmDrivers> drivers;  // empty in timechange mode
    GridFunction xhat;
    GridFunction ytilde;
    GridFunction qhat;
    GridFunction bhat;
    GridFunction zhat;
    std::vector<PointTag> tags;
};

// One joint sample. The Zhat driver comes from rng.derive(1).
DiffusionSample sample_diffusion(const FluidSolution& fl, const ServiceDist& G, const NablaSet& nset,
                                 const RegimeAnnotation& ann, XhatMode mode, RngStream& rng);

struct VarianceEnvelope {
    GridFunction g;       // F(1-F) + sigma^2 mu^3 Bbar
    GridFunction sigma2;  // g where qbar > eps, 0 elsewhere
};

VarianceEnvelope variance_envelopes(const FluidSolution& fl, const ServiceDist& G);

// Step-size for the USC certificate: 8 times the largest one-cell standard
// deviation of Xhat.
double usc_jump_tolerance(const FluidSolution& fl, const ServiceDist& G);

// Qhat(t*) = Xhat(t*) + max over nabla_{t*} of (-Xhat): starting value of the
// overloaded-regime SDE.
double overloaded_initial(const NablaSet& nset, const GridFunction& xhat, std::size_t k_star);

struct OverloadedPath {
    GridFunction path;  // on the sub-grid [t_star, tau] snapped outward to grid points
    std::vector<std::string> warnings;
};

// Euler-Maruyama for dZ = sqrt(n) (f(t) - mu 1{t >= 0}) dt + sqrt(g'(t)) dW,
// with g'(t) dt replaced by the exact cell increment of g.
OverloadedPath approx_overloaded(const FluidSolution& fl, const ServiceDist& G, double t_star, double tau,
                                 std::size_t n, double initial, RngStream& rng);

// Xhat increment from t_star reflected at its running minimum, evaluated at t.
double approx_critical(const GridFunction& xhat, double t_star, double t);

struct EmptyingSummary {
    std::size_t index;  // grid point of the end of overloading
    double time;
    double slope;  // f(t-) - mu
    std::vector<double> samples;
    double mean;
    double std;
    double predicted_mean(std::size_t n) const;  // time - mean/sqrt(n)
    double predicted_std(std::size_t n) const;   // std/sqrt(n)
};

// Limit fluctuation (Xhat(t) + max over nabla_t minus {t} of (-Xhat)) / (f(t-) - mu)
// at the end-of-overloading point k_end, one value per xhat sample.
EmptyingSummary emptying_time(const FluidSolution& fl, const NablaSet& nset,
                              const std::vector<GridFunction>& xhat_samples, std::size_t k_end);

// Grid index standing for the end of the first overloaded excursion.
std::optional<std::size_t> first_emptying_index(const FluidSolution& fl);

}  // namespace transq
