#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transq/dist.hpp"
#include "transq/gridfn.hpp"

namespace transq {

// A maximal stretch where the fluid queue is positive. `end` is the zero
// crossing located by bisection, or empty when the queue is still positive at
// the horizon.
struct Excursion {
    double start;
    std::optional<double> end;
    std::size_t first_index;  // first grid point with qbar > eps
    std::size_t last_index;   // last grid point with qbar > eps
};

struct FluidSolution {
    ArrivalDist F;
    double mu;
    GridSpec grid;
    double eps;  // tolerance for qbar == 0 and for flatness of psibar
    GridFunction xbar;
    GridFunction psibar;
    GridFunction qbar;
    GridFunction bbar;
    GridFunction zbar;
    GridFunction rho_sup;
    GridFunction rho_eff;
    std::optional<double> tau;
    std::optional<double> t_tilde;
    std::vector<Excursion> excursions;
    std::vector<std::string> warnings;
};

// X(t) = F(t) - mu*t*1{t >= 0} on the grid, linear interp. Appends a warning
// when the horizon does not exceed the end of the arrival support.
GridFunction fluid_netput(const ArrivalDist& F, double mu, const GridSpec& grid,
                          std::vector<std::string>* warnings = nullptr);

// eps defaults to default_nabla_eps of the netput.
FluidSolution solve_fluid(const ArrivalDist& F, double mu, const GridSpec& grid, std::optional<double> eps = {});

enum class RhoVariant { supremum, effective };

// supremum: infinite on [t_min, 0], sup over r in [0, t) of the arrived-mass to
// capacity ratio on (0, t_tilde], 0 afterwards.
// effective: r ranges over [t_min, t) with denominator mu*(t - max(r, 0)).
// The r -> t limit contributes the left density f(t-)/mu in both.
GridFunction traffic_intensity(const ArrivalDist& F, double mu, const GridSpec& grid, RhoVariant variant,
                               std::optional<double> t_tilde);

}  // namespace transq
