#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace transq {

// Uniform grid t_k = t_min + k*dt, k = 0..N, with N = (t_max - t_min)/dt an
// integer >= 2.
class GridSpec {
public:
    GridSpec(double t_min, double t_max, double dt);

    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    double dt() const { return dt_; }
    std::size_t cells() const { return cells_; }
    std::size_t size() const { return cells_ + 1; }
    // When 1/dt and t_min/dt are integers, t_k = (t_min/dt + k)/(1/dt), so
    // decimal grids land on the nearest double.
    double at(std::size_t k) const;
    // Index of the grid point nearest to t, clamped to the grid.
    std::size_t nearest(double t) const;
    // Largest k with t_k <= t (up to roundoff), clamped to [0, N].
    std::size_t floor_index(double t) const;

    bool operator==(const GridSpec& o) const {
        return t_min_ == o.t_min_ && dt_ == o.dt_ && cells_ == o.cells_;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

private:
    double t_min_;
    double t_max_;
    double dt_;
    std::size_t cells_;
    double steps_per_unit_ = 0.0;
    double origin_steps_ = 0.0;
};

// linear: piecewise linear between knots.
// right_constant: value v[k] on [t_k, t_{k+1}) (right-continuous at jumps).
// left_constant: value v[k+1] on (t_k, t_{k+1}] (left-continuous at jumps).
enum class Interp { linear, left_constant, right_constant };

const char* interp_name(Interp i);
Interp parse_interp(const std::string& s);

struct GridFunction {
    GridSpec grid;
    std::vector<double> values;
    Interp interp = Interp::linear;

    GridFunction(GridSpec g, std::vector<double> v, Interp i = Interp::linear);
    GridFunction(GridSpec g, double fill, Interp i = Interp::linear);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    // Evaluation per the interp tag; t is clamped to the grid span.
    double operator()(double t) const;
    double at_time(double t) const { return (*this)(t); }
};

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what);
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);
double sup_distance(const GridFunction& a, const GridFunction& b);

// Psi(x)(t) = max over s <= t of (-x(s))_+, one streaming pass.
GridFunction psi(const GridFunction& x);
// Phi(x) = x + Psi(x).
GridFunction phi(const GridFunction& x);

struct IndexRun {
    std::size_t lo;  // inclusive
    std::size_t hi;  // inclusive
};

// Argmin correspondence: for every grid index k, the grid indices s <= k at
// which x(s) lies within eps of min_{r <= k} x(r), stored as sorted disjoint
// runs. Every entry is nonempty.
class NablaSet {
public:
    NablaSet(GridSpec grid, double eps, std::vector<std::size_t> offsets, std::vector<IndexRun> runs);

    const GridSpec& grid() const { return grid_; }
    double eps() const { return eps_; }
    std::size_t size() const { return offsets_.size() - 1; }
    std::span<const IndexRun> runs(std::size_t k) const;
    bool contains(std::size_t k, std::size_t s) const;
    std::size_t count(std::size_t k) const;
    std::vector<std::size_t> members(std::size_t k) const;
    bool is_singleton_self(std::size_t k) const;
    // s is a member of the entry at k with neither neighbour s-1 nor s+1 in it.
    bool isolated(std::size_t k, std::size_t s) const;
    // Entry at k is a subset of the entry at u.
    bool subset_of(std::size_t k, std::size_t u) const;

private:
    GridSpec grid_;
    double eps_;
    std::vector<std::size_t> offsets_;
    std::vector<IndexRun> runs_;
};

// Roundoff-scale tolerance for exact grid argmins: 1e-9 * max(1, sup|x|).
double default_nabla_eps(const GridFunction& x);
// 2 * L * dt with L = sup f + mu, a Lipschitz bound on the fluid netput.
double lipschitz_nabla_eps(double sup_density, double mu, double dt);

// With snap_crossings, a grid point where x first drops below its previous
// running minimum directly from above it also keeps the previous argmins:
// for continuous x the level crossing lies inside that cell and the grid
// point stands in for it.
NablaSet nabla(const GridFunction& x, double eps, bool snap_crossings = false);

// t -> max over s in nabla_t of (-y(s)). Output is tagged right_constant.
GridFunction directional_derivative(const GridFunction& x, const GridFunction& y, const NablaSet& nset);

// Number of alternating visits between {<= alpha} and {>= beta} on [t1, t2],
// scanning grid points inside the interval and its two endpoints.
std::size_t strip_visits(const GridFunction& y, double t1, double t2, double alpha, double beta);

// Minimum over piecewise-linear warps (knots on the grid, |lambda - id| <=
// warp_budget, slopes within 1 +- warp_budget/window) of the sup distance on
// [tau - window, tau + window]. Both functions are evaluated linearly except
// inside the two cells touching tau, where their own interp tags apply; the
// jump of a tagged limit is therefore located at tau.
double j1_distance_lower_bound(const GridFunction& y_n, const GridFunction& y_lim, double tau, double window,
                               double warp_budget);

// Discrete upper-semicontinuity check. A grid point k violates it when the
// path jumps on both sides (steps larger than jump_tol) and v[k] lies below
// both neighbours by more than jump_tol: then some superlevel set
// {v >= a} fails to be a union of closed intervals. Returns violating indices.
std::vector<std::size_t> usc_violations(const GridFunction& v, double jump_tol);

void write_csv(std::ostream& os, const GridFunction& f, const std::string& header_comment = {});
GridFunction read_csv(std::istream& is);

}  // namespace transq
