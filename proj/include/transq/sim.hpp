#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "transq/dist.hpp"
#include "transq/gridfn.hpp"

namespace transq {

// The grid's t_min plays the role of -T0: it must not exceed the arrival
// support start, and the empty-time integral Y starts there.
struct SimConfig {
    std::size_t n;
    ArrivalDist F;
    ServiceDist G;
    uint64_t seed;
    GridSpec grid;
};

void validate_sim_config(const SimConfig& cfg);

// Path values at one instant, all right-continuous.
struct QueueState {
    double A;   // arrivals so far
    double SB;  // departures so far
    double Q;
    double B;   // busy time on [0, t]
    double I;   // idle time on [0, t]
    double Y;   // empty time on [t_min, t]
    double Z;   // V(A(t)) - B(t) - t*1{t <= 0}
};

struct QueueTrajectory {
    std::size_t n;
    GridSpec grid;
    std::vector<double> arrival;    // sorted T(i)
    std::vector<double> service;    // scaled nu_i / n
    std::vector<double> start;      // max(T(i), 0, D(i-1))
    std::vector<double> departure;  // start + nu_i / n
    GridFunction A, SB, Q, B, I, Y, Z;

    // Event-exact evaluation at an arbitrary time.
    QueueState state_at(double t) const;
    // Smallest t >= from with Q(t) = 0.
    double first_empty_time(double from) const;
};

QueueTrajectory simulate(const SimConfig& cfg, uint64_t replication);

// Deterministic core: sorted arrival times and unscaled service requirements,
// scaled by n = arrivals.size().
QueueTrajectory simulate_from(const GridSpec& grid, std::vector<double> arrivals, std::span<const double> nu);

// Y - I on the grid; nonnegative.
GridFunction idle_gap(const QueueTrajectory& traj);

// sup of |I - Y| over t >= T(1), event exact.
double idle_gap_sup_after_first_arrival(const QueueTrajectory& traj);

}  // namespace transq
