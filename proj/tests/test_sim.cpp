#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "transq/error.hpp"
#include "transq/fluid.hpp"
#include "transq/sim.hpp"

using namespace transq;

namespace {

const GridSpec kGrid(-20, 60, 0.05);

SimConfig base_cfg(std::size_t n, uint64_t seed = 1) {
    return SimConfig{n, ArrivalDist::uniform(-20, 40), ServiceDist::exponential(0.03), seed, kGrid};
}

}  // namespace

TEST_CASE("single customer after time zero") {
    const std::vector<double> nu{3.0};
    const QueueTrajectory tr = simulate_from(GridSpec(0, 20, 0.5), {5.0}, nu);
    CHECK(tr.start[0] == 5.0);
    CHECK(tr.departure[0] == 8.0);
    CHECK(tr.state_at(4.99).Q == 0.0);
    CHECK(tr.state_at(5.0).Q == 1.0);
    CHECK(tr.state_at(7.99).Q == 1.0);
    CHECK(tr.state_at(8.0).Q == 0.0);
    CHECK(tr.state_at(5.0).Z == 3.0);
    CHECK(tr.Q(6.0) == 1.0);
}

TEST_CASE("early bird waits for service to open") {
    const std::vector<double> nu{3.0};
    const QueueTrajectory tr = simulate_from(GridSpec(-20, 20, 0.5), {-2.0}, nu);
    CHECK(tr.start[0] == 0.0);
    CHECK(tr.departure[0] == 3.0);
    CHECK(tr.state_at(-2.0).Z == 5.0);
    CHECK(tr.state_at(1.0).Z == 2.0);
}

TEST_CASE("acceleration divides service by n") {
    const std::vector<double> nu{3.0, 3.0};
    const QueueTrajectory tr = simulate_from(GridSpec(-20, 20, 0.5), {-2.0, -1.0}, nu);
    CHECK(tr.departure == std::vector<double>{1.5, 3.0});
    CHECK(tr.state_at(0.0).Q == 2.0);
    CHECK(tr.state_at(2.0).Q == 1.0);
    CHECK(tr.Q(2.0) == 1.0);
    CHECK(tr.first_empty_time(0.0) == 3.0);
}

TEST_CASE("ties are legal and applied together") {
    const std::vector<double> nu{1.0, 1.0, 1.0};
    const QueueTrajectory tr = simulate_from(GridSpec(0, 10, 0.5), {1.0, 1.0, 1.0}, nu);
    CHECK(tr.state_at(1.0).Q == 3.0);
    CHECK(tr.departure.back() == doctest::Approx(2.0));
}

TEST_CASE("input validation") {
    const std::vector<double> one{1.0}, two{1.0, 1.0};
    CHECK_THROWS_AS(simulate_from(kGrid, {}, {}), InputError);
    CHECK_THROWS_AS(simulate_from(kGrid, {1.0}, two), InputError);
    CHECK_THROWS_AS(simulate_from(kGrid, {2.0, 1.0}, two), InputError);
    CHECK_THROWS_AS(simulate_from(kGrid, {-30.0}, one), InputError);
    SimConfig bad = base_cfg(0);
    CHECK_THROWS_AS(simulate(bad, 0), InputError);
    bad = base_cfg(10);
    bad.grid = GridSpec(-10, 60, 0.05);
    CHECK_THROWS_AS(simulate(bad, 0), InputError);
}

TEST_CASE("idle gap examples") {
    const std::vector<double> nu{3.0};
    const QueueTrajectory early = simulate_from(GridSpec(-20, 20, 0.5), {-2.0}, nu);
    const GridFunction gap = idle_gap(early);
    CHECK(*std::max_element(gap.values.begin(), gap.values.end()) == doctest::Approx(18.0));
    CHECK(idle_gap_sup_after_first_arrival(early) == doctest::Approx(18.0));
    const QueueTrajectory at_zero = simulate_from(GridSpec(0, 20, 0.5), {0.0}, nu);
    for (double v : idle_gap(at_zero).values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("trajectory invariants on random replications") {
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
        for (uint64_t rep = 0; rep < 5; ++rep) {
            CAPTURE(n);
            CAPTURE(rep);
            const QueueTrajectory tr = simulate(base_cfg(n, 3), rep);
            REQUIRE(std::is_sorted(tr.departure.begin(), tr.departure.end()));
            std::size_t transitions = 0;
            double riemann = 0.0;
            for (std::size_t k = 0; k < kGrid.size(); ++k) {
                const double t = kGrid.at(k);
                const double arrived =
                    static_cast<double>(std::upper_bound(tr.arrival.begin(), tr.arrival.end(), t) - tr.arrival.begin());
                const double departed = static_cast<double>(
                    std::upper_bound(tr.departure.begin(), tr.departure.end(), t) - tr.departure.begin());
                REQUIRE(tr.A[k] == arrived);
                REQUIRE(tr.Q[k] == arrived - departed);
                REQUIRE(tr.Q[k] >= 0.0);
                REQUIRE(tr.Z[k] >= 0.0);
                if (t >= 0.0) {
                    REQUIRE(tr.B[k] + tr.I[k] == doctest::Approx(t));
                    if (k + 1 < kGrid.size()) riemann += (tr.Q[k] > 0 ? 1.0 : 0.0) * kGrid.dt();
                    if (k > 0 && (tr.Q[k] > 0) != (tr.Q[k - 1] > 0)) ++transitions;
                }
                REQUIRE(tr.Y[k] >= tr.I[k] - 1e-12);
            }
            if (tr.departure.back() <= kGrid.t_max())
                REQUIRE(tr.SB.values.back() == static_cast<double>(n));
            else
                REQUIRE(tr.SB.values.back() < static_cast<double>(n));
            REQUIRE(std::abs(tr.B.values.back() - riemann) <= kGrid.dt() * (transitions + 1) + 1e-9);
        }
    }
}

TEST_CASE("non-idling: busy time grows whenever the queue is nonempty after 0") {
    const QueueTrajectory tr = simulate(base_cfg(200, 4), 0);
    for (double t = 0.0; t < 50.0; t += 0.37) {
        const QueueState a = tr.state_at(t);
        const QueueState b = tr.state_at(t + 1e-6);
        if (a.Q > 0) REQUIRE(b.B - a.B == doctest::Approx(1e-6).epsilon(1e-3));
    }
}

TEST_CASE("replications are reproducible and distinct") {
    const QueueTrajectory a = simulate(base_cfg(50, 9), 2), b = simulate(base_cfg(50, 9), 2), c = simulate(base_cfg(50, 9), 3);
    CHECK(a.arrival == b.arrival);
    CHECK(a.departure == b.departure);
    CHECK(a.arrival != c.arrival);
}

TEST_CASE("scaled queue mean approaches the fluid queue") {
    const FluidSolution fl = solve_fluid(ArrivalDist::uniform(-20, 40), 0.03, kGrid);
    auto sup_err = [&](std::size_t n) {
        std::vector<double> acc(kGrid.size(), 0.0);
        const int reps = 200;
        for (int r = 0; r < reps; ++r) {
            const QueueTrajectory tr = simulate(base_cfg(n, 5), r);
            for (std::size_t k = 0; k < kGrid.size(); ++k) acc[k] += tr.Q[k] / n / reps;
        }
        double worst = 0.0;
        for (std::size_t k = 0; k < kGrid.size(); ++k)
            if (std::abs(kGrid.at(k) - 25.0) >= 3.0) worst = std::max(worst, std::abs(acc[k] - fl.qbar[k]));
        return worst;
    };
    CHECK(sup_err(1000) < sup_err(25));
}
