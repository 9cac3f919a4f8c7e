#include <cmath>
#include <vector>

#include "doctest.h"
#include "transq/error.hpp"
#include "transq/fluid.hpp"

using namespace transq;

namespace {

const ArrivalDist kF = ArrivalDist::uniform(-20, 40);
const GridSpec kGrid(-20, 60, 0.05);

// Plateau on [0, 5] splits the busy period in two: the queue empties at
// 0.3/0.095 and again at 1.175/0.095 after the arrival support ends at 12.
ArrivalDist two_bump() { return ArrivalDist::piecewise_linear_cdf({{-2, 0}, {0, 0.3}, {5, 0.3}, {8, 0.9}, {12, 1}}); }

}  // namespace

TEST_CASE("netput values") {
    const GridFunction x = fluid_netput(kF, 0.03, kGrid);
    CHECK(x(-20) == 0.0);
    CHECK(x(0) == doctest::Approx(1.0 / 3.0));
    CHECK(x(10) == doctest::Approx(0.2));
    CHECK(x.interp == Interp::linear);
}

TEST_CASE("netput warnings and grid checks") {
    std::vector<std::string> w;
    fluid_netput(kF, 0.03, GridSpec(-20, 40, 0.05), &w);
    CHECK(w.size() == 1);
    w.clear();
    fluid_netput(kF, 0.03, kGrid, &w);
    CHECK(w.empty());
    CHECK_THROWS_AS(fluid_netput(kF, 0.03, GridSpec(-10, 60, 0.05)), InputError);
    CHECK_THROWS_AS(fluid_netput(kF, 0.0, kGrid), InputError);
}

TEST_CASE("uniform fluid solution") {
    const FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
    REQUIRE(fl.tau);
    CHECK(std::abs(*fl.tau - 25.0) <= kGrid.dt());
    CHECK(*fl.tau == doctest::Approx(25.0).epsilon(1e-9));
    REQUIRE(fl.t_tilde);
    CHECK(*fl.t_tilde == doctest::Approx(40.0));
    CHECK(fl.excursions.size() == 1);
    CHECK(fl.bbar(30) == doctest::Approx(kF.cdf(30) / 0.03).epsilon(1e-9));
    CHECK(fl.bbar(30) == doctest::Approx(27.778).epsilon(1e-4));
    CHECK(fl.zbar(-10) == doctest::Approx(15.556).epsilon(1e-4));
    CHECK(fl.zbar(10) == doctest::Approx(6.6667).epsilon(1e-4));
    CHECK(fl.zbar(45) == 0.0);
    CHECK(fl.psibar(40) == doctest::Approx(0.2));
}

TEST_CASE("fluid invariants") {
    for (const auto& [F, mu] : std::vector<std::pair<ArrivalDist, double>>{
             {kF, 0.03}, {two_bump(), 0.095}, {ArrivalDist::triangular(-5, 2, 10), 0.05}}) {
        CAPTURE(F.name());
        const GridSpec g(F.t0(), F.t_end() + 20.0, 0.05);
        const FluidSolution fl = solve_fluid(F, mu, g);
        const GridFunction q = phi(fluid_netput(F, mu, g));
        CHECK(fl.qbar.values == q.values);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double t = g.at(k);
            REQUIRE(fl.qbar[k] >= 0.0);
            if (t <= 0) REQUIRE(fl.bbar[k] == 0.0);
            REQUIRE(fl.zbar[k] == doctest::Approx(fl.qbar[k] / mu - (t <= 0 ? t : 0.0)));
            if (k > 0 && fl.qbar[k] > fl.eps) REQUIRE(fl.psibar[k] - fl.psibar[k - 1] <= fl.eps);
            if (fl.t_tilde && t >= *fl.t_tilde) REQUIRE(fl.qbar[k] <= fl.eps);
        }
    }
}

TEST_CASE("uniform queue equals the netput before tau and vanishes after") {
    const FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
    for (std::size_t k = 0; k < kGrid.size(); ++k) {
        const double t = kGrid.at(k);
        if (t <= 25.0) REQUIRE(std::abs(fl.qbar[k] - fl.xbar[k]) <= fl.eps);
        if (t >= 25.0) REQUIRE(fl.qbar[k] <= fl.eps);
    }
}

TEST_CASE("two busy periods") {
    const GridSpec g(-2, 20, 0.05);
    const FluidSolution fl = solve_fluid(two_bump(), 0.095, g);
    REQUIRE(fl.excursions.size() == 2);
    REQUIRE(fl.tau);
    CHECK(*fl.tau == doctest::Approx(0.3 / 0.095).epsilon(1e-9));
    REQUIRE(fl.excursions[1].end);
    CHECK(*fl.excursions[1].end == doctest::Approx(1.175 / 0.095).epsilon(1e-9));
    REQUIRE(fl.t_tilde);
    CHECK(*fl.t_tilde == doctest::Approx(1.175 / 0.095).epsilon(1e-9));
}

TEST_CASE("traffic intensity variants on the uniform example") {
    const FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
    CHECK(fl.rho_sup(10) == doctest::Approx(1.0 / 1.8).epsilon(1e-9));
    CHECK(fl.rho_eff(10) == doctest::Approx(0.5 / 0.3).epsilon(1e-9));
    CHECK(fl.rho_eff(25) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isinf(fl.rho_sup(-5)));
    CHECK(fl.rho_sup(50) == 0.0);
}

TEST_CASE("effective intensity above one exactly when the queue is positive") {
    for (const auto& [F, mu] : std::vector<std::pair<ArrivalDist, double>>{
             {kF, 0.03}, {two_bump(), 0.095}, {ArrivalDist::triangular(-5, 2, 10), 0.05}}) {
        CAPTURE(F.name());
        const GridSpec g(F.t0(), F.t_end() + 20.0, 0.05);
        const FluidSolution fl = solve_fluid(F, mu, g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double t = g.at(k);
            if (t <= 0.0) continue;
            // At grid points adjacent to a crossing rho is 1 up to roundoff.
            if (std::abs(fl.rho_eff[k] - 1.0) < 1e-6) continue;
            REQUIRE((fl.rho_eff[k] > 1.0) == (fl.qbar[k] > fl.eps));
        }
    }
}

TEST_CASE("supremum intensity brute force on a coarse grid") {
    const GridSpec g(-20, 60, 1.0);
    const FluidSolution fl = solve_fluid(kF, 0.03, g);
    const GridFunction rho = traffic_intensity(kF, 0.03, g, RhoVariant::supremum, fl.t_tilde);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = g.at(k);
        if (t <= 0.0 || t > *fl.t_tilde) continue;
        double best = kF.pdf_left(t) / 0.03;
        for (int j = 0; j < 10000; ++j) {
            const double r = t * j / 10000.0;
            best = std::max(best, (kF.cdf(t) - kF.cdf(r)) / (0.03 * (t - r)));
        }
        CHECK(rho[k] == doctest::Approx(best).epsilon(1e-9));
    }
}
