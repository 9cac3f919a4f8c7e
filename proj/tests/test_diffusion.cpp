#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "transq/diffusion.hpp"
#include "transq/error.hpp"
#include "transq/regimes.hpp"
#include "transq/stats.hpp"

using namespace transq;

namespace {

const ArrivalDist kF = ArrivalDist::uniform(-20, 40);
const ServiceDist kG = ServiceDist::exponential(0.03);
const GridSpec kGrid(-20, 60, 0.05);
constexpr std::size_t kTau = 900;  // grid index of t = 25

struct Setup {
    FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
    NablaSet ns = fluid_nabla(fl);
    RegimeAnnotation ann = classify_continuity(ns, classify_regimes(fl));
};

const Setup& setup() {
    static const Setup s;
    return s;
}

// Standard error of the unbiased variance of a Gaussian sample.
double gaussian_var_se(double var, std::size_t n) { return var * std::sqrt(2.0 / (static_cast<double>(n) - 1.0)); }

}  // namespace

TEST_CASE("Brownian drivers") {
    const std::size_t paths = 10000;
    std::vector<double> w10, b05, prod;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(1, p);
        const BmDrivers d = sample_bm_bridge(kGrid, r);
        REQUIRE(d.w0.values.front() == 0.0);
        REQUIRE(d.w0.values.back() == 0.0);
        REQUIRE(d.w[0] == 0.0);
        REQUIRE(d.w.grid.t_max() >= kGrid.t_max());
        w10.push_back(d.w(10.0));
        b05.push_back(d.w0(0.5));
        prod.push_back(d.w(10.0) * d.w0(0.5));
    }
    CHECK(std::abs(variance(w10) - 10.0) < 3.0 * gaussian_var_se(10.0, paths));
    CHECK(std::abs(variance(b05) - 0.25) < 3.0 * gaussian_var_se(0.25, paths));
    // Independence: E[w(10) w0(1/2)] = 0 with sd sqrt(10 * 0.25 / paths).
    CHECK(std::abs(mean(prod)) < 3.0 * std::sqrt(2.5 / paths));
    RngStream r(2, 0);
    CHECK(sample_bm_bridge(kGrid, r, 0).w0.grid.cells() == default_bridge_cells(kGrid));
    CHECK(default_bridge_cells(kGrid) == 6400);
    CHECK_THROWS_AS(sample_bm_bridge(kGrid, r, 1), InputError);
}

TEST_CASE("xhat marginal variances in both modes") {
    const Setup& s = setup();
    const std::size_t paths = 10000;
    const double ts[] = {0.0, 10.0};
    const double target[] = {2.0 / 9.0, 0.55};
    std::vector<double> c0, c10, t0, t10;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(3, p), q(4, p);
        const GridFunction xc = sample_xhat(s.fl, kG, sample_bm_bridge(kGrid, r));
        const GridFunction xt = sample_xhat_timechange(s.fl, kG, q);
        REQUIRE(xc[0] == 0.0);
        REQUIRE(xt[0] == 0.0);
        c0.push_back(xc(ts[0]));
        c10.push_back(xc(ts[1]));
        t0.push_back(xt(ts[0]));
        t10.push_back(xt(ts[1]));
    }
    CHECK(std::abs(variance(c0) - target[0]) < 3.0 * gaussian_var_se(target[0], paths));
    CHECK(std::abs(variance(c10) - target[1]) < 3.0 * gaussian_var_se(target[1], paths));
    CHECK(std::abs(variance(t0) - target[0]) < 3.0 * gaussian_var_se(target[0], paths));
    CHECK(std::abs(variance(t10) - target[1]) < 3.0 * gaussian_var_se(target[1], paths));
}

TEST_CASE("xhat composition needs the busy time inside the BM horizon") {
    const Setup& s = setup();
    RngStream r(5, 0);
    BmDrivers d = sample_bm_bridge(GridSpec(-20, 10, 0.05), r);
    CHECK_THROWS_AS(sample_xhat(s.fl, kG, d), InternalError);
}

TEST_CASE("xhat is constant once F and the busy time stop moving") {
    const Setup& s = setup();
    RngStream r(6, 0);
    const GridFunction x = sample_xhat(s.fl, kG, sample_bm_bridge(kGrid, r));
    for (std::size_t k = kGrid.nearest(40.0); k < kGrid.size(); ++k) REQUIRE(x[k] == doctest::Approx(x[kGrid.nearest(40.0)]).epsilon(1e-12));
}

TEST_CASE("timechange mode refuses a decreasing variance clock") {
    const FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
    RngStream r(7, 0);
    CHECK_THROWS_AS(sample_xhat_timechange(fl, ServiceDist::deterministic(0.03), r), InputError);
}

TEST_CASE("uniform closed forms for qhat, bhat and zhat") {
    const Setup& s = setup();
    const double c = kG.sigma() * std::pow(0.03, 1.5);
    for (std::size_t p = 0; p < 50; ++p) {
        RngStream r(8, p);
        const DiffusionSample d = sample_diffusion(s.fl, kG, s.ns, s.ann, XhatMode::composition, r);
        REQUIRE(d.drivers);
        const double xt = d.xhat[kTau];
        for (std::size_t k = 0; k < kGrid.size(); ++k) {
            const double t = kGrid.at(k);
            REQUIRE(d.qhat[k] == d.xhat[k] + d.ytilde[k]);
            REQUIRE(d.bhat[k] == doctest::Approx(d.ytilde[k] / 0.03));
            if (k < kTau) {
                REQUIRE(d.qhat[k] == doctest::Approx(d.drivers->w0(kF.cdf(t)) - c * d.drivers->w(t)).epsilon(1e-12));
                REQUIRE(d.bhat[k] == 0.0);
            } else if (k > kTau) {
                REQUIRE(d.qhat[k] == 0.0);
                REQUIRE(d.bhat[k] == doctest::Approx(-d.xhat[k] / 0.03));
                REQUIRE(d.zhat[k] == 0.0);
            }
            if (s.fl.qbar[k] <= s.fl.eps) REQUIRE(d.zhat[k] == d.qhat[k] / 0.03);
            if (s.fl.qbar[k] <= s.fl.eps) REQUIRE(d.qhat[k] >= 0.0);
        }
        CHECK(d.qhat[kTau] == std::max(xt, 0.0));
        CHECK(d.bhat[kTau] == doctest::Approx(std::max(0.0, -xt) / 0.03));
    }
}

TEST_CASE("bhat scalar cases") {
    const Setup& s = setup();
    const GridFunction zero(kGrid, 0.0);
    for (double v : sample_bhat(s.fl, zero).values) CHECK(v == 0.0);
    const GridFunction y(kGrid, 0.6);
    CHECK(sample_bhat(s.fl, y)(30.0) == doctest::Approx(20.0));
}

TEST_CASE("zhat backlog term has variance sigma^2 qbar") {
    const Setup& s = setup();
    const std::size_t paths = 10000;
    std::vector<double> extra;
    const std::size_t k10 = kGrid.nearest(10.0);
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(9, p);
        const DiffusionSample d = sample_diffusion(s.fl, kG, s.ns, s.ann, XhatMode::timechange, r);
        REQUIRE_FALSE(d.drivers);
        extra.push_back(d.zhat[k10] - d.qhat[k10] / 0.03);
    }
    const double target = kG.sigma() * kG.sigma() * s.fl.qbar[k10];
    CHECK(target == doctest::Approx(222.22).epsilon(1e-4));
    CHECK(std::abs(variance(extra) - target) < 3.0 * gaussian_var_se(target, paths));
}

TEST_CASE("variance envelopes") {
    const Setup& s = setup();
    const VarianceEnvelope env = variance_envelopes(s.fl, kG);
    CHECK(env.sigma2(0.0) == doctest::Approx(2.0 / 9.0));
    CHECK(env.g(25.0) == doctest::Approx(0.9375));
    CHECK(env.sigma2[0] == 0.0);
    CHECK(env.sigma2(-10.0) == doctest::Approx(1.0 / 6.0 * 5.0 / 6.0));
    CHECK(env.sigma2(20.0) == doctest::Approx(0.822222).epsilon(1e-5));
    for (std::size_t k = kTau + 1; k < kGrid.size(); ++k) REQUIRE(env.sigma2[k] == 0.0);
    for (std::size_t k = 1; k < kGrid.size(); ++k) REQUIRE(env.g[k] >= env.g[k - 1] - 1e-12);
}

TEST_CASE("realized branch at tau follows the sign of xhat") {
    const Setup& s = setup();
    std::size_t right = 0;
    const std::size_t paths = 4000;
    const double tol = usc_jump_tolerance(s.fl, kG);
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(10, p);
        const DiffusionSample d = sample_diffusion(s.fl, kG, s.ns, s.ann, XhatMode::composition, r);
        REQUIRE(d.tags.size() == 1);
        REQUIRE(d.tags[0].index == kTau);
        const Continuity want =
            d.xhat[kTau] >= 0.0 ? Continuity::right_discontinuity : Continuity::left_discontinuity;
        REQUIRE(d.tags[0].tag == want);
        REQUIRE(d.qhat.interp == (want == Continuity::right_discontinuity ? Interp::left_constant
                                                                          : Interp::right_constant));
        REQUIRE(usc_violations(d.qhat, tol).empty());
        if (want == Continuity::right_discontinuity) ++right;
    }
    const double f = static_cast<double>(right) / paths;
    CHECK(std::abs(f - 0.5) < 3.0 * std::sqrt(0.25 / paths));
}

TEST_CASE("overloaded approximation") {
    const Setup& s = setup();
    SUBCASE("zero noise after the arrivals end gives a straight line") {
        const FluidSolution fl = solve_fluid(kF, 0.03, kGrid);
        RngStream r(11, 0);
        const OverloadedPath op = approx_overloaded(fl, ServiceDist::deterministic(0.03), 45.0, 55.0, 100, 1.5, r);
        CHECK(op.path.grid.t_min() == doctest::Approx(45.0));
        CHECK(op.path.grid.t_max() == doctest::Approx(55.0));
        for (std::size_t j = 0; j < op.path.size(); ++j)
            REQUIRE(op.path[j] == doctest::Approx(1.5 - 10.0 * 0.03 * op.path.grid.at(j) + 10.0 * 0.03 * 45.0));
    }
    SUBCASE("drift at n=100 inside the overloaded stretch") {
        CHECK(10.0 * (1.0 / 60.0 - 0.03) == doctest::Approx(-0.13333).epsilon(1e-4));
        const std::size_t paths = 4000;
        std::vector<double> slope;
        for (std::size_t p = 0; p < paths; ++p) {
            RngStream r(12, p);
            const OverloadedPath op = approx_overloaded(s.fl, kG, -20.0, 25.0, 100, 0.0, r);
            slope.push_back(op.path(20.0) - op.path(10.0));
        }
        const double var = variance_envelopes(s.fl, kG).g(20.0) - variance_envelopes(s.fl, kG).g(10.0);
        CHECK(std::abs(mean(slope) / 10.0 + 0.13333) < 3.0 * std::sqrt(var / paths) / 10.0);
    }
    SUBCASE("matches the direct Gaussian approximation at t=10") {
        const std::size_t paths = 4000;
        const double n = 1e4;
        const std::size_t k10 = kGrid.nearest(10.0);
        std::vector<double> direct, em;
        bool warned = false;
        for (std::size_t p = 0; p < paths; ++p) {
            RngStream r(13, p), q(14, p);
            const GridFunction x = sample_xhat(s.fl, kG, sample_bm_bridge(kGrid, r));
            direct.push_back(std::sqrt(n) * s.fl.qbar[k10] + sample_qhat(s.fl, s.ns, x).qhat[k10]);
            const OverloadedPath op = approx_overloaded(s.fl, kG, -20.0, 25.0, 10000, overloaded_initial(s.ns, x, 0), q);
            warned = warned || !op.warnings.empty();
            em.push_back(op.path(10.0));
        }
        CHECK(ks_two_sample(direct, em).p > 0.01);
        CHECK(warned);
    }
    CHECK_THROWS_AS(approx_overloaded(s.fl, kG, 10.0, 5.0, 10, 0.0, *std::make_unique<RngStream>(1, 1)), InputError);
}

TEST_CASE("critical approximation") {
    const GridSpec g(0, 10, 0.1);
    std::vector<double> down(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) down[k] = -0.3 * static_cast<double>(k);
    const GridFunction x(g, down);
    CHECK(approx_critical(x, 2.0, 2.0) == 0.0);
    CHECK(approx_critical(x, 2.0, 8.0) == 0.0);
    std::vector<double> up(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) up[k] = 0.3 * static_cast<double>(k);
    CHECK(approx_critical(GridFunction(g, up), 2.0, 8.0) == doctest::Approx(18.0));
    CHECK_THROWS_AS(approx_critical(x, 5.0, 2.0), InputError);
}

TEST_CASE("critical approximation of a Gaussian walk matches the Spitzer identity") {
    // For a walk with i.i.d. N(0, s^2) steps, S_m - min_{j<=m} S_j has the law
    // of max_{j<=m} S_j, whose mean is s/sqrt(2 pi) * sum_{k<=m} k^(-1/2).
    const std::size_t m = 50, paths = 20000;
    const double sd = 0.3;
    const GridSpec g(0, static_cast<double>(m), 1.0);
    double oracle = 0.0;
    for (std::size_t k = 1; k <= m; ++k) oracle += 1.0 / std::sqrt(static_cast<double>(k));
    oracle *= sd / std::sqrt(2.0 * M_PI);
    std::vector<double> v;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(15, p);
        std::vector<double> w(g.size(), 0.0);
        for (std::size_t k = 1; k < w.size(); ++k) w[k] = w[k - 1] + sd * r.normal();
        v.push_back(approx_critical(GridFunction(g, w), 0.0, static_cast<double>(m)));
    }
    CHECK(std::abs(mean(v) - oracle) < 3.0 * stddev(v) / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("critical approximation endpoint mean is that of a reflected Gaussian") {
    // The time-changed limit is W(g(t)) - W(g(t*)); sampling it at equal steps
    // of g keeps the law of the reflected endpoint. 1e4 steps keep the
    // discrete-monitoring bias (about 0.58 of one step's sd) near half an SE.
    const Setup& s = setup();
    const VarianceEnvelope env = variance_envelopes(s.fl, kG);
    const double v = env.g(40.0) - env.g(30.0);
    const std::size_t m = 10000, paths = 2500;
    const GridSpec g(0, static_cast<double>(m), 1.0);
    const double sd = std::sqrt(v / static_cast<double>(m));
    std::vector<double> out;
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(16, p);
        for (std::size_t k = 1; k < w.size(); ++k) w[k] = w[k - 1] + sd * r.normal();
        out.push_back(approx_critical(GridFunction(g, w), 0.0, static_cast<double>(m)));
    }
    const double target = std::sqrt(2.0 * v / M_PI);
    CHECK(std::abs(mean(out) - target) < 3.0 * stddev(out) / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("emptying time law at the end of overloading") {
    const Setup& s = setup();
    const auto k = first_emptying_index(s.fl);
    REQUIRE(k);
    CHECK(*k == kTau);
    const std::size_t paths = 10000;
    std::vector<GridFunction> xs;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream r(17, p);
        xs.push_back(sample_xhat(s.fl, kG, sample_bm_bridge(kGrid, r)));
    }
    const EmptyingSummary e = emptying_time(s.fl, s.ns, xs, *k);
    const double limit_sd = std::sqrt(0.9375) / (0.03 - 1.0 / 60.0);
    CHECK(limit_sd == doctest::Approx(72.6).epsilon(1e-3));
    CHECK(e.slope == doctest::Approx(1.0 / 60.0 - 0.03));
    CHECK(std::abs(e.std - limit_sd) < 3.0 * limit_sd / std::sqrt(2.0 * paths));
    CHECK(std::abs(e.mean) < 3.0 * limit_sd / std::sqrt(static_cast<double>(paths)));
    CHECK(e.predicted_std(1000) == doctest::Approx(e.std / std::sqrt(1000.0)));
    CHECK(limit_sd / std::sqrt(1000.0) == doctest::Approx(2.30).epsilon(0.01));
    CHECK(e.predicted_mean(1000) == doctest::Approx(25.0 - e.mean / std::sqrt(1000.0)));

    CHECK_THROWS_AS(emptying_time(s.fl, s.ns, xs, 400), InputError);
    FluidSolution flat = s.fl;
    flat.mu = 1.0 / 60.0;
    CHECK_THROWS_AS(emptying_time(flat, s.ns, xs, *k), InputError);
}

TEST_CASE("mode names") {
    CHECK(parse_xhat_mode("composition") == XhatMode::composition);
    CHECK(parse_xhat_mode("timechange") == XhatMode::timechange);
    CHECK(std::string(xhat_mode_name(XhatMode::timechange)) == "timechange");
    CHECK_THROWS_AS(parse_xhat_mode("euler"), InputError);
}
