#include <cmath>
#include <vector>

#include "doctest.h"
#include "transq/error.hpp"
#include "transq/rng.hpp"
#include "transq/stats.hpp"

using namespace transq;

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
}

TEST_CASE("Kolmogorov survival function reference values") {
    // Critical values of the limiting distribution.
    CHECK(kolmogorov_q(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(kolmogorov_q(1.6276236) == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(kolmogorov_q(0.0) == 1.0);
    CHECK(kolmogorov_q(5.0) < 1e-20);
}

TEST_CASE("moments") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(mean(v) == 2.5);
    CHECK(variance(v) == doctest::Approx(5.0 / 3.0));
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    RunningStats rs;
    for (double x : v) rs.push(x);
    CHECK(rs.count() == 4);
    CHECK(rs.mean() == 2.5);
    CHECK(rs.variance() == doctest::Approx(5.0 / 3.0));
    CHECK(rs.sem() == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("constant samples are rejected against a spread-out normal") {
    const std::vector<double> c(1000, 0.3);
    CHECK(ks_gaussian(c, 0.0, 1.0).p < 1e-10);
    CHECK_THROWS_AS(ks_gaussian(c, 0.0, 0.0), InputError);
}

TEST_CASE("one-sample KS rejects about 1% of true-null samples at alpha 0.01") {
    int rejections = 0;
    const int repeats = 200;
    for (int r = 0; r < repeats; ++r) {
        RngStream rng(2024, r);
        std::vector<double> x(1000);
        for (double& v : x) v = 1.0 + 2.0 * rng.normal();
        if (ks_gaussian(x, 1.0, 4.0).p < 0.01) ++rejections;
    }
    // Binomial(200, 0.01): P(X > 7) < 0.001.
    CHECK(rejections <= 7);
}

TEST_CASE("one-sample KS p-values are roughly uniform under the null") {
    int below_half = 0;
    for (int r = 0; r < 400; ++r) {
        RngStream rng(31, r);
        std::vector<double> x(500);
        for (double& v : x) v = rng.normal();
        if (ks_gaussian(x, 0.0, 1.0).p < 0.5) ++below_half;
    }
    CHECK(std::abs(below_half - 200) < 3.0 * 10.0);
}

TEST_CASE("two-sample KS") {
    RngStream a(1, 0), b(1, 1);
    std::vector<double> x(2000), y(2000), z(2000);
    for (double& v : x) v = a.normal();
    for (double& v : y) v = b.normal();
    for (double& v : z) v = b.normal() + 0.3;
    CHECK(ks_two_sample(x, y).p > 0.01);
    CHECK(ks_two_sample(x, z).p < 1e-6);
    CHECK(ks_two_sample(x, x).stat == 0.0);
}
