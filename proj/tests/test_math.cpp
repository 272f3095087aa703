#include <doctest.h>

#include <cmath>

#include "ipd/math.hpp"

using namespace ipd;

TEST_CASE("norm_cdf basic values")
{
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(norm_cdf(-8.0) == doctest::Approx(6.220960574271786e-16).epsilon(1e-10));
}

TEST_CASE("norm_quantile inverts norm_cdf to near machine precision")
{
    const double ps[] = {1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5,
                         0.75,  0.9,  0.99, 1 - 1e-6, 1 - 1e-10};
    for (double p : ps) {
        const double x = norm_quantile(p);
        CHECK(norm_cdf(x) == doctest::Approx(p).epsilon(1e-13));
    }
    CHECK(norm_quantile(0.75) == doctest::Approx(kZ75).epsilon(1e-15));
    CHECK_THROWS_AS(norm_quantile(0.0), RangeError);
    CHECK_THROWS_AS(norm_quantile(1.0), RangeError);
}

TEST_CASE("lognormal pdf/cdf/quantile consistency")
{
    const double m = 0.3, s = 0.4;
    const double x = lognorm_quantile(0.37, m, s);
    CHECK(lognorm_cdf(x, m, s) == doctest::Approx(0.37).epsilon(1e-13));
    // derivative of the CDF equals the pdf
    const double h = 1e-6 * x;
    const double num = (lognorm_cdf(x + h, m, s) - lognorm_cdf(x - h, m, s)) / (2 * h);
    CHECK(num == doctest::Approx(lognorm_pdf(x, m, s)).epsilon(1e-8));
    CHECK_THROWS_AS(lognorm_pdf(0.0, m, s), RangeError);
}

TEST_CASE("bsm_call known properties")
{
    const double S = 2503.87, r = 0.012, sigma = 0.0982, T = 178.0 / 365.0;
    // put-call parity against the synthetic put
    const double K = 2500.0;
    const double call = bsm_call(S, K, r, sigma, T);
    const double put = call - S + K * std::exp(-r * T);
    CHECK(put > 0.0);
    // deep ITM call approaches forward intrinsic value
    const double deep = bsm_call(S, 100.0, r, sigma, T);
    CHECK(deep == doctest::Approx(S - 100.0 * std::exp(-r * T)).epsilon(1e-12));
    // monotone decreasing in strike
    CHECK(bsm_call(S, 2400.0, r, sigma, T) > call);
    CHECK_THROWS_AS(bsm_call(S, K, r, -0.1, T), RangeError);
}

TEST_CASE("float instantiation compiles and is sane")
{
    const float q = norm_quantile(0.25f);
    CHECK(q == doctest::Approx(-kZ75).epsilon(1e-6));
    CHECK(bsm_call(100.0f, 100.0f, 0.01f, 0.2f, 1.0f) > 0.0f);
}
