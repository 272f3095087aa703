#include <doctest.h>

#include <cmath>
#include <random>

#include "ipd/bsm.hpp"
#include "ipd/grid_density.hpp"

using namespace ipd;

namespace {

ArrayX<double> linspace(double lo, double hi, Index n)
{
    ArrayX<double> g(n);
    for (Index i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return g;
}

// Analytic lognormal moments used as oracles throughout this file.
struct LognormMoments {
    double mean, median, std, skew, kurt;
};

LognormMoments lognorm_moments(double m, double s)
{
    const double es2 = std::exp(s * s);
    LognormMoments out;
    out.mean = std::exp(m + 0.5 * s * s);
    out.median = std::exp(m);
    out.std = out.mean * std::sqrt(es2 - 1.0);
    out.skew = (es2 + 2.0) * std::sqrt(es2 - 1.0);
    // raw kurtosis: e^{4s^2} + 2 e^{3s^2} + 3 e^{2s^2} - 3
    out.kurt = std::exp(4 * s * s) + 2 * std::exp(3 * s * s) + 3 * std::exp(2 * s * s) - 3.0;
    return out;
}

} // namespace

TEST_CASE("uniform density quantiles and IQR")
{
    const auto g = linspace(0.0, 1.0, 1001);
    GridDensity d(g, ArrayX<double>::Ones(1001), DensityKind::Probability);
    CHECK(quantile(d, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(iqr(d) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mass(d) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dense lognormal(0,1) IQR matches the inverse-normal quartiles")
{
    const auto g = linspace(1e-6, 100.0, 1000001);
    ArrayX<double> v(g.size());
    for (Index i = 0; i < g.size(); ++i)
        v[i] = lognorm_pdf(g[i], 0.0, 1.0);
    v /= detail::trapezoid(g, v);
    GridDensity d(g, v, DensityKind::Probability);
    // e^{z75} - e^{-z75}
    CHECK(iqr(d) == doctest::Approx(1.4536148002949796).epsilon(2e-5));
}

TEST_CASE("cdf endpoints and monotonicity")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Index n = 5 + rep;
        auto g = linspace(0.0, 2.0, n);
        ArrayX<double> v(n);
        for (Index i = 0; i < n; ++i)
            v[i] = u(rng);
        const double m = detail::trapezoid(g, v);
        GridDensity d(g, v / m, DensityKind::Probability);
        CHECK(cdf(d, g[0]) == 0.0);
        CHECK(cdf(d, g[n - 1]) == doctest::Approx(mass(d)).epsilon(1e-14));
        double prev = -1.0;
        for (double x = 0.0; x <= 2.0; x += 0.01) {
            const double F = cdf(d, x);
            CHECK(F >= prev - 1e-15);
            prev = F;
        }
    }
}

TEST_CASE("quantile inverts cdf within one grid cell")
{
    const auto g = linspace(1.0, 3.0, 101);
    ArrayX<double> v(g.size());
    for (Index i = 0; i < g.size(); ++i)
        v[i] = lognorm_pdf(g[i], std::log(2.0), 0.2);
    const double m = detail::trapezoid(g, v);
    GridDensity d(g, v / m, DensityKind::Probability);
    const double cell = g[1] - g[0];
    for (double x = 1.2; x < 2.9; x += 0.05) {
        const double p = cdf(d, x) / mass(d);
        CHECK(std::abs(quantile(d, p) - x) <= cell + 1e-12);
    }
}

TEST_CASE("quantile ties resolve to the leftmost node attaining the level")
{
    // Zero-density plateau in the middle; the masses are binary-exact so the
    // 0.5 level lands exactly on the plateau's node CDF value. The leftmost
    // state attaining cdf = 0.375 is the plateau's left edge at x = 2.
    ArrayX<double> g(6), v(6);
    g << 0, 1, 2, 3, 4, 5;
    v << 0.25, 0.25, 0.0, 0.0, 0.25, 0.25; // SPD mass 0.75
    GridDensity d(g, v, DensityKind::Spd);
    CHECK(quantile(d, 0.5) == 2.0);
}

TEST_CASE("moments: symmetric triangle has zero skew")
{
    const auto g = linspace(-1.0, 1.0, 2001);
    ArrayX<double> v = 1.0 - g.abs();
    GridDensity d(g, v, DensityKind::Probability);
    const auto m = moments(d);
    CHECK(std::abs(m.skew) < 1e-10);
    CHECK(m.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("moments: standard normal kurtosis is 3")
{
    const auto g = linspace(-10.0, 10.0, 20001);
    ArrayX<double> v(g.size());
    for (Index i = 0; i < g.size(); ++i)
        v[i] = norm_pdf(g[i]);
    GridDensity d(g, v, DensityKind::Probability);
    CHECK(moments(d).kurtosis == doctest::Approx(3.0).epsilon(1e-3 / 3.0));
}

TEST_CASE("moments: lognormal skew matches the analytic formula")
{
    const double s = 0.0982 * std::sqrt(178.0 / 365.0);
    const double m = std::log(2500.0);
    const auto ref = lognorm_moments(m, s);
    // +-8 log-std support
    const double lo = std::exp(m - 8 * s), hi = std::exp(m + 8 * s);
    const auto g = linspace(lo, hi, 40001);
    ArrayX<double> v(g.size());
    for (Index i = 0; i < g.size(); ++i)
        v[i] = lognorm_pdf(g[i], m, s);
    GridDensity d(g, v, DensityKind::Probability);
    const auto mm = moments(d);
    CHECK(mm.skew == doctest::Approx(ref.skew).epsilon(1e-4));
    CHECK(mm.mean == doctest::Approx(ref.mean).epsilon(1e-8));
    CHECK(mm.std == doctest::Approx(ref.std).epsilon(1e-6));
    CHECK(mm.kurtosis == doctest::Approx(ref.kurt).epsilon(1e-4));
    CHECK(mm.median == doctest::Approx(ref.median).epsilon(1e-6));
}

TEST_CASE("GridDensity invariants are enforced")
{
    ArrayX<double> g(3), v(3);
    g << 0, 1, 2;
    v << 0.5, 1.0, 0.5; // mass 1.5
    CHECK_THROWS_AS(GridDensity(g, v, DensityKind::Probability), InvalidInput);
    v << 0.5, -0.1, 0.5;
    CHECK_THROWS_AS(GridDensity(g, v, DensityKind::Spd), InvalidInput);
    ArrayX<double> bad = g;
    bad[2] = 1.0;
    v << 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(GridDensity(bad, v, DensityKind::Spd), InvalidInput);
}

TEST_CASE("BSM physical density: peak value, median, unit mass")
{
    const BsmParams p(100.0, 0.0, 0.0, 0.2, 1.0);
    const double x_star = 100.0 * std::exp(-0.02); // the log-mean point
    CHECK(bsm_physical_density(p, x_star) ==
          doctest::Approx(1.0 / (x_star * 0.2 * std::sqrt(2 * M_PI))).epsilon(1e-12));

    const auto d = sample_bsm_physical(p);
    CHECK(mass(d) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(quantile(d, 0.5) == doctest::Approx(x_star).epsilon(1e-5));
    CHECK_THROWS_AS(bsm_physical_density(p, -1.0), RangeError);
}

TEST_CASE("BSM SPD: discounted mass, forward identity, call pricing oracle")
{
    const BsmParams p(2503.87, 0.012, 0.094, 0.0982, 178.0 / 365.0);
    const auto q = sample_bsm_spd(p, 8001);
    CHECK(mass(q) == doctest::Approx(p.discount()).epsilon(1e-6));

    // martingale pricing of the stock: int x q(x) dx = S_t
    const double fwd = detail::trapezoid<double>(q.grid, (q.grid * q.values).eval());
    CHECK(fwd == doctest::Approx(p.spot).epsilon(1e-6));

    // quadrature of max(x - K, 0) q(x) against the closed form
    const double K = 2500.0;
    ArrayX<double> integrand(q.grid.size());
    for (Index i = 0; i < q.grid.size(); ++i)
        integrand[i] = std::max(q.grid[i] - K, 0.0) * q.values[i];
    const double priced = detail::trapezoid(q.grid, integrand);
    CHECK(priced == doctest::Approx(bsm_call(p.spot, K, p.rate, p.sigma, p.expiry))
                        .epsilon(1e-4));
}

TEST_CASE("sampled BSM physical moments match analytic lognormal moments")
{
    const BsmParams p(2503.87, 0.012, 0.094, 0.0982, 178.0 / 365.0);
    const auto ref = lognorm_moments(p.log_mean_physical(), p.log_std());
    const auto d = sample_bsm_physical(p, 4001, norm_cdf(-8.0));
    const auto mm = moments(d);
    CHECK(mm.mean == doctest::Approx(ref.mean).epsilon(1e-4));
    CHECK(mm.std == doctest::Approx(ref.std).epsilon(1e-4));
    CHECK(mm.skew == doctest::Approx(ref.skew).epsilon(1e-4));
    CHECK(mm.kurtosis == doctest::Approx(ref.kurt).epsilon(1e-4));
}
