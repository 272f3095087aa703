#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ipd/option_chain.hpp"

using namespace ipd;

namespace {

// Test-only pricing oracle: call prices by fine trapezoid quadrature of
// max(s - K, 0) against a density callable. The quadrature grid is a uniform
// refinement of the strike lattice so every strike sits on a node and the
// payoff kink never lands inside a cell.
template <class F>
ArrayX<double> quad_call_prices(F&& density, double k_min, double k_max, double dk,
                                Index n_strikes, int refine = 64)
{
    const Index cells = (n_strikes - 1) * refine;
    const double h = dk / refine;
    ArrayX<double> dens(cells + 1);
    for (Index j = 0; j <= cells; ++j)
        dens[j] = density(k_min + h * double(j));
    ArrayX<double> prices(n_strikes);
    for (Index i = 0; i < n_strikes; ++i) {
        const double K = k_min + dk * double(i);
        double acc = 0.0;
        for (Index j = Index(i) * refine; j < cells; ++j) {
            const double s0 = k_min + h * double(j), s1 = s0 + h;
            acc += 0.5 * ((s0 - K) * dens[j] + (s1 - K) * dens[j + 1]) * h;
        }
        prices[i] = acc;
    }
    return prices;
}

} // namespace

TEST_CASE("parse_chain accepts a deep ITM linear segment")
{
    std::istringstream in("strike,call\n1000,1503.9\n1001,1502.9\n1002,1501.9\n");
    const auto chain = parse_chain<double>(in, 2503.87, 178.0 / 365.0);
    CHECK(chain.size() == 3);
    CHECK(chain.strike_step == doctest::Approx(1.0));
    CHECK(chain.spot == 2503.87);
    CHECK(chain.calls[2] == 1501.9);
}

TEST_CASE("parse_chain sorts rows before validating")
{
    std::istringstream in("strike,call\n1002,1501.9\n1000,1503.9\n1001,1502.9\n");
    const auto chain = parse_chain<double>(in, 2503.87, 0.5);
    CHECK(chain.strikes[0] == 1000.0);
    CHECK(chain.calls[0] == 1503.9);
}

TEST_CASE("parse_chain structural and parse errors")
{
    {
        // missing 1002 row: spacing violation against the leading step of 1
        std::istringstream in("strike,call\n1000,10\n1001,9.5\n1003,9\n");
        CHECK_THROWS_AS(parse_chain<double>(in, 100.0, 0.5), InvalidInput);
    }
    {
        std::istringstream in("strike,call\n");
        CHECK_THROWS_AS(parse_chain<double>(in, 100.0, 0.5), InvalidInput); // empty chain
    }
    {
        std::istringstream in("strike,call\n1000,10\n1001,oops\n");
        try {
            parse_chain<double>(in, 100.0, 0.5);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    {
        std::istringstream in("wrong,header\n1000,10\n");
        CHECK_THROWS_AS(parse_chain<double>(in, 100.0, 0.5), ParseError);
    }
    {
        std::istringstream in("strike,call\n1000,-1\n1001,1\n");
        CHECK_THROWS_AS(parse_chain<double>(in, 100.0, 0.5), InvalidInput); // negative price
    }
}

TEST_CASE("synthetic BSM chain: 2001 strikes, serialize/parse identity")
{
    const BsmParams p(2503.87, 0.012, 0.094, 0.0982, 178.0 / 365.0);
    const auto chain = make_bsm_chain(p, 1000.0, 3000.0, 1.0);
    CHECK(chain.size() == 2001);

    std::stringstream buf;
    serialize_chain(buf, chain);
    const auto back = parse_chain<double>(buf, chain.spot, chain.expiry);
    REQUIRE(back.size() == chain.size());
    for (Index i = 0; i < chain.size(); ++i) {
        CHECK(back.strikes[i] == chain.strikes[i]);
        CHECK(back.calls[i] ==
              doctest::Approx(chain.calls[i]).epsilon(1e-12)); // exact with %.17g
    }
}

TEST_CASE("validate_chain: exact BSM chain is clean")
{
    const BsmParams p(2503.87, 0.012, 0.094, 0.0982, 178.0 / 365.0);
    const auto chain = make_bsm_chain(p, 1000.0, 3000.0, 1.0);
    const auto diag = validate_chain(chain);
    CHECK(diag.monotonicity_violations.empty());
    CHECK(diag.convexity_violations.empty());
    CHECK(diag.clean());
}

TEST_CASE("validate_chain flags the definitional examples")
{
    ArrayX<double> k(3), c(3);
    k << 100, 101, 102;
    c << 10, 11, 9;
    auto chain = OptionChain::make(100.0, 0.5, k, c);
    auto diag = validate_chain(chain);
    REQUIRE(diag.monotonicity_violations.size() == 1);
    CHECK(diag.monotonicity_violations[0] == 0);
    // 10 - 22 + 9 = -3 < 0 is also a convexity violation at index 0
    REQUIRE(diag.convexity_violations.size() == 1);
    CHECK(diag.convexity_violations[0] == 0);

    c << 10, 5, 4; // 10 - 10 + 4 = 4 >= 0 holds: no convexity violation
    chain = OptionChain::make(100.0, 0.5, k, c);
    diag = validate_chain(chain);
    CHECK(diag.convexity_violations.empty());
    CHECK(diag.monotonicity_violations.empty());
}

TEST_CASE("chains priced from valid SPDs validate clean")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double k_min = 1000.0, k_max = 3000.0, dk = 5.0;
    const Index n = Index((k_max - k_min) / dk) + 1;

    for (int rep = 0; rep < 5; ++rep) {
        // mixture of two lognormals plus a small uniform baseline keeps the
        // density bounded away from zero across the whole strike range
        const double m1 = std::log(1800.0 + 600.0 * u(rng));
        const double m2 = std::log(1600.0 + 400.0 * u(rng));
        const double s1 = 0.05 + 0.1 * u(rng), s2 = 0.1 + 0.2 * u(rng);
        const double w = 0.3 + 0.5 * u(rng);
        auto density = [&](double s) {
            const double base = 1e-5 / (k_max - k_min);
            return 0.98 * (w * lognorm_pdf(s, m1, s1) + (1.0 - w) * lognorm_pdf(s, m2, s2)) +
                   base;
        };
        const auto prices = quad_call_prices(density, k_min, k_max, dk, n, 32);
        const auto chain = OptionChain::make(
            2500.0, 0.5, ArrayX<double>::LinSpaced(n, k_min, k_max), prices);
        CHECK(validate_chain(chain).clean());
    }
}

TEST_CASE("make_bsm_chain rejects bad geometry")
{
    const BsmParams p(100.0, 0.01, 0.05, 0.2, 1.0);
    CHECK_THROWS_AS(make_bsm_chain(p, 100.0, 90.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(make_bsm_chain(p, 90.0, 100.0, -1.0), InvalidInput);
}
