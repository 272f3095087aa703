#pragma once

#include <cmath>

#include "ipd/grid_density.hpp"
#include "ipd/math.hpp"

namespace ipd {

/// Benchmark Black-Scholes-Merton model over one period [t, T].
/// The physical terminal density is lognormal with log-mean
/// ln S + (mu - sigma^2/2) (T - t); the risk-neutral one replaces mu by r.
template <class Scalar>
struct BsmParamsT {
    Scalar spot;   // S_t, currency units
    Scalar rate;   // continuously compounded short rate, 1/year
    Scalar trend;  // physical drift mu, 1/year
    Scalar sigma;  // volatility, 1/sqrt(year)
    Scalar expiry; // T - t, years

    BsmParamsT(Scalar S, Scalar r, Scalar mu, Scalar vol, Scalar T)
        : spot(S), rate(r), trend(mu), sigma(vol), expiry(T)
    {
        if (!(spot > Scalar(0)))
            throw InvalidInput("BsmParams: spot must be positive");
        if (!(sigma > Scalar(0)))
            throw InvalidInput("BsmParams: sigma must be positive");
        if (!(expiry > Scalar(0)))
            throw InvalidInput("BsmParams: expiry must be positive");
    }

    Scalar log_std() const { return sigma * std::sqrt(expiry); }
    Scalar log_mean_physical() const
    {
        return std::log(spot) + (trend - Scalar(0.5) * sigma * sigma) * expiry;
    }
    Scalar log_mean_rn() const
    {
        return std::log(spot) + (rate - Scalar(0.5) * sigma * sigma) * expiry;
    }
    Scalar discount() const { return std::exp(-rate * expiry); }
    Scalar market_price_of_risk() const { return (trend - rate) / sigma; }

    BsmParamsT with_trend(Scalar mu) const { return {spot, rate, mu, sigma, expiry}; }
    BsmParamsT with_sigma(Scalar vol) const { return {spot, rate, trend, vol, expiry}; }
};

using BsmParams = BsmParamsT<double>;

template <class Scalar>
Scalar bsm_physical_density(const BsmParamsT<Scalar>& p, Scalar x)
{
    if (!(x > Scalar(0)))
        throw RangeError("bsm_physical_density: state must be positive");
    return lognorm_pdf(x, p.log_mean_physical(), p.log_std());
}

/// Risk-neutral probability density (unit mass).
template <class Scalar>
Scalar bsm_rn_density(const BsmParamsT<Scalar>& p, Scalar x)
{
    if (!(x > Scalar(0)))
        throw RangeError("bsm_rn_density: state must be positive");
    return lognorm_pdf(x, p.log_mean_rn(), p.log_std());
}

/// State-price density q(x) = e^{-rT} * rn_density(x); integrates to the
/// discount factor.
template <class Scalar>
Scalar bsm_spd(const BsmParamsT<Scalar>& p, Scalar x)
{
    return p.discount() * bsm_rn_density(p, x);
}

template <class Scalar>
Scalar bsm_physical_cdf(const BsmParamsT<Scalar>& p, Scalar x)
{
    return lognorm_cdf(x, p.log_mean_physical(), p.log_std());
}

template <class Scalar>
Scalar bsm_physical_quantile(const BsmParamsT<Scalar>& p, Scalar prob)
{
    return lognorm_quantile(prob, p.log_mean_physical(), p.log_std());
}

template <class Scalar>
Scalar bsm_rn_cdf(const BsmParamsT<Scalar>& p, Scalar x)
{
    return lognorm_cdf(x, p.log_mean_rn(), p.log_std());
}

template <class Scalar>
Scalar bsm_rn_quantile(const BsmParamsT<Scalar>& p, Scalar prob)
{
    return lognorm_quantile(prob, p.log_mean_rn(), p.log_std());
}

namespace detail {

// Uniform grid over the quantile-bounded support [max(floor, Q(tail)), Q(1-tail)].
template <class Scalar>
ArrayX<Scalar> quantile_grid(Scalar log_loc, Scalar log_scale, Index n, Scalar tail)
{
    const Scalar lo =
        std::max(Scalar(1e-12), lognorm_quantile(tail, log_loc, log_scale));
    const Scalar hi = lognorm_quantile(Scalar(1) - tail, log_loc, log_scale);
    ArrayX<Scalar> g(n);
    for (Index i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * Scalar(i) / Scalar(n - 1);
    return g;
}

} // namespace detail

/// Sample the physical density on a uniform grid spanning quantiles
/// [tail, 1 - tail]; defaults give mass 1 within 1e-6.
template <class Scalar>
GridDensityT<Scalar> sample_bsm_physical(const BsmParamsT<Scalar>& p, Index n = 4001,
                                         Scalar tail = Scalar(1e-8))
{
    const ArrayX<Scalar> g =
        detail::quantile_grid(p.log_mean_physical(), p.log_std(), n, tail);
    ArrayX<Scalar> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = bsm_physical_density(p, g[i]);
    return {g, v, DensityKind::Probability};
}

/// Sample the state-price density; mass approaches e^{-rT} as the grid
/// widens and refines.
template <class Scalar>
GridDensityT<Scalar> sample_bsm_spd(const BsmParamsT<Scalar>& p, Index n = 4001,
                                    Scalar tail = Scalar(1e-8))
{
    const ArrayX<Scalar> g = detail::quantile_grid(p.log_mean_rn(), p.log_std(), n, tail);
    ArrayX<Scalar> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = bsm_spd(p, g[i]);
    return {g, v, DensityKind::Spd};
}

/// A scaled lognormal state-price density, discount * LogN(log_loc, log_scale).
/// This is the fitted-benchmark representation the smoothing scheme works
/// against.
template <class Scalar>
struct LognormalSpdT {
    Scalar log_loc;
    Scalar log_scale;
    Scalar discount;

    Scalar density(Scalar x) const { return discount * lognorm_pdf(x, log_loc, log_scale); }
    Scalar rn_density(Scalar x) const { return lognorm_pdf(x, log_loc, log_scale); }
    Scalar rn_cdf(Scalar x) const { return lognorm_cdf(x, log_loc, log_scale); }
    Scalar rn_quantile(Scalar p) const { return lognorm_quantile(p, log_loc, log_scale); }
    /// Volatility implied by the log-scale for a given time to expiry.
    Scalar annualized_sigma(Scalar expiry) const { return log_scale / std::sqrt(expiry); }
};

using LognormalSpd = LognormalSpdT<double>;

template <class Scalar>
LognormalSpdT<Scalar> rn_spd(const BsmParamsT<Scalar>& p)
{
    return {p.log_mean_rn(), p.log_std(), p.discount()};
}

/// Sample a lognormal SPD on its quantile-bounded support.
template <class Scalar>
GridDensityT<Scalar> sample_lognormal_spd(const LognormalSpdT<Scalar>& q, Index n = 4001,
                                          Scalar tail = Scalar(1e-8))
{
    const ArrayX<Scalar> g = detail::quantile_grid(q.log_loc, q.log_scale, n, tail);
    ArrayX<Scalar> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = q.density(g[i]);
    return {g, v, DensityKind::Spd};
}

} // namespace ipd
