#pragma once

#include <cmath>
#include <string>

#include "ipd/bsm.hpp"
#include "ipd/grid_density.hpp"
#include "ipd/math.hpp"

namespace ipd {

/// Continuously compounded short rate from a simple annual yield.
template <class Scalar>
Scalar short_rate_from_yield(Scalar annual_yield)
{
    if (!(annual_yield > Scalar(-1)))
        throw RangeError("short_rate_from_yield: yield must exceed -1");
    return std::log1p(annual_yield);
}

/// Realized log-return trend over the window; annualization (dividing by the
/// elapsed year fraction) is the caller's responsibility.
template <class Scalar>
Scalar trend_from_returns(Scalar spot_now, Scalar spot_then)
{
    if (!(spot_now > Scalar(0)) || !(spot_then > Scalar(0)))
        throw RangeError("trend_from_returns: prices must be positive");
    return std::log(spot_now / spot_then);
}

namespace detail {

/// IQR of the BSM risk-neutral density, closed form:
/// exp(ln S + (r - sigma^2/2) T) * 2 sinh(sigma sqrt(T) z75).
template <class Scalar>
Scalar bsm_rn_iqr(Scalar spot, Scalar rate, Scalar sigma, Scalar expiry)
{
    const Scalar m = std::log(spot) + (rate - Scalar(0.5) * sigma * sigma) * expiry;
    return std::exp(m) * Scalar(2) * std::sinh(sigma * std::sqrt(expiry) * Scalar(kZ75));
}

/// The RN IQR increases in sigma only while sigma sqrt(T) stays below the
/// root w* of (z - w) e^{wz} + (z + w) e^{-wz}, z = z75 (w* ~ 1.0824);
/// beyond it the e^{-sigma^2 T / 2} factor wins and the IQR falls again.
template <class Scalar>
Scalar iqr_peak_log_std()
{
    const Scalar z = Scalar(kZ75);
    auto g = [z](Scalar w) {
        return (z - w) * std::exp(w * z) + (z + w) * std::exp(-w * z);
    };
    Scalar lo = z, hi = Scalar(60);
    for (int it = 0; it < 200; ++it) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        (g(mid) > Scalar(0) ? lo : hi) = mid;
    }
    return Scalar(0.5) * (lo + hi);
}

} // namespace detail

/// Implied volatility by IQR matching: the sigma whose BSM risk-neutral
/// density has the same interquartile range as the normalized input SPD.
/// Bisection runs on the increasing branch of sigma -> IQR within
/// sigma in [1e-4, 5]; targets outside the achievable range raise
/// CalibrationError.
template <class Scalar>
Scalar implied_sigma_by_iqr(const GridDensityT<Scalar>& q1, Scalar spot, Scalar rate,
                            Scalar expiry)
{
    if (!(spot > Scalar(0)) || !(expiry > Scalar(0)))
        throw InvalidInput("implied_sigma_by_iqr: spot and expiry must be positive");
    const Scalar target = iqr(q1);
    if (!(target > Scalar(0)))
        throw CalibrationError("implied_sigma_by_iqr: degenerate SPD interquartile range");

    static const Scalar peak_w = detail::iqr_peak_log_std<Scalar>();
    Scalar lo = Scalar(1e-4);
    Scalar hi = std::min(Scalar(5), peak_w / std::sqrt(expiry));
    const Scalar f_lo = detail::bsm_rn_iqr(spot, rate, lo, expiry);
    const Scalar f_hi = detail::bsm_rn_iqr(spot, rate, hi, expiry);
    if (target < f_lo || target > f_hi)
        throw CalibrationError(
            "implied_sigma_by_iqr: target IQR " + std::to_string(double(target)) +
            " outside the range achievable for sigma in [1e-4, 5]");

    while (hi - lo > Scalar(1e-10)) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        (detail::bsm_rn_iqr(spot, rate, mid, expiry) < target ? lo : hi) = mid;
    }
    return Scalar(0.5) * (lo + hi);
}

} // namespace ipd
