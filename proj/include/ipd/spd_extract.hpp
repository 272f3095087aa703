#pragma once

#include <cmath>
#include <string>

#include "ipd/grid_density.hpp"
#include "ipd/nnls.hpp"
#include "ipd/option_chain.hpp"

namespace ipd {

/// Second-difference SPD estimate before any correction; values may be
/// negative where the chain violates convexity.
template <class Scalar>
struct RawSpdT {
    ArrayX<Scalar> grid;   // interior strikes of the chain
    ArrayX<Scalar> values; // may contain negatives

    RawSpdT() = default;
    RawSpdT(ArrayX<Scalar> g, ArrayX<Scalar> v) : grid(std::move(g)), values(std::move(v))
    {
        if (grid.size() != values.size())
            throw InvalidInput("RawSpd: grid/value length mismatch");
        detail::check_strictly_increasing(grid, "RawSpd");
    }
};

using RawSpd = RawSpdT<double>;

/// Numerical Breeden-Litzenberger: the SPD as a second strike difference,
/// q(K_{i+1}) ~ (C(K_i) - 2 C(K_{i+1}) + C(K_{i+2})) / dK^2.
template <class Scalar>
RawSpdT<Scalar> bl_raw_spd(const OptionChainT<Scalar>& chain)
{
    const Index n = chain.size();
    if (n < 3)
        throw InvalidInput("bl_raw_spd: need at least 3 strikes");
    const Scalar dk2 = chain.strike_step * chain.strike_step;
    ArrayX<Scalar> grid(n - 2), values(n - 2);
    for (Index i = 0; i + 2 < n; ++i) {
        grid[i] = chain.strikes[i + 1];
        values[i] =
            (chain.calls[i] - Scalar(2) * chain.calls[i + 1] + chain.calls[i + 2]) / dk2;
    }
    return {std::move(grid), std::move(values)};
}

/// Slope estimates q(K_{i+1}) - q(K_{i-1}) from concatenated short/long
/// butterfly prices, plus the pair of states where q = 0 is imposed.
///
/// Centered slope equations only couple nodes of equal parity, so the system
/// is invertible exactly when each parity chain holds one boundary anchor.
template <class Scalar>
struct SlopeSystemT {
    ArrayX<Scalar> strikes; // full chain strikes
    ArrayX<Scalar> slopes;  // centers i = 2 .. n-3, units of q per state
    Scalar boundary_low = 0;
    Scalar boundary_high = 0;
};

using SlopeSystem = SlopeSystemT<double>;

/// Butterfly slope estimates with explicit boundary states.
template <class Scalar>
SlopeSystemT<Scalar> butterfly_slopes(const OptionChainT<Scalar>& chain, Scalar boundary_low,
                                      Scalar boundary_high)
{
    const Index n = chain.size();
    if (n < 5)
        throw InvalidInput("butterfly_slopes: need at least 5 strikes");
    const Scalar dk2 = chain.strike_step * chain.strike_step;
    SlopeSystemT<Scalar> sys;
    sys.strikes = chain.strikes;
    sys.slopes.resize(n - 4);
    for (Index i = 2; i + 2 < n; ++i)
        sys.slopes[i - 2] = (-chain.calls[i - 2] + Scalar(2) * chain.calls[i - 1] -
                             Scalar(2) * chain.calls[i + 1] + chain.calls[i + 2]) /
                            dk2;
    sys.boundary_low = boundary_low;
    sys.boundary_high = boundary_high;
    return sys;
}

/// Default boundaries: the lowest interior strike plus the highest interior
/// strike of opposite node parity, so both parity chains are anchored.
template <class Scalar>
SlopeSystemT<Scalar> butterfly_slopes(const OptionChainT<Scalar>& chain)
{
    const Index n = chain.size();
    if (n < 5)
        throw InvalidInput("butterfly_slopes: need at least 5 strikes");
    const Index high = (n % 2 == 0) ? n - 2 : n - 3;
    return butterfly_slopes(chain, chain.strikes[1], chain.strikes[high]);
}

/// Integrate the slope system into an SPD on the interior strike grid.
/// Re-differencing the output reproduces the input slopes exactly.
template <class Scalar>
RawSpdT<Scalar> solve_slope_spd(const SlopeSystemT<Scalar>& sys)
{
    const Index n = sys.strikes.size();
    if (n < 5 || sys.slopes.size() != n - 4)
        throw InvalidInput("solve_slope_spd: inconsistent system dimensions");
    const Scalar dk = sys.strikes[1] - sys.strikes[0];

    auto locate = [&](Scalar state) -> Index {
        for (Index i = 1; i + 1 < n; ++i)
            if (std::abs(sys.strikes[i] - state) <= Scalar(1e-9) * dk)
                return i;
        throw InvalidInput("solve_slope_spd: boundary state " +
                           std::to_string(double(state)) + " not on the interior grid");
    };
    const Index blo = locate(sys.boundary_low);
    const Index bhi = locate(sys.boundary_high);
    if (blo == bhi)
        throw InvalidInput("solve_slope_spd: boundary states coincide");
    if (blo % 2 == bhi % 2)
        throw SolverError("solve_slope_spd: singular system (boundary states share node "
                          "parity, one slope chain is unanchored)");

    ArrayX<Scalar> q = ArrayX<Scalar>::Zero(n);
    // March each parity chain away from its anchor; the equation with center
    // j links nodes j-1 and j+1 through slopes[j-2].
    for (Index anchor : {blo, bhi}) {
        q[anchor] = Scalar(0);
        for (Index i = anchor + 2; i <= n - 2; i += 2)
            q[i] = q[i - 2] + sys.slopes[i - 3];
        for (Index i = anchor - 2; i >= 1; i -= 2)
            q[i] = q[i + 2] - sys.slopes[i - 1];
    }

    ArrayX<Scalar> grid(n - 2), values(n - 2);
    for (Index i = 1; i + 1 < n; ++i) {
        grid[i - 1] = sys.strikes[i];
        values[i - 1] = q[i];
    }
    return {std::move(grid), std::move(values)};
}

/// Clip negatives to zero and rescale so the trapezoid mass equals the
/// benchmark bond price (discount factor).
template <class Scalar>
GridDensityT<Scalar> clip_rescale(const RawSpdT<Scalar>& raw, Scalar discount)
{
    if (!(discount > Scalar(0)) || discount > Scalar(1))
        throw InvalidInput("clip_rescale: discount must lie in (0, 1]");
    ArrayX<Scalar> clipped = raw.values.max(Scalar(0));
    const Scalar m = detail::trapezoid(raw.grid, clipped);
    if (!(m > Scalar(0)))
        throw InvalidInput("clip_rescale: all values nonpositive, nothing to rescale");
    clipped *= discount / m;
    return {raw.grid, std::move(clipped), DensityKind::Spd};
}

/// Trapezoid cell weights on a state grid; end cells get half width.
/// A single-point grid gets unit weight (degenerate quadrature).
template <class Scalar>
ArrayX<Scalar> trapezoid_cell_weights(const ArrayX<Scalar>& grid)
{
    const Index n = grid.size();
    ArrayX<Scalar> w(n);
    if (n == 1) {
        w[0] = Scalar(1);
        return w;
    }
    w[0] = Scalar(0.5) * (grid[1] - grid[0]);
    for (Index j = 1; j + 1 < n; ++j)
        w[j] = Scalar(0.5) * (grid[j + 1] - grid[j - 1]);
    w[n - 1] = Scalar(0.5) * (grid[n - 1] - grid[n - 2]);
    return w;
}

/// Nonnegativity-constrained least-squares SPD: solve
/// argmin_{q >= 0} (c - P q)^T W (c - P q) with P the payoff matrix
/// max(s_j - K_i, 0) carrying trapezoid cell weights, W diagonal.
/// An empty weight vector means the identity.
template <class Scalar>
GridDensityT<Scalar> nnls_spd(const OptionChainT<Scalar>& chain, const ArrayX<Scalar>& grid,
                              const ArrayX<Scalar>& weights = {})
{
    const Index n_opt = chain.size();
    const Index n_state = grid.size();
    if (n_state == 0)
        throw InvalidInput("nnls_spd: empty state grid");
    detail::check_strictly_increasing(grid, "nnls_spd");
    if (weights.size() != 0 && weights.size() != n_opt)
        throw InvalidInput("nnls_spd: weight length must equal the number of options");

    const ArrayX<Scalar> cellw = trapezoid_cell_weights(grid);
    MatrixX<Scalar> A(n_opt, n_state);
    VectorX<Scalar> b(n_opt);
    for (Index i = 0; i < n_opt; ++i) {
        const Scalar sw =
            weights.size() ? std::sqrt(std::max(weights[i], Scalar(0))) : Scalar(1);
        for (Index j = 0; j < n_state; ++j)
            A(i, j) = sw * std::max(grid[j] - chain.strikes[i], Scalar(0)) * cellw[j];
        b[i] = sw * chain.calls[i];
    }

    const auto sol = nnls_solve(A, b);
    return {grid, sol.x.array(), DensityKind::Spd};
}

/// Default state grid: the strike grid itself.
template <class Scalar>
GridDensityT<Scalar> nnls_spd(const OptionChainT<Scalar>& chain)
{
    return nnls_spd(chain, chain.strikes);
}

/// Price European calls off an SPD by trapezoid quadrature of
/// max(s - K, 0) q(s). Strikes below the grid are fine (the payoff is linear
/// across the whole support); strikes above the grid cannot be priced.
template <class Scalar>
ArrayX<Scalar> reprice_calls(const GridDensityT<Scalar>& spd, const ArrayX<Scalar>& strikes)
{
    const auto& g = spd.grid;
    const Index n = g.size();
    ArrayX<Scalar> prices(strikes.size());
    for (Index k = 0; k < strikes.size(); ++k) {
        const Scalar K = strikes[k];
        if (K > g[n - 1])
            throw RangeError("reprice_calls: strike " + std::to_string(double(K)) +
                             " above the state grid, cannot extrapolate");
        Scalar acc(0);
        for (Index i = 0; i + 1 < n; ++i) {
            const Scalar f0 = std::max(g[i] - K, Scalar(0)) * spd.values[i];
            const Scalar f1 = std::max(g[i + 1] - K, Scalar(0)) * spd.values[i + 1];
            acc += Scalar(0.5) * (f0 + f1) * (g[i + 1] - g[i]);
        }
        prices[k] = acc;
    }
    return prices;
}

template <class Scalar>
struct CalibratedPricesT {
    ArrayX<Scalar> prices;
    Scalar factor = 1;
};

using CalibratedPrices = CalibratedPricesT<double>;

/// Repricing with a multiplicative calibration factor solved at a reference
/// strike: factor = C_observed(K_ref) / C_model(K_ref).
template <class Scalar>
CalibratedPricesT<Scalar> reprice_calls_calibrated(const GridDensityT<Scalar>& spd,
                                                   const ArrayX<Scalar>& strikes, Scalar k_ref,
                                                   Scalar observed_ref)
{
    ArrayX<Scalar> ref(1);
    ref[0] = k_ref;
    const Scalar model_ref = reprice_calls(spd, ref)[0];
    if (!(model_ref > Scalar(0)))
        throw InvalidInput("reprice_calls_calibrated: model price at the reference strike "
                           "is not positive");
    CalibratedPricesT<Scalar> out;
    out.factor = observed_ref / model_ref;
    out.prices = reprice_calls(spd, strikes) * out.factor;
    return out;
}

} // namespace ipd
