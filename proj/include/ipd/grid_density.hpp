#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ipd/errors.hpp"
#include "ipd/types.hpp"

namespace ipd {

enum class DensityKind { Spd, Probability };

namespace detail {

/// Composite trapezoid of sampled values over a grid. Single-point grids use
/// a unit-cell convention (mass equals the lone value) so degenerate 1x1
/// problems stay representable.
template <class Scalar>
Scalar trapezoid(const ArrayX<Scalar>& grid, const ArrayX<Scalar>& values)
{
    const Index n = grid.size();
    if (n == 1)
        return values[0];
    Scalar acc(0);
    for (Index i = 0; i + 1 < n; ++i)
        acc += Scalar(0.5) * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
    return acc;
}

template <class Scalar>
void check_strictly_increasing(const ArrayX<Scalar>& g, const char* who)
{
    for (Index i = 0; i + 1 < g.size(); ++i)
        if (!(g[i] < g[i + 1]))
            throw InvalidInput(std::string(who) + ": grid not strictly increasing at index " +
                               std::to_string(i));
}

} // namespace detail

/// A nonnegative function sampled on a strictly increasing state grid.
///
/// kind == Probability: trapezoid mass within 1e-6 of one.
/// kind == Spd: mass lies in (0, 1]; the mass is the discount factor the
/// density embeds (price of the zero-coupon bond).
template <class Scalar>
struct GridDensityT {
    ArrayX<Scalar> grid;
    ArrayX<Scalar> values;
    DensityKind kind = DensityKind::Probability;

    GridDensityT() = default;

    GridDensityT(ArrayX<Scalar> g, ArrayX<Scalar> v, DensityKind k)
        : grid(std::move(g)), values(std::move(v)), kind(k)
    {
        if (grid.size() == 0)
            throw InvalidInput("GridDensity: empty grid");
        if (grid.size() != values.size())
            throw InvalidInput("GridDensity: grid/value length mismatch");
        detail::check_strictly_increasing(grid, "GridDensity");
        for (Index i = 0; i < values.size(); ++i)
            if (!(values[i] >= Scalar(0)) || !std::isfinite(values[i]))
                throw InvalidInput("GridDensity: negative or non-finite value at index " +
                                   std::to_string(i));
        const Scalar m = detail::trapezoid(grid, values);
        if (kind == DensityKind::Probability) {
            if (std::abs(m - Scalar(1)) > Scalar(1e-6))
                throw InvalidInput("GridDensity: probability mass " + std::to_string(double(m)) +
                                   " not within 1e-6 of one");
        } else {
            if (!(m > Scalar(0)) || m > Scalar(1) + Scalar(1e-9))
                throw InvalidInput("GridDensity: SPD mass " + std::to_string(double(m)) +
                                   " outside (0, 1]");
        }
    }
};

using GridDensity = GridDensityT<double>;

template <class Scalar>
Scalar mass(const GridDensityT<Scalar>& d)
{
    return detail::trapezoid(d.grid, d.values);
}

/// Density value at x by linear interpolation. Hard error outside the grid.
template <class Scalar>
Scalar interpolate(const GridDensityT<Scalar>& d, Scalar x)
{
    const auto& g = d.grid;
    const Index n = g.size();
    if (x < g[0] || x > g[n - 1])
        throw RangeError("GridDensity: state " + std::to_string(double(x)) +
                         " outside grid [" + std::to_string(double(g[0])) + ", " +
                         std::to_string(double(g[n - 1])) + "]");
    const Scalar* lo = std::upper_bound(g.data(), g.data() + n, x);
    Index i = std::max<Index>(Index(lo - g.data()) - 1, 0);
    if (i + 1 >= n)
        i = n - 2;
    const Scalar t = (x - g[i]) / (g[i + 1] - g[i]);
    return d.values[i] + t * (d.values[i + 1] - d.values[i]);
}

namespace detail {

/// Cumulative trapezoid mass at each grid node.
template <class Scalar>
ArrayX<Scalar> node_cdf(const GridDensityT<Scalar>& d)
{
    const Index n = d.grid.size();
    ArrayX<Scalar> F(n);
    F[0] = Scalar(0);
    for (Index i = 1; i < n; ++i)
        F[i] = F[i - 1] +
               Scalar(0.5) * (d.values[i] + d.values[i - 1]) * (d.grid[i] - d.grid[i - 1]);
    return F;
}

} // namespace detail

/// Cumulative mass below x: the exact integral of the piecewise-linear
/// density. Returns 0 below the grid and mass(d) above it.
template <class Scalar>
Scalar cdf(const GridDensityT<Scalar>& d, Scalar x)
{
    const auto& g = d.grid;
    const Index n = g.size();
    if (x <= g[0])
        return Scalar(0);
    const ArrayX<Scalar> F = detail::node_cdf(d);
    if (x >= g[n - 1])
        return F[n - 1];
    const Scalar* lo = std::upper_bound(g.data(), g.data() + n, x);
    const Index i = Index(lo - g.data()) - 1;
    const Scalar t = (x - g[i]) / (g[i + 1] - g[i]);
    const Scalar vx = d.values[i] + t * (d.values[i + 1] - d.values[i]);
    return F[i] + Scalar(0.5) * (d.values[i] + vx) * (x - g[i]);
}

/// Inverse CDF at mass fraction p in (0, 1). Quantiles are taken in the
/// normalized density d / mass(d); inversion is linear between node CDF
/// values, ties resolved to the leftmost grid point attaining the level.
template <class Scalar>
Scalar quantile(const GridDensityT<Scalar>& d, Scalar p)
{
    if (!(p > Scalar(0) && p < Scalar(1)))
        throw RangeError("quantile: mass fraction must lie strictly in (0, 1)");
    const ArrayX<Scalar> F = detail::node_cdf(d);
    const Index n = F.size();
    const Scalar level = p * F[n - 1];
    const Scalar* it = std::lower_bound(F.data(), F.data() + n, level);
    if (it == F.data() + n)
        return d.grid[n - 1];
    Index j = Index(it - F.data());
    if (F[j] == level)
        return d.grid[j];
    // lower_bound guarantees j >= 1 here because F[0] = 0 < level.
    const Scalar t = (level - F[j - 1]) / (F[j] - F[j - 1]);
    return d.grid[j - 1] + t * (d.grid[j] - d.grid[j - 1]);
}

/// Interquartile range of the normalized density.
template <class Scalar>
Scalar iqr(const GridDensityT<Scalar>& d)
{
    return quantile(d, Scalar(0.75)) - quantile(d, Scalar(0.25));
}

/// Rescale to unit mass (Probability kind).
template <class Scalar>
GridDensityT<Scalar> normalized(const GridDensityT<Scalar>& d)
{
    const Scalar m = mass(d);
    if (!(m > Scalar(0)))
        throw InvalidInput("normalized: zero-mass density");
    return GridDensityT<Scalar>(d.grid, d.values / m, DensityKind::Probability);
}

template <class Scalar>
struct MomentSummaryT {
    Scalar mean;
    Scalar median;
    Scalar std;
    Scalar skew;
    Scalar kurtosis; // raw: a normal density yields 3
};

using MomentSummary = MomentSummaryT<double>;

/// Moments of the normalized density. Kurtosis is reported raw (normal = 3).
template <class Scalar>
MomentSummaryT<Scalar> moments(const GridDensityT<Scalar>& d)
{
    const Scalar m = mass(d);
    if (!(m > Scalar(0)))
        throw InvalidInput("moments: zero-mass density");
    if (d.grid.size() < 2)
        throw InvalidInput("moments: need at least 2 grid points");
    const ArrayX<Scalar> f = d.values / m;
    MomentSummaryT<Scalar> out;
    out.mean = detail::trapezoid<Scalar>(d.grid, (d.grid * f).eval());
    const ArrayX<Scalar> c = d.grid - out.mean;
    const Scalar var = detail::trapezoid<Scalar>(d.grid, (c.square() * f).eval());
    if (!(var > Scalar(0)))
        throw InvalidInput("moments: degenerate density (zero variance)");
    out.std = std::sqrt(var);
    out.skew = detail::trapezoid<Scalar>(d.grid, (c.cube() * f).eval()) / (out.std * out.std * out.std);
    out.kurtosis = detail::trapezoid<Scalar>(d.grid, (c.square().square() * f).eval()) / (var * var);
    out.median = quantile(d, Scalar(0.5));
    return out;
}

} // namespace ipd
