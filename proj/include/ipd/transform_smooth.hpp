#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ipd/bsm.hpp"
#include "ipd/grid_density.hpp"
#include "ipd/state_transform.hpp"

namespace ipd {

/// Gaussian convolution kernel phi_eps(x) = exp(-x^2/eps) / sqrt(pi eps),
/// unit mass, standard deviation sqrt(eps/2). Truncation is the kernel
/// support half-width in standard deviations.
template <class Scalar>
struct SmoothingConfigT {
    Scalar epsilon = Scalar(5e-4); // log-state^2 units
    Scalar truncation = Scalar(8);
    Index resample_points = 4001;

    void validate() const
    {
        if (!(epsilon > Scalar(0)))
            throw InvalidInput("SmoothingConfig: epsilon must be positive");
        if (!(truncation >= Scalar(4)))
            throw InvalidInput("SmoothingConfig: truncation must be at least 4 std");
        if (resample_points < 16)
            throw InvalidInput("SmoothingConfig: resample_points must be at least 16");
    }
};

using SmoothingConfig = SmoothingConfigT<double>;

/// Fit the unique scaled lognormal whose median and IQR match those of the
/// normalized input SPD; the discount is the input's mass. Median m and
/// quartile spread fix the parameters in closed form:
/// log_scale = asinh(IQR / (2 median)) / z_{0.75}, log_loc = ln median.
template <class Scalar>
LognormalSpdT<Scalar> fit_benchmark_lognormal(const GridDensityT<Scalar>& spd)
{
    if (spd.grid.size() < 2)
        throw CalibrationError("fit_benchmark_lognormal: need at least 2 grid points");
    if (!(spd.grid[0] > Scalar(0)))
        throw CalibrationError("fit_benchmark_lognormal: states must be positive");
    const Scalar D = mass(spd);
    if (!(D > Scalar(0)))
        throw CalibrationError("fit_benchmark_lognormal: zero-mass input");
    const Scalar med = quantile(spd, Scalar(0.5));
    const Scalar spread = iqr(spd);
    if (!(spread > Scalar(0)) || !(med > Scalar(0)))
        throw CalibrationError("fit_benchmark_lognormal: degenerate quantiles");
    const Scalar s = std::asinh(spread / (Scalar(2) * med)) / Scalar(kZ75);
    if (!(s > Scalar(1e-8)))
        throw CalibrationError("fit_benchmark_lognormal: near-point-mass input");
    return {std::log(med), s, D};
}

/// Measure-preserving transform onto the benchmark: y = K(x) solves
/// int_0^x q = int_0^{K(x)} D psi for every retained grid node. Nodes whose
/// cumulative mass fraction is exactly 0 or 1 have no finite benchmark image
/// and are dropped; flat (zero-density) runs collapse to their leftmost node
/// so the output is strictly increasing.
template <class Scalar>
StateTransformT<Scalar> build_transform(const GridDensityT<Scalar>& spd,
                                        const LognormalSpdT<Scalar>& benchmark)
{
    const Scalar m = mass(spd);
    if (std::abs(m - benchmark.discount) > Scalar(1e-6))
        throw InvalidInput("build_transform: SPD mass " + std::to_string(double(m)) +
                           " does not match the benchmark discount " +
                           std::to_string(double(benchmark.discount)));

    const ArrayX<Scalar> F = detail::node_cdf(spd);
    std::vector<Scalar> xs, ys;
    xs.reserve(size_t(F.size()));
    ys.reserve(size_t(F.size()));
    Scalar last_y = -std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < F.size(); ++i) {
        const Scalar p = F[i] / m;
        if (!(p > Scalar(0)) || !(p < Scalar(1)))
            continue;
        const Scalar y = benchmark.rn_quantile(p);
        if (!(y > last_y))
            continue; // flat segment: keep the leftmost node of the run
        xs.push_back(spd.grid[i]);
        ys.push_back(y);
        last_y = y;
    }
    if (xs.size() < 2)
        throw InvalidInput("build_transform: fewer than 2 usable nodes (mass too "
                           "concentrated)");
    ArrayX<Scalar> ax(Index(xs.size())), ay(Index(ys.size()));
    for (size_t i = 0; i < xs.size(); ++i) {
        ax[Index(i)] = xs[i];
        ay[Index(i)] = ys[i];
    }
    return {std::move(ax), std::move(ay)};
}

/// Convolution smoothing of the transform in log-scale:
/// K~(x) = [phi_eps * K(exp(.))](ln x), evaluated on a log-uniform resample
/// grid spanning the input domain. K(exp(.)) is extended linearly in
/// log-space beyond its domain before convolving.
template <class Scalar>
StateTransformT<Scalar> smooth_transform(const StateTransformT<Scalar>& t,
                                         const SmoothingConfigT<Scalar>& cfg)
{
    cfg.validate();
    if (!(t.x[0] > Scalar(0)))
        throw InvalidInput("smooth_transform: transform domain must be positive for "
                           "log-scale smoothing");
    const Scalar u_min = std::log(t.x[0]);
    const Scalar u_max = std::log(t.x[t.size() - 1]);
    const Scalar std_dev = std::sqrt(cfg.epsilon / Scalar(2));
    const Scalar half_width = cfg.truncation * std_dev;
    if (Scalar(2) * half_width >= u_max - u_min)
        throw InvalidInput("smooth_transform: kernel support wider than the log-domain; "
                           "shrink epsilon or widen the transform");

    // g(u) = K(exp(u)) with linear log-space extension; end slopes come from
    // the transform's end segments via dK/du = K'(x) x.
    const Scalar slope_lo = t.slope(t.x[0]) * t.x[0];
    const Scalar slope_hi = t.slope(t.x[t.size() - 1]) * t.x[t.size() - 1];
    const Scalar g_lo = t.y[0];
    const Scalar g_hi = t.y[t.size() - 1];
    auto g = [&](Scalar u) -> Scalar {
        if (u < u_min)
            return g_lo + slope_lo * (u - u_min);
        if (u > u_max)
            return g_hi + slope_hi * (u - u_max);
        return t(std::exp(u));
    };

    // Discrete convolution on the resample lattice: kernel offsets are whole
    // lattice steps, so the quadrature error varies smoothly across output
    // nodes instead of jittering them (jitter would leak into the derivative
    // and hence into the regenerated density).
    const Index n = cfg.resample_points;
    const Scalar du = (u_max - u_min) / Scalar(n - 1);
    const Index reach = std::max<Index>(1, Index(std::ceil(double(half_width / du))));
    ArrayX<Scalar> kw(2 * reach + 1);
    for (Index k = -reach; k <= reach; ++k) {
        const Scalar v = Scalar(k) * du;
        kw[k + reach] = std::exp(-v * v / cfg.epsilon);
    }
    kw /= kw.sum();

    ArrayX<Scalar> lattice(n + 2 * reach);
    for (Index t = 0; t < lattice.size(); ++t)
        lattice[t] = g(u_min + Scalar(t - reach) * du);

    ArrayX<Scalar> xs(n), ys(n);
    for (Index j = 0; j < n; ++j) {
        Scalar acc(0);
        for (Index k = 0; k < kw.size(); ++k)
            acc += kw[k] * lattice[j + k];
        xs[j] = std::exp(u_min + Scalar(j) * du);
        ys[j] = acc;
    }
    return {std::move(xs), std::move(ys)};
}

/// Regenerate a smooth SPD from the transform and the benchmark:
/// q~(s) = K~'(s) D psi(K~(s)). Strictly positive on the interior and mass
/// preserving up to the benchmark tail mass outside the transform range.
template <class Scalar>
GridDensityT<Scalar> transform_to_spd(const StateTransformT<Scalar>& t,
                                      const LognormalSpdT<Scalar>& benchmark)
{
    const Index n = t.size();
    ArrayX<Scalar> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = t.node_derivative(i) * benchmark.density(t.y[i]);
    return {t.x, std::move(v), DensityKind::Spd};
}

template <class Scalar>
struct SmoothResultT {
    LognormalSpdT<Scalar> benchmark;
    StateTransformT<Scalar> raw_transform;
    StateTransformT<Scalar> transform; // smoothed
    GridDensityT<Scalar> spd;
};

using SmoothResult = SmoothResultT<double>;

/// The full smoothing scheme: fit the lognormal benchmark, build the
/// measure-preserving transform, convolution-smooth it in log-scale, and
/// regenerate the SPD.
template <class Scalar>
SmoothResultT<Scalar> smooth_spd(const GridDensityT<Scalar>& spd,
                                 const SmoothingConfigT<Scalar>& cfg)
{
    SmoothResultT<Scalar> out;
    out.benchmark = fit_benchmark_lognormal(spd);
    out.raw_transform = build_transform(spd, out.benchmark);
    out.transform = smooth_transform(out.raw_transform, cfg);
    out.spd = transform_to_spd(out.transform, out.benchmark);
    return out;
}

/// Count local maxima whose prominence exceeds ripple_rel of the global peak.
template <class Scalar>
int count_significant_modes(const GridDensityT<Scalar>& d, Scalar ripple_rel = Scalar(1e-4))
{
    const Index n = d.values.size();
    const Scalar peak = d.values.maxCoeff();
    const Scalar tol = ripple_rel * peak;
    int modes = 0;
    // Scan maxima; a candidate counts when the dips separating it from
    // higher ground on both sides exceed the ripple tolerance.
    for (Index i = 0; i < n; ++i) {
        const bool left_ok = (i == 0) || d.values[i] >= d.values[i - 1];
        const bool right_ok = (i + 1 == n) || d.values[i] > d.values[i + 1];
        if (!(left_ok && right_ok))
            continue;
        Scalar fall_left = std::numeric_limits<Scalar>::max();
        Scalar valley = d.values[i];
        for (Index j = i; j-- > 0;) {
            valley = std::min(valley, d.values[j]);
            if (d.values[j] > d.values[i]) {
                fall_left = d.values[i] - valley;
                break;
            }
        }
        Scalar fall_right = std::numeric_limits<Scalar>::max();
        valley = d.values[i];
        for (Index j = i + 1; j < n; ++j) {
            valley = std::min(valley, d.values[j]);
            if (d.values[j] > d.values[i]) {
                fall_right = d.values[i] - valley;
                break;
            }
        }
        if (std::min(fall_left, fall_right) > tol)
            ++modes;
    }
    return modes;
}

/// Smallest epsilon on a dyadic ladder in [lo, hi] whose smoothed SPD is
/// essentially unimodal (at most one mode after ignoring ripples below
/// ripple_rel of the peak).
template <class Scalar>
Scalar auto_epsilon(const GridDensityT<Scalar>& spd, SmoothingConfigT<Scalar> cfg,
                    Scalar lo = Scalar(1e-5), Scalar hi = Scalar(2e-2),
                    Scalar ripple_rel = Scalar(1e-4))
{
    const LognormalSpdT<Scalar> benchmark = fit_benchmark_lognormal(spd);
    const StateTransformT<Scalar> raw = build_transform(spd, benchmark);
    for (Scalar eps = lo; eps <= hi; eps *= Scalar(2)) {
        cfg.epsilon = eps;
        const auto smooth = smooth_transform(raw, cfg);
        const auto q = transform_to_spd(smooth, benchmark);
        if (count_significant_modes(q, ripple_rel) <= 1)
            return eps;
    }
    throw CalibrationError("auto_epsilon: no epsilon in the ladder yields an essentially "
                           "unimodal density");
}

} // namespace ipd
