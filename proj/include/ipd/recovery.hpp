#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipd/bsm.hpp"
#include "ipd/grid_density.hpp"
#include "ipd/state_transform.hpp"

namespace ipd {

/// Window and stepping for the Euler solution of the transform ODE.
template <class Scalar>
struct RecoveryConfigT {
    Scalar x0 = 0;   // initial state
    Scalar step_h = 0;
    Index steps_n = 20000;
    std::optional<Scalar> mu_override;             // replaces the benchmark trend
    std::optional<Scalar> quantile_normalization;  // target physical probability p*

    void validate() const
    {
        if (!(x0 > Scalar(0)))
            throw InvalidInput("RecoveryConfig: x0 must be positive");
        if (!(step_h > Scalar(0)))
            throw InvalidInput("RecoveryConfig: step_h must be positive");
        if (steps_n < 1)
            throw InvalidInput("RecoveryConfig: steps_n must be at least 1");
    }
};

using RecoveryConfig = RecoveryConfigT<double>;

/// Default window: x0 where the normalized cumulative mass reaches 0.5%
/// (deep-left start, the wings carry the worst quote quality), stepping to
/// the top of the grid in steps_n Euler steps.
template <class Scalar>
RecoveryConfigT<Scalar> default_recovery_config(const GridDensityT<Scalar>& q1,
                                                Index steps_n = 20000)
{
    RecoveryConfigT<Scalar> cfg;
    cfg.x0 = quantile(q1, Scalar(0.005));
    cfg.steps_n = steps_n;
    cfg.step_h = (q1.grid[q1.grid.size() - 1] - cfg.x0) / Scalar(steps_n);
    return cfg;
}

/// Quantile-matched initial value: y0 with
/// Q2(S2(T) <= y0) = Q1(S1(T) <= x0), Q1 read off the normalized grid SPD
/// and Q2 inverted analytically in the benchmark lognormal.
template <class Scalar>
Scalar matched_quantile_init(const GridDensityT<Scalar>& q1, const BsmParamsT<Scalar>& benchmark,
                             Scalar x0)
{
    const Index n = q1.grid.size();
    if (!(x0 > q1.grid[0]) || !(x0 < q1.grid[n - 1]))
        throw RangeError("matched_quantile_init: x0 outside the open grid support");
    const Scalar p = cdf(q1, x0) / mass(q1);
    if (!(p > Scalar(0)) || !(p < Scalar(1)))
        throw RangeError("matched_quantile_init: cumulative mass at x0 not strictly inside "
                         "(0, 1)");
    return bsm_rn_quantile(benchmark, p);
}

namespace detail {

// Both sides of the transform speed are probability densities: the grid SPD
// normalized by its mass against the benchmark risk-neutral density. Using
// raw state-price mass on one side only would desynchronize the transported
// mass and push K off its quantile track (the degenerate K' asymptotics the
// Euler frame warns about).
template <class Scalar>
struct EulerWindow {
    Scalar mass_q1;
    Scalar grid_lo, grid_hi;

    EulerWindow(const GridDensityT<Scalar>& q1, const RecoveryConfigT<Scalar>& cfg)
    {
        cfg.validate();
        mass_q1 = mass(q1);
        grid_lo = q1.grid[0];
        grid_hi = q1.grid[q1.grid.size() - 1];
        const Scalar top = cfg.x0 + Scalar(cfg.steps_n) * cfg.step_h;
        const Scalar slack = Scalar(1e-9) * (grid_hi - grid_lo);
        if (cfg.x0 < grid_lo - slack || top > grid_hi + slack)
            throw RangeError("euler_transform: window [" + std::to_string(double(cfg.x0)) +
                             ", " + std::to_string(double(top)) +
                             "] leaves the q1 grid [" + std::to_string(double(grid_lo)) +
                             ", " + std::to_string(double(grid_hi)) + "]");
    }

    Scalar clamp(Scalar x) const { return std::min(std::max(x, grid_lo), grid_hi); }
};

} // namespace detail

/// Solve the transform ODE K'(x) = q1(x) / q2(K(x)) by explicit Euler from
/// K(x0) = y0, both densities probability-normalized. Returns K on the Euler
/// grid x0, x0 + h, ..., x0 + N h; strictly increasing whenever q1 > 0 on
/// the window.
template <class Scalar>
StateTransformT<Scalar> euler_transform(const GridDensityT<Scalar>& q1,
                                        const BsmParamsT<Scalar>& benchmark,
                                        const RecoveryConfigT<Scalar>& cfg, Scalar y0)
{
    const detail::EulerWindow<Scalar> win(q1, cfg);
    if (!(y0 > Scalar(0)) || !std::isfinite(y0))
        throw InvalidInput("euler_transform: y0 must be positive and finite");

    const Index n = cfg.steps_n + 1;
    ArrayX<Scalar> xs(n), ys(n);
    Scalar x = cfg.x0, y = y0;
    for (Index i = 0; i < n; ++i) {
        xs[i] = x;
        ys[i] = y;
        if (i + 1 == n)
            break;
        const Scalar q1n = interpolate(q1, win.clamp(x)) / win.mass_q1;
        if (!(q1n > Scalar(0)))
            throw InvalidInput("euler_transform: q1 not strictly positive at x = " +
                               std::to_string(double(x)) + " (step " + std::to_string(i) +
                               ")");
        if (!(y > Scalar(0)) || !std::isfinite(y))
            throw SolverError("euler_transform: transform diverged at step " +
                              std::to_string(i));
        const Scalar q2n = bsm_rn_density(benchmark, y);
        if (!(q2n > Scalar(1e-300)))
            throw SolverError("euler_transform: benchmark density underflow at step " +
                              std::to_string(i) + " (y = " + std::to_string(double(y)) +
                              " escaped the benchmark support)");
        x += cfg.step_h;
        y += (q1n / q2n) * cfg.step_h;
    }
    return {std::move(xs), std::move(ys)};
}

/// Physical-over-risk-neutral density ratio of the benchmark at state y,
/// as a lognormal pdf ratio.
template <class Scalar>
Scalar recovery_tilt(const BsmParamsT<Scalar>& p, Scalar y)
{
    return bsm_physical_density(p, y) / bsm_rn_density(p, y);
}

/// The same ratio in the explicit BSM form
/// exp(-Delta / (2 sigma^2 T)),
/// Delta = (ln(y/S) - (mu - sigma^2/2) T)^2 - (ln(y/S) - (r - sigma^2/2) T)^2.
/// Agrees with recovery_tilt to roundoff; kept as an independent code path.
template <class Scalar>
Scalar recovery_tilt_explicit(const BsmParamsT<Scalar>& p, Scalar y)
{
    const Scalar T = p.expiry;
    const Scalar lk = std::log(y / p.spot);
    const Scalar a = lk - (p.trend - Scalar(0.5) * p.sigma * p.sigma) * T;
    const Scalar b = lk - (p.rate - Scalar(0.5) * p.sigma * p.sigma) * T;
    const Scalar delta = a * a - b * b;
    return std::exp(-delta / (Scalar(2) * p.sigma * p.sigma * T));
}

template <class Scalar>
struct RecoveryResultT {
    StateTransformT<Scalar> transform;
    GridDensityT<Scalar> density; // unit mass over the computed window
    ArrayX<Scalar> raw;           // unnormalized pointwise values
    Scalar y0 = 0;
};

using RecoveryResult = RecoveryResultT<double>;

/// Reverse distribution matching from an explicit initial value: evaluate
/// the implied physical density pointwise on the Euler grid,
/// phi(x_i) = q1n(x_i) * phi2(y_i) / q2n(y_i), and renormalize over the
/// window (the recovery never sees mass below x0).
template <class Scalar>
RecoveryResultT<Scalar> recover_ipd_with_init(const GridDensityT<Scalar>& q1,
                                              const BsmParamsT<Scalar>& benchmark,
                                              const RecoveryConfigT<Scalar>& cfg, Scalar y0)
{
    const BsmParamsT<Scalar> eff =
        cfg.mu_override ? benchmark.with_trend(*cfg.mu_override) : benchmark;
    RecoveryResultT<Scalar> out;
    out.y0 = y0;
    out.transform = euler_transform(q1, eff, cfg, y0);

    const detail::EulerWindow<Scalar> win(q1, cfg);
    const Index n = out.transform.size();
    out.raw.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Scalar q1n = interpolate(q1, win.clamp(out.transform.x[i])) / win.mass_q1;
        out.raw[i] = q1n * recovery_tilt(eff, out.transform.y[i]);
    }
    const Scalar m = detail::trapezoid(out.transform.x, out.raw);
    if (!(m > Scalar(0)))
        throw SolverError("recover_ipd: recovered density has nonpositive mass");
    out.density = GridDensityT<Scalar>(out.transform.x, out.raw / m, DensityKind::Probability);
    return out;
}

/// Reverse distribution matching with the quantile-matched initial value.
template <class Scalar>
RecoveryResultT<Scalar> recover_ipd(const GridDensityT<Scalar>& q1,
                                    const BsmParamsT<Scalar>& benchmark,
                                    const RecoveryConfigT<Scalar>& cfg)
{
    const BsmParamsT<Scalar> eff =
        cfg.mu_override ? benchmark.with_trend(*cfg.mu_override) : benchmark;
    const Scalar y0 = matched_quantile_init(q1, eff, cfg.x0);
    return recover_ipd_with_init(q1, benchmark, cfg, y0);
}

template <class Scalar>
struct DmForwardResultT {
    StateTransformT<Scalar> transform;
    GridDensityT<Scalar> spd;
    Scalar price = 0; // Pi(0), the distribution-matching value of the asset
};

using DmForwardResult = DmForwardResultT<double>;

/// Forward distribution matching: transport the physical density phi1 onto
/// the benchmark through the physical-measure-preserving K, produce the SPD
/// candidate q(x) = K'(x) q2(K(x)) and the price Pi(0) = int s q(s) ds over
/// the window. (x0, y0) must be quantile-matched in the physical measures.
template <class Scalar>
DmForwardResultT<Scalar> dm_forward(const GridDensityT<Scalar>& phi1,
                                    const BsmParamsT<Scalar>& benchmark, Scalar x0, Scalar y0,
                                    Scalar step_h, Index steps_n)
{
    RecoveryConfigT<Scalar> cfg;
    cfg.x0 = x0;
    cfg.step_h = step_h;
    cfg.steps_n = steps_n;
    const detail::EulerWindow<Scalar> win(phi1, cfg);
    if (!(y0 > Scalar(0)) || !std::isfinite(y0))
        throw InvalidInput("dm_forward: y0 must be positive and finite");

    const Index n = steps_n + 1;
    ArrayX<Scalar> xs(n), ys(n), spd_vals(n);
    Scalar x = x0, y = y0;
    for (Index i = 0; i < n; ++i) {
        xs[i] = x;
        ys[i] = y;
        const Scalar p1 = interpolate(phi1, win.clamp(x)) / win.mass_q1;
        const Scalar p2 = bsm_physical_density(benchmark, y);
        if (!(p2 > Scalar(1e-300)))
            throw SolverError("dm_forward: benchmark physical density underflow at step " +
                              std::to_string(i));
        const Scalar speed = p1 / p2;
        spd_vals[i] = speed * bsm_spd(benchmark, y);
        if (i + 1 == n)
            break;
        if (!(p1 > Scalar(0)))
            throw InvalidInput("dm_forward: phi1 not strictly positive at x = " +
                               std::to_string(double(x)));
        x += step_h;
        y += speed * step_h;
    }

    DmForwardResultT<Scalar> out;
    out.transform = StateTransformT<Scalar>(xs, ys);
    out.price = detail::trapezoid<Scalar>(xs, (xs * spd_vals).eval());
    out.spd = GridDensityT<Scalar>(std::move(xs), std::move(spd_vals), DensityKind::Spd);
    return out;
}

template <class Scalar>
struct MuSweepRowT {
    Scalar mu = 0;
    bool ok = false;
    std::string error;
    MomentSummaryT<Scalar> moments{};
};

using MuSweepRow = MuSweepRowT<double>;

/// One independent recovery per trend value; moment rows match the sweep
/// table layout (Mean, Median, STD, Skew, Kurtosis). Per-mu failures are
/// reported in their row without aborting the sweep. An optional sigma array
/// (parallel to mus) co-varies the benchmark volatility, e.g. to hold the
/// market price of risk fixed.
template <class Scalar>
std::vector<MuSweepRowT<Scalar>> mu_sweep(const GridDensityT<Scalar>& q1,
                                          const BsmParamsT<Scalar>& base,
                                          const std::vector<Scalar>& mus,
                                          const RecoveryConfigT<Scalar>& cfg,
                                          const std::vector<Scalar>& sigmas = {})
{
    if (!sigmas.empty() && sigmas.size() != mus.size())
        throw InvalidInput("mu_sweep: sigmas must be empty or parallel to mus");
    std::vector<MuSweepRowT<Scalar>> rows;
    rows.reserve(mus.size());
    for (size_t k = 0; k < mus.size(); ++k) {
        MuSweepRowT<Scalar> row;
        row.mu = mus[k];
        try {
            BsmParamsT<Scalar> params = base.with_trend(mus[k]);
            if (!sigmas.empty())
                params = params.with_sigma(sigmas[k]);
            RecoveryConfigT<Scalar> c = cfg;
            c.mu_override.reset();
            row.moments = moments(recover_ipd(q1, params, c).density);
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Quantile-normalized sweep: for each mu the initial value y0 is the p*
/// quantile of that trend's physical lognormal, so P2(S2(T) < K(x0)) = p*
/// across the whole sweep.
template <class Scalar>
std::vector<std::pair<Scalar, GridDensityT<Scalar>>>
normalize_quantiles(const GridDensityT<Scalar>& q1, const BsmParamsT<Scalar>& base,
                    const std::vector<Scalar>& mus, const RecoveryConfigT<Scalar>& cfg)
{
    if (!cfg.quantile_normalization)
        throw InvalidInput("normalize_quantiles: config carries no target probability p*");
    const Scalar p_star = *cfg.quantile_normalization;
    if (!(p_star > Scalar(0)) || !(p_star < Scalar(1)))
        throw InvalidInput("normalize_quantiles: p* must lie strictly in (0, 1)");

    std::vector<std::pair<Scalar, GridDensityT<Scalar>>> out;
    out.reserve(mus.size());
    for (const Scalar mu : mus) {
        const BsmParamsT<Scalar> params = base.with_trend(mu);
        const Scalar y0 = bsm_physical_quantile(params, p_star);
        RecoveryConfigT<Scalar> c = cfg;
        c.mu_override.reset();
        out.emplace_back(mu, recover_ipd_with_init(q1, params, c, y0).density);
    }
    return out;
}

} // namespace ipd
