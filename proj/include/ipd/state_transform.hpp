#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ipd/errors.hpp"
#include "ipd/types.hpp"

namespace ipd {

/// Monotone state-space map K between asset states x and benchmark states
/// y = K(x), stored as paired strictly increasing grids. Evaluation is
/// piecewise linear with linear extrapolation beyond the ends; the payoff
/// direction f = K^{-1} swaps the roles of the grids.
template <class Scalar>
struct StateTransformT {
    ArrayX<Scalar> x;
    ArrayX<Scalar> y;

    StateTransformT() = default;

    StateTransformT(ArrayX<Scalar> xs, ArrayX<Scalar> ys)
        : x(std::move(xs)), y(std::move(ys))
    {
        if (x.size() != y.size())
            throw InvalidInput("StateTransform: grid length mismatch");
        if (x.size() < 2)
            throw InvalidInput("StateTransform: need at least 2 nodes");
        for (Index i = 0; i + 1 < x.size(); ++i) {
            if (!(x[i] < x[i + 1]))
                throw InvalidInput("StateTransform: x grid not strictly increasing at index " +
                                   std::to_string(i));
            if (!(y[i] < y[i + 1]))
                throw InvalidInput("StateTransform: y grid not strictly increasing at index " +
                                   std::to_string(i));
        }
    }

    Index size() const { return x.size(); }

private:
    static Scalar eval(const ArrayX<Scalar>& a, const ArrayX<Scalar>& b, Scalar v)
    {
        const Index n = a.size();
        const Scalar* lo = std::upper_bound(a.data(), a.data() + n, v);
        Index i = std::clamp<Index>(Index(lo - a.data()) - 1, 0, n - 2);
        const Scalar t = (v - a[i]) / (a[i + 1] - a[i]);
        return b[i] + t * (b[i + 1] - b[i]);
    }

    static Scalar eval_slope(const ArrayX<Scalar>& a, const ArrayX<Scalar>& b, Scalar v)
    {
        const Index n = a.size();
        const Scalar* lo = std::upper_bound(a.data(), a.data() + n, v);
        Index i = std::clamp<Index>(Index(lo - a.data()) - 1, 0, n - 2);
        return (b[i + 1] - b[i]) / (a[i + 1] - a[i]);
    }

public:
    Scalar operator()(Scalar xv) const { return eval(x, y, xv); }
    Scalar inverse(Scalar yv) const { return eval(y, x, yv); }

    /// Local slope dy/dx of the containing segment (piecewise constant).
    Scalar slope(Scalar xv) const { return eval_slope(x, y, xv); }

    /// Central-difference derivative at node i (one-sided at the ends).
    Scalar node_derivative(Index i) const
    {
        const Index n = x.size();
        if (i <= 0)
            return (y[1] - y[0]) / (x[1] - x[0]);
        if (i >= n - 1)
            return (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        return (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    }
};

using StateTransform = StateTransformT<double>;

} // namespace ipd
