#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ipd/bsm.hpp"
#include "ipd/errors.hpp"
#include "ipd/types.hpp"

namespace ipd {

/// European call quotes for one maturity on a uniform, strictly increasing
/// strike grid. Prices are taken as supplied (bid or mid); no bid/ask
/// adjustment happens here.
template <class Scalar>
struct OptionChainT {
    Scalar spot = 0;
    Scalar expiry = 0; // year fraction T - t
    ArrayX<Scalar> strikes;
    ArrayX<Scalar> calls;
    Scalar strike_step = 0; // 0 for single-strike chains

    static OptionChainT make(Scalar spot, Scalar expiry, ArrayX<Scalar> strikes,
                             ArrayX<Scalar> calls)
    {
        OptionChainT c;
        c.spot = spot;
        c.expiry = expiry;
        c.strikes = std::move(strikes);
        c.calls = std::move(calls);

        if (!(c.spot > Scalar(0)))
            throw InvalidInput("OptionChain: spot must be positive");
        if (!(c.expiry > Scalar(0)))
            throw InvalidInput("OptionChain: expiry must be positive");
        if (c.strikes.size() == 0)
            throw InvalidInput("OptionChain: empty chain");
        if (c.strikes.size() != c.calls.size())
            throw InvalidInput("OptionChain: strike/call length mismatch");
        for (Index i = 0; i < c.calls.size(); ++i)
            if (!(c.calls[i] >= Scalar(0)) || !std::isfinite(c.calls[i]))
                throw InvalidInput("OptionChain: negative or non-finite call price at index " +
                                   std::to_string(i));
        if (c.strikes.size() >= 2) {
            const Scalar dk = c.strikes[1] - c.strikes[0];
            if (!(dk > Scalar(0)))
                throw InvalidInput("OptionChain: strikes not strictly increasing");
            for (Index i = 0; i + 1 < c.strikes.size(); ++i) {
                const Scalar gap = c.strikes[i + 1] - c.strikes[i];
                if (std::abs(gap - dk) >= Scalar(1e-9) * dk)
                    throw InvalidInput(
                        "OptionChain: non-uniform strike grid between indices " +
                        std::to_string(i) + " and " + std::to_string(i + 1));
            }
            c.strike_step = dk;
        }
        return c;
    }

    Index size() const { return strikes.size(); }
};

using OptionChain = OptionChainT<double>;

/// Index lists flagging quote patterns that would put negative values into a
/// second-difference SPD estimate (in principle, arbitrage opportunities).
struct ChainDiagnostics {
    std::vector<Index> monotonicity_violations; // C(K_{i+1}) > C(K_i)
    std::vector<Index> convexity_violations;    // C(K_i) - 2 C(K_{i+1}) + C(K_{i+2}) < 0

    bool clean() const
    {
        return monotonicity_violations.empty() && convexity_violations.empty();
    }
};

template <class Scalar>
ChainDiagnostics validate_chain(const OptionChainT<Scalar>& chain)
{
    ChainDiagnostics d;
    const auto& c = chain.calls;
    // A violation has to exceed the rounding noise of the price differences,
    // otherwise exact convex chains get flagged in the deep wings where the
    // true second difference underflows the price roundoff.
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    for (Index i = 0; i + 1 < c.size(); ++i) {
        const Scalar tol = Scalar(16) * eps * std::max(Scalar(1), std::max(c[i], c[i + 1]));
        if (c[i + 1] > c[i] + tol)
            d.monotonicity_violations.push_back(i);
    }
    for (Index i = 0; i + 2 < c.size(); ++i) {
        const Scalar tol =
            Scalar(16) * eps *
            std::max(Scalar(1), std::max(c[i], std::max(c[i + 1], c[i + 2])));
        if (c[i] - Scalar(2) * c[i + 1] + c[i + 2] < -tol)
            d.convexity_violations.push_back(i);
    }
    return d;
}

namespace detail {

inline std::string trim(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t'))
        ++b;
    return s.substr(b);
}

inline double parse_number(const std::string& field, int line_no, const char* what)
{
    const std::string f = trim(field);
    double v = 0;
    const char* first = f.data();
    const char* last = f.data() + f.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError(std::string("parse_chain: malformed ") + what + " on line " +
                         std::to_string(line_no) + ": '" + field + "'");
    return v;
}

/// Round-trippable decimal formatting (17 significant digits).
inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Parse the chain CSV (header `strike,call`, one row per strike). Rows are
/// sorted by strike before validation; spot and expiry arrive out of band
/// (CLI flags or JSON sidecar).
template <class Scalar>
OptionChainT<Scalar> parse_chain(std::istream& in, Scalar spot, Scalar expiry)
{
    std::string line;
    if (!std::getline(in, line))
        throw InvalidInput("parse_chain: empty input");
    if (detail::trim(line) != "strike,call")
        throw ParseError("parse_chain: expected header 'strike,call' on line 1");

    std::vector<std::pair<double, double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty())
            continue;
        const size_t comma = t.find(',');
        if (comma == std::string::npos)
            throw ParseError("parse_chain: missing comma on line " + std::to_string(line_no));
        const double k = detail::parse_number(t.substr(0, comma), line_no, "strike");
        const double c = detail::parse_number(t.substr(comma + 1), line_no, "call");
        rows.emplace_back(k, c);
    }
    if (rows.empty())
        throw InvalidInput("parse_chain: no data rows (empty chain)");
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ArrayX<Scalar> strikes(Index(rows.size())), calls(Index(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        strikes[Index(i)] = Scalar(rows[i].first);
        calls[Index(i)] = Scalar(rows[i].second);
    }
    return OptionChainT<Scalar>::make(spot, expiry, std::move(strikes), std::move(calls));
}

template <class Scalar>
void serialize_chain(std::ostream& out, const OptionChainT<Scalar>& chain)
{
    out << "strike,call\n";
    for (Index i = 0; i < chain.size(); ++i)
        out << detail::fmt17(double(chain.strikes[i])) << ','
            << detail::fmt17(double(chain.calls[i])) << '\n';
}

/// Closed-form BSM call chain on strikes k_min, k_min + dk, ..., k_max.
template <class Scalar>
OptionChainT<Scalar> make_bsm_chain(const BsmParamsT<Scalar>& p, Scalar k_min, Scalar k_max,
                                    Scalar dk)
{
    if (!(dk > Scalar(0)) || !(k_max > k_min))
        throw InvalidInput("make_bsm_chain: need k_max > k_min and dk > 0");
    const Index n = Index(std::floor(double((k_max - k_min) / dk) + 0.5)) + 1;
    ArrayX<Scalar> strikes(n), calls(n);
    for (Index i = 0; i < n; ++i) {
        strikes[i] = k_min + Scalar(i) * dk;
        calls[i] = bsm_call(p.spot, strikes[i], p.rate, p.sigma, p.expiry);
    }
    return OptionChainT<Scalar>::make(p.spot, p.expiry, std::move(strikes), std::move(calls));
}

} // namespace ipd
