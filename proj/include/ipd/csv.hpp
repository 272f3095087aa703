#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipd/grid_density.hpp"
#include "ipd/option_chain.hpp"
#include "ipd/recovery.hpp"
#include "ipd/spd_extract.hpp"
#include "ipd/state_transform.hpp"

namespace ipd {

/// GridDensity CSV: header `state,value`, one row per grid point, values
/// written with 17 significant digits so parse(serialize(x)) is exact.
template <class Scalar>
void write_density_csv(std::ostream& out, const ArrayX<Scalar>& grid,
                       const ArrayX<Scalar>& values)
{
    out << "state,value\n";
    for (Index i = 0; i < grid.size(); ++i)
        out << detail::fmt17(double(grid[i])) << ',' << detail::fmt17(double(values[i]))
            << '\n';
}

template <class Scalar>
void write_density_csv(std::ostream& out, const GridDensityT<Scalar>& d)
{
    write_density_csv(out, d.grid, d.values);
}

template <class Scalar>
void write_density_csv(std::ostream& out, const RawSpdT<Scalar>& d)
{
    write_density_csv(out, d.grid, d.values);
}

namespace detail {

template <class Scalar>
std::pair<ArrayX<Scalar>, ArrayX<Scalar>> read_two_columns(std::istream& in,
                                                           const std::string& header,
                                                           const char* who)
{
    std::string line;
    if (!std::getline(in, line))
        throw InvalidInput(std::string(who) + ": empty input");
    if (trim(line) != header)
        throw ParseError(std::string(who) + ": expected header '" + header + "' on line 1");
    std::vector<double> a, b;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const size_t comma = t.find(',');
        if (comma == std::string::npos)
            throw ParseError(std::string(who) + ": missing comma on line " +
                             std::to_string(line_no));
        a.push_back(parse_number(t.substr(0, comma), line_no, "first column"));
        b.push_back(parse_number(t.substr(comma + 1), line_no, "second column"));
    }
    if (a.empty())
        throw InvalidInput(std::string(who) + ": no data rows");
    ArrayX<Scalar> av(Index(a.size())), bv(Index(b.size()));
    for (size_t i = 0; i < a.size(); ++i) {
        av[Index(i)] = Scalar(a[i]);
        bv[Index(i)] = Scalar(b[i]);
    }
    return {std::move(av), std::move(bv)};
}

} // namespace detail

/// Parse a GridDensity CSV expecting the stated kind; raw (possibly negative)
/// extractor output does not load through this path.
template <class Scalar>
GridDensityT<Scalar> read_density_csv(std::istream& in, DensityKind kind)
{
    auto [grid, values] = detail::read_two_columns<Scalar>(in, "state,value", "read_density_csv");
    return GridDensityT<Scalar>(std::move(grid), std::move(values), kind);
}

/// State-transform CSV: header `x,y`.
template <class Scalar>
void write_transform_csv(std::ostream& out, const StateTransformT<Scalar>& t)
{
    out << "x,y\n";
    for (Index i = 0; i < t.size(); ++i)
        out << detail::fmt17(double(t.x[i])) << ',' << detail::fmt17(double(t.y[i])) << '\n';
}

template <class Scalar>
StateTransformT<Scalar> read_transform_csv(std::istream& in)
{
    auto [x, y] = detail::read_two_columns<Scalar>(in, "x,y", "read_transform_csv");
    return StateTransformT<Scalar>(std::move(x), std::move(y));
}

/// MomentSummary JSON with the state variable labelled explicitly; absolute
/// location is trend-dependent by construction, so outputs say what the
/// states mean.
template <class Scalar>
nlohmann::ordered_json moments_json(const MomentSummaryT<Scalar>& m,
                                    const std::string& state_variable = "price")
{
    nlohmann::ordered_json j;
    j["mean"] = double(m.mean);
    j["median"] = double(m.median);
    j["std"] = double(m.std);
    j["skew"] = double(m.skew);
    j["kurtosis"] = double(m.kurtosis);
    j["state_variable"] = state_variable;
    return j;
}

/// Sweep CSV shaped like the trend-sensitivity table: measures as rows, one
/// column per trend value.
template <class Scalar>
void write_sweep_csv(std::ostream& out, const std::vector<MuSweepRowT<Scalar>>& rows)
{
    out << "measure";
    for (const auto& r : rows)
        out << ',' << detail::fmt17(double(r.mu));
    out << '\n';
    const char* names[] = {"Mean", "Median", "STD", "Skew", "Kurtosis"};
    for (int k = 0; k < 5; ++k) {
        out << names[k];
        for (const auto& r : rows) {
            out << ',';
            if (!r.ok) {
                out << "error";
                continue;
            }
            const double v = k == 0   ? double(r.moments.mean)
                             : k == 1 ? double(r.moments.median)
                             : k == 2 ? double(r.moments.std)
                             : k == 3 ? double(r.moments.skew)
                                      : double(r.moments.kurtosis);
            out << detail::fmt17(v);
        }
        out << '\n';
    }
}

/// Map price-level states to simple rates of return x -> x/spot - 1,
/// carrying the Jacobian so the mass is unchanged.
template <class Scalar>
GridDensityT<Scalar> to_return_space(const GridDensityT<Scalar>& d, Scalar spot)
{
    if (!(spot > Scalar(0)))
        throw InvalidInput("to_return_space: spot must be positive");
    return {(d.grid / spot - Scalar(1)).eval(), (d.values * spot).eval(), d.kind};
}

} // namespace ipd
