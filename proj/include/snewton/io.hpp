#pragma once

/// \file io.hpp
/// CSV and JSON serialization of profiles, diagnostics and physical
/// solutions. Numbers are written with 17 significant digits so that every
/// double round-trips exactly.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "analysis.hpp"
#include "physical.hpp"
#include "profile.hpp"

namespace snewton {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// 64-bit FNV-1a of `text`, as 16 hex digits.
inline std::string run_id(std::string_view text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

inline void write_profile_csv(std::ostream& os, const Profile& prof, std::string_view id)
{
    os << "# run_id=" << id << "\n";
    os << "r,u,du,V,dV\n";
    for (const auto& s : prof.samples) {
        os << format_double(s.r) << ',' << format_double(s.s.u) << ',' << format_double(s.s.du) << ','
           << format_double(s.s.V) << ',' << format_double(s.s.dV) << '\n';
    }
}

inline void write_physical_csv(std::ostream& os, const PhysicalSolution& sol, std::string_view id)
{
    os << "# run_id=" << id << "\n";
    os << "r,phi,v\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        os << format_double(sol.x[i]) << ',' << format_double(sol.phi[i]) << ',' << format_double(sol.v[i]) << '\n';
    }
}

namespace detail {

inline double parse_number(const std::string& field, std::size_t line, std::size_t column)
{
    std::size_t used = 0;
    double v = 0.0;
    bool ok = !field.empty();
    if (ok) {
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            ok = false;
        }
    }
    require(ok && used == field.size() && std::isfinite(v), ErrorKind::ParseError,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": '" + field +
                "' is not a finite number");
    return v;
}

} // namespace detail

/// Reads a profile written by write_profile_csv. Lines starting with '#' are
/// skipped; the header must be r,u,du,V,dV. u0 is recovered from the first
/// sample through the origin series, zeros are relocated on the dense output.
inline Profile read_profile_csv(std::istream& is, const ProblemParams& p)
{
    Profile prof;
    prof.params = p;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            require(line == "r,u,du,V,dV", ErrorKind::ParseError,
                    "line " + std::to_string(lineno) + ": expected header r,u,du,V,dV");
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        double vals[5];
        std::size_t col = 0;
        while (std::getline(ss, field, ',')) {
            require(col < 5, ErrorKind::ParseError, "line " + std::to_string(lineno) + ": more than 5 columns");
            vals[col] = detail::parse_number(field, lineno, col + 1);
            ++col;
        }
        require(col == 5, ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": expected 5 columns, found " + std::to_string(col));
        require(prof.samples.empty() || vals[0] > prof.samples.back().r, ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": radii must increase");
        require(vals[0] > 0.0, ErrorKind::ParseError, "line " + std::to_string(lineno) + ": radius must be positive");
        prof.samples.push_back({vals[0], ShootState{vals[1], vals[2], vals[3], vals[4]}});
    }
    require(header, ErrorKind::ParseError, "missing header line");
    require(prof.samples.size() >= 2, ErrorKind::ParseError, "fewer than two samples");
    const double eps = prof.samples.front().r;
    prof.u0 = prof.samples.front().s.u / (1.0 - eps * eps / (2.0 * p.k_u()));
    require(prof.u0 > 0.0, ErrorKind::ParseError, "first sample must have u > 0");
    prof.r_end = prof.samples.back().r;
    prof.tail_start = prof.samples.size();
    prof.zeros = prof.locate_zeros();
    return prof;
}

inline Json to_json(const CheckResult& c)
{
    return Json{{"pass", c.passed}, {"worst", c.worst}, {"r_worst", c.r_worst}, {"tolerance", c.tolerance}};
}

inline Json to_json(const DiagnosticsReport& rep)
{
    Json checks = Json::object();
    for (const auto& c : rep.checks) checks[c.name] = to_json(c);
    return checks;
}

inline Json to_json(const DecayTrace& d)
{
    return Json{{"final_z", d.final_z},
                {"delta", d.delta},
                {"pass", d.decaying()},
                {"samples", d.r.size()},
                {"r_from", d.r.front()},
                {"r_to", d.r.back()},
                {"kappa", d.kappa},
                {"surrogate_bounded", d.surrogate_bounded},
                {"log_surrogate_growth", d.log_surrogate_max - d.log_surrogate_start}};
}

} // namespace snewton
