// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/core/csv.hpp"

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "chaoskit/core/error.hpp"

namespace chaoskit
{

std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string format_hex(std::uint64_t x)
{
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, x);
    return buf;
}

void write_trajectory_header(std::ostream& os, std::size_t dim)
{
    os << "replica,t,particle";
    for (std::size_t k = 0; k < dim; ++k)
        os << ",x" << k;
    os << '\n';
}

void write_trajectory_rows(std::ostream& os, const TrajectoryBundle& bundle,
                           std::size_t replica)
{
    for (std::size_t g = 0; g < bundle.states.size(); ++g)
    {
        const auto& s = bundle.states[g];
        std::string t = format_real(bundle.times[g]);
        for (std::size_t i = 0; i < s.n; ++i)
        {
            os << replica << ',' << t << ',' << i;
            for (double x : s.point(i))
                os << ',' << format_real(x);
            os << '\n';
        }
    }
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name)
            return k;
    throw IoError("csv: missing column '" + name + "'");
}

namespace
{
std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}
}  // namespace

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    if (!std::getline(is, line))
        throw IoError("csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    t.header = split_line(line);
    while (std::getline(is, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split_line(line);
        if (cells.size() != t.header.size())
            throw IoError("csv: row has " + std::to_string(cells.size()) + " cells, header has "
                          + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace chaoskit
