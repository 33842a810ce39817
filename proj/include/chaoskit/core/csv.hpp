// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chaoskit/core/state.hpp"

namespace chaoskit
{

//! Shortest round-trip text for a double (17 significant digits).
std::string format_real(double x);
std::string format_hex(std::uint64_t x);

//! Header: replica,t,particle,x0,...,x{d-1}
void write_trajectory_header(std::ostream& os, std::size_t dim);
//! One row per particle per grid time.
void write_trajectory_rows(std::ostream& os, const TrajectoryBundle& bundle,
                           std::size_t replica);

//! Minimal RFC-4180-free CSV reader: comma separated, no quoting.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    //! Column index by name; throws IoError if absent.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);

}  // namespace chaoskit
