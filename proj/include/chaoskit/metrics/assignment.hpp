// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chaoskit::metrics
{

/*!
 * Exact linear assignment (Jonker-Volgenant shortest augmenting path).
 *
 * `cost` is an n x n row-major matrix. Returns row_to_col such that
 * sum_i cost[i, row_to_col[i]] is minimal.
 */
std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const double> cost);
std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const float> cost);

/*!
 * Exact optimal transport between discrete distributions a (size n) and
 * b (size m) with total mass 1, cost row-major n x m. Successive shortest
 * paths with potentials; returns the optimal cost.
 */
double transport_cost(std::span<const double> a, std::span<const double> b,
                      std::span<const double> cost);

}  // namespace chaoskit::metrics
