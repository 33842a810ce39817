// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "chaoskit/core/model.hpp"

/*!
 * Data-parallel inner loops.
 *
 * Every kernel has an OpenMP version (namespace kernels) and a serial
 * reference (namespace kernels::serial) that tests compare against bit for
 * bit. Reductions are done per row in parallel and then summed in row
 * order, so results do not depend on the thread count.
 */
namespace chaoskit::kernels
{

/*!
 * One Euler-Maruyama update of N particles:
 *   x_out[i] = x_in[i] + b(x_in[i], mu) dt + sigma(x_in[i], mu) sqrt(dt) xi[i]
 * `noise` holds N*dim standard normals. Torus coordinates are wrapped.
 * Throws NumericalError naming the lowest offending particle index.
 */
void em_update(const DiffusionModel& model, const MeasureContext& ctx,
               std::span<const double> x_in, std::size_t n, double dt,
               std::span<const double> noise, std::span<double> x_out);

using RadialKernel = std::function<double(double)>;

//! sum_i sum_j k(|x_i - y_j|) over two atom sets of equal dimension.
double radial_double_sum(std::span<const double> x, std::span<const double> y,
                         std::size_t dim, const RadialKernel& k);

namespace serial
{
void em_update(const DiffusionModel& model, const MeasureContext& ctx,
               std::span<const double> x_in, std::size_t n, double dt,
               std::span<const double> noise, std::span<double> x_out);

double radial_double_sum(std::span<const double> x, std::span<const double> y,
                         std::size_t dim, const RadialKernel& k);
}  // namespace serial

}  // namespace chaoskit::kernels
