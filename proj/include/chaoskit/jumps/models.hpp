// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "chaoskit/core/model.hpp"

namespace chaoskit::jumps
{

/*!
 * Choose-the-leader on E = {0, ..., m-1}: rate 1, the jumping particle picks
 * a leader uniformly from the empirical measure (itself included) and moves
 * to y ~ K(leader, .). `kernel` is row-major m x m, rows summing to 1.
 */
MeanFieldJumpModel choose_leader_finite(std::size_t m, std::vector<double> kernel);

//! K = (1 - eps) I + eps / m.
std::vector<double> mutation_kernel(std::size_t m, double eps);

/*!
 * Choose-the-leader on the line with a sampled kernel y = leader + s * xi,
 * xi standard normal, and optional linear flow a(x) = -drift_rate * x.
 */
MeanFieldJumpModel choose_leader_smooth(double kernel_sd, double drift_rate);

/*!
 * BGK relaxation in a periodic box [0, box)^d: state (x, v), flow (v, 0),
 * jumps at constant rate to a velocity drawn from the Maxwellian whose mean
 * and temperature are the empirical moments within `radius` of x.
 */
MeanFieldJumpModel bgk_model(std::size_t dim, double rate, double box, double radius);

/*!
 * Neuron toy: leak a(x) = -leak x, firing rate rate_max x / (1 + x),
 * reset to 0, every other potential kicked by alpha~ = 1 (i.e. 1/N).
 */
MeanFieldJumpModel neuron_model(double rate_max, double leak);

}  // namespace chaoskit::jumps
