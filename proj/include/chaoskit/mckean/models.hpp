// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "chaoskit/core/model.hpp"

namespace chaoskit::mckean
{

using Gradient = std::function<void(std::span<const double> x, std::span<double> out)>;

/*!
 * b(x, mu) = -grad V(x) - int grad W(x - y) mu(dy), sigma = s I.
 * An empty W gives independent Langevin particles.
 */
DiffusionModel gradient_model(std::size_t dim, Gradient grad_v, Gradient grad_w, double sigma);

//! V = a|x|^2/2, W = c|x|^2/2; the interaction only needs the mean.
DiffusionModel quadratic_gradient_model(std::size_t dim, double a, double c, double sigma);

//! b(theta) = K0 mean_j sin(theta_j - theta) on the circle, sigma scalar.
DiffusionModel kuramoto_model(double k0, double sigma);

/*!
 * Phase-space state (x, v) in R^{2d}: dx = v dt,
 * dv = (1/N) sum_j K(|x_j - x|)(v_j - v) dt + sigma dB.
 */
DiffusionModel cucker_smale_model(std::size_t dim, std::function<double(double)> k, double sigma);

//! b(x, mu) = mean(mu) - x, sigma = s I.
DiffusionModel linear_mean_model(std::size_t dim, double sigma);

//! Wrapped normal N(mean, sd^2) on the circle.
PointSampler wrapped_normal(double mean, double sd);
//! Independent N(mean, sd^2) coordinates.
PointSampler gaussian_point(double mean, double sd);

}  // namespace chaoskit::mckean
