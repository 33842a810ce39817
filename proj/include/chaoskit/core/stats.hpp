// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chaoskit/core/rng.hpp"

namespace chaoskit
{

struct Interval
{
    double lo{0};
    double hi{0};
};

double mean(std::span<const double> v);
//! Unbiased sample variance (0 for fewer than two values).
double variance(std::span<const double> v);

//! Percentile bootstrap CI of the mean (resampling the given values).
Interval bootstrap_mean_ci(std::span<const double> values, RngStream rng,
                           std::size_t resamples = 200, double level = 0.95);

struct LineFit
{
    double slope{0};
    double intercept{0};
};

//! Ordinary least squares y = intercept + slope * x.
LineFit ols(std::span<const double> x, std::span<const double> y);

/*!
 * Log-log slope with a replica bootstrap CI.
 *
 * samples[k] holds per-replica values at abscissa xs[k]. Each resample
 * redraws replicas independently per abscissa, refits on the log of the
 * resampled means, and the CI is the percentile interval of the slopes.
 */
struct SlopeFit
{
    double slope{0};
    double intercept{0};
    Interval ci;
};

SlopeFit loglog_slope(std::span<const double> xs,
                      const std::vector<std::vector<double>>& samples, RngStream rng,
                      std::size_t resamples = 200, double level = 0.95);

//! Percentile of sorted data by linear interpolation, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace chaoskit
