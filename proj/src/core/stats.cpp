// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/core/stats.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/core/error.hpp"

namespace chaoskit
{

double mean(std::span<const double> v)
{
    require(!v.empty(), "mean: empty sample");
    double s = 0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v)
{
    if (v.size() < 2)
        return 0;
    const double m = mean(v);
    double s = 0;
    for (double x : v)
        s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double q)
{
    require(!sorted.empty(), "quantile: empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size())
        return sorted.back();
    const double w = pos - static_cast<double>(i);
    return sorted[i] * (1 - w) + sorted[i + 1] * w;
}

Interval bootstrap_mean_ci(std::span<const double> values, RngStream rng,
                           std::size_t resamples, double level)
{
    require(!values.empty(), "bootstrap: empty sample");
    require(resamples >= 2, "bootstrap: need at least two resamples");
    std::vector<double> stats(resamples);
    const std::size_t n = values.size();
    for (auto& s : stats)
    {
        double acc = 0;
        for (std::size_t k = 0; k < n; ++k)
            acc += values[rng.below(n)];
        s = acc / static_cast<double>(n);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = 0.5 * (1 - level);
    Interval ci{quantile_sorted(stats, tail), quantile_sorted(stats, 1 - tail)};
    const double m = mean(values);
    ci.lo = std::min(ci.lo, m);
    ci.hi = std::max(ci.hi, m);
    return ci;
}

LineFit ols(std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size() && x.size() >= 2, "ols: need at least two points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0, "ols: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

SlopeFit loglog_slope(std::span<const double> xs, const std::vector<std::vector<double>>& samples,
                      RngStream rng, std::size_t resamples, double level)
{
    require(xs.size() == samples.size() && xs.size() >= 2, "slope fit: need at least two points");
    std::vector<double> lx(xs.size()), ly(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
    {
        require(xs[k] > 0 && !samples[k].empty(), "slope fit: invalid point");
        const double m = mean(samples[k]);
        require(m > 0, "slope fit: nonpositive estimate cannot be log-transformed");
        lx[k] = std::log(xs[k]);
        ly[k] = std::log(m);
    }
    auto fit = ols(lx, ly);
    std::vector<double> slopes;
    slopes.reserve(resamples);
    std::vector<double> by(xs.size());
    for (std::size_t b = 0; b < resamples; ++b)
    {
        bool ok = true;
        for (std::size_t k = 0; k < xs.size(); ++k)
        {
            const auto& s = samples[k];
            double acc = 0;
            for (std::size_t r = 0; r < s.size(); ++r)
                acc += s[rng.below(s.size())];
            if (!(acc > 0))
                ok = false;
            by[k] = std::log(acc / static_cast<double>(s.size()));
        }
        if (ok)
            slopes.push_back(ols(lx, by).slope);
    }
    SlopeFit out{fit.slope, fit.intercept, {fit.slope, fit.slope}};
    if (slopes.size() >= 2)
    {
        std::sort(slopes.begin(), slopes.end());
        const double tail = 0.5 * (1 - level);
        out.ci = {std::min(fit.slope, quantile_sorted(slopes, tail)),
                  std::max(fit.slope, quantile_sorted(slopes, 1 - tail))};
    }
    return out;
}

}  // namespace chaoskit
