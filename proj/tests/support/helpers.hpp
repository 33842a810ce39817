// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"

namespace testing
{

inline chaoskit::EmpiricalMeasure random_cloud(chaoskit::RngStream& rng, std::size_t n,
                                               std::size_t dim, double scale = 1.0)
{
    std::vector<double> xs(n * dim);
    for (auto& x : xs)
        x = scale * rng.normal();
    return chaoskit::EmpiricalMeasure(std::move(xs), dim);
}

//! Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t panels)
{
    if (panels % 2)
        ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

//! Minimum over all permutations of sum_i cost(i, perm[i]).
inline double brute_force_assignment(std::size_t n,
                                     const std::function<double(std::size_t, std::size_t)>& cost)
{
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do
    {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += cost(i, perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace testing

namespace testing
{

//! Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace testing

namespace testing
{

//! Two-sample Kolmogorov-Smirnov distance.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

//! W1 between two equally weighted samples on the line (equal sizes).
inline double w1_samples(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += std::abs(a[k] - b[k]);
    return s / static_cast<double>(a.size());
}

}  // namespace testing
