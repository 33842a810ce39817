// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/kernels/kernels.hpp"
#include "chaoskit/metrics/metrics.hpp"

namespace chaoskit::metrics
{
namespace
{
void check_nonempty(const MeasureView& m, const char* op)
{
    require(m.n > 0 && m.dim > 0 && m.atoms.size() == m.n * m.dim,
            std::string(op) + ": empty or malformed measure");
}

std::vector<double> sorted_coords(const MeasureView& m)
{
    std::vector<double> v(m.atoms.begin(), m.atoms.end());
    if (m.domain == Domain::torus)
        for (auto& x : v)
            x = wrap_angle(x);
    std::sort(v.begin(), v.end());
    return v;
}

double quantile_integral(const std::vector<double>& x, const std::vector<double>& y, int p)
{
    const auto n = static_cast<std::int64_t>(x.size());
    const auto m = static_cast<std::int64_t>(y.size());
    std::int64_t i = 0, j = 0, cur = 0;
    double total = 0;
    while (i < n && j < m)
    {
        const std::int64_t ai = (i + 1) * m;
        const std::int64_t bj = (j + 1) * n;
        const std::int64_t next = std::min(ai, bj);
        const double diff = std::abs(x[i] - y[j]);
        total += static_cast<double>(next - cur) * (p == 1 ? diff : diff * diff);
        cur = next;
        if (ai == next)
            ++i;
        if (bj == next)
            ++j;
    }
    return total / (static_cast<double>(n) * static_cast<double>(m));
}

double circle_w1(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<std::int64_t>(x.size());
    const auto m = static_cast<std::int64_t>(y.size());
    struct Segment
    {
        std::int64_t level;  // (F - G) * n * m
        double length;
    };
    std::vector<Segment> segs;
    segs.reserve(x.size() + y.size() + 1);
    std::size_t i = 0, j = 0;
    std::int64_t level = 0;
    double pos = 0;
    while (i < x.size() || j < y.size())
    {
        double next = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
        segs.push_back({level, next - pos});
        while (i < x.size() && x[i] == next)
        {
            level += m;
            ++i;
        }
        while (j < y.size() && y[j] == next)
        {
            level -= n;
            ++j;
        }
        pos = next;
    }
    segs.push_back({level, two_pi - pos});
    std::vector<Segment> by_level = segs;
    std::sort(by_level.begin(), by_level.end(),
              [](const Segment& a, const Segment& b) { return a.level < b.level; });
    double acc = 0;
    std::int64_t median = by_level.front().level;
    for (const auto& s : by_level)
    {
        acc += s.length;
        median = s.level;
        if (acc >= 0.5 * two_pi)
            break;
    }
    const double scale = static_cast<double>(n) * static_cast<double>(m);
    double total = 0;
    for (const auto& s : segs)
        total += s.length * static_cast<double>(std::llabs(s.level - median));
    return total / scale;
}

template<class T>
std::vector<T> cost_matrix(const MeasureView& mu, const MeasureView& nu, int p)
{
    const std::size_t n = mu.n;
    std::vector<T> cost(n * n);
    parallel_for(n, [&](std::size_t i) {
        auto xi = mu.atom(i);
        for (std::size_t j = 0; j < n; ++j)
        {
            double dist = ground_distance(xi, nu.atom(j), mu.domain);
            cost[i * n + j] = static_cast<T>(p == 1 ? dist : dist * dist);
        }
    });
    return cost;
}

void check_pair(const MeasureView& mu, const MeasureView& nu, const char* op)
{
    check_nonempty(mu, op);
    check_nonempty(nu, op);
    require(mu.dim == nu.dim, std::string(op) + ": dimension mismatch");
    require(mu.domain == nu.domain, std::string(op) + ": domain mismatch");
}
}  // namespace

double w1_exact_1d(const MeasureView& mu, const MeasureView& nu)
{
    check_pair(mu, nu, "w1_exact_1d");
    require(mu.dim == 1, "w1_exact_1d: measures must be one-dimensional");
    auto x = sorted_coords(mu);
    auto y = sorted_coords(nu);
    if (mu.domain == Domain::torus)
        return circle_w1(x, y);
    return quantile_integral(x, y, 1);
}

double wp_exact_1d(const MeasureView& mu, const MeasureView& nu, int p)
{
    check_pair(mu, nu, "wp_exact_1d");
    require(mu.dim == 1, "wp_exact_1d: measures must be one-dimensional");
    require(p == 1 || p == 2, "wp_exact_1d: p must be 1 or 2");
    if (p == 1)
        return w1_exact_1d(mu, nu);
    require(mu.domain == Domain::euclidean, "wp_exact_1d: p = 2 needs the line");
    return std::sqrt(quantile_integral(sorted_coords(mu), sorted_coords(nu), 2));
}

std::vector<std::size_t> optimal_matching(const MeasureView& mu, const MeasureView& nu, int p,
                                          std::size_t cap)
{
    check_pair(mu, nu, "wp_assignment");
    require(p == 1 || p == 2, "wp_assignment: p must be 1 or 2");
    require(mu.n == nu.n, "wp_assignment: unequal atom counts (resample upstream)");
    require(mu.n <= cap, "wp_assignment: N = " + std::to_string(mu.n)
                             + " exceeds the assignment cap " + std::to_string(cap));
    if (mu.n <= default_assignment_cap)
        return solve_assignment(mu.n, std::span<const double>(cost_matrix<double>(mu, nu, p)));
    return solve_assignment(mu.n, std::span<const float>(cost_matrix<float>(mu, nu, p)));
}

double wp_assignment(const MeasureView& mu, const MeasureView& nu, int p, std::size_t cap)
{
    auto match = optimal_matching(mu, nu, p, cap);
    double total = 0;
    for (std::size_t i = 0; i < mu.n; ++i)
    {
        double dist = ground_distance(mu.atom(i), nu.atom(match[i]), mu.domain);
        total += p == 1 ? dist : dist * dist;
    }
    total /= static_cast<double>(mu.n);
    return p == 1 ? total : std::sqrt(total);
}

double w1_auto(const MeasureView& a, const MeasureView& b)
{
    check_pair(a, b, "w1_auto");
    if (a.dim == 1)
        return w1_exact_1d(a, b);
    if (a.n == b.n && a.n <= default_assignment_cap)
        return wp_assignment(a, b, 1);
    double total = 0;
    for (std::size_t c = 0; c < a.dim; ++c)
    {
        std::vector<double> xa(a.n), xb(b.n);
        for (std::size_t i = 0; i < a.n; ++i)
            xa[i] = a.atom(i)[c];
        for (std::size_t i = 0; i < b.n; ++i)
            xb[i] = b.atom(i)[c];
        total += w1_exact_1d(MeasureView{xa, a.n, 1, a.domain}, MeasureView{xb, b.n, 1, b.domain});
    }
    return total / static_cast<double>(a.dim);
}

//---------------------------------------------------------------------------//
HistogramGrid HistogramGrid::fit(const MeasureView& mu, const MeasureView& nu)
{
    check_pair(mu, nu, "HistogramGrid::fit");
    const std::size_t d = mu.dim;
    HistogramGrid g;
    g.lo.assign(d, std::numeric_limits<double>::infinity());
    g.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const MeasureView* m : {&mu, &nu})
        for (std::size_t i = 0; i < m->n; ++i)
            for (std::size_t k = 0; k < d; ++k)
            {
                g.lo[k] = std::min(g.lo[k], m->atom(i)[k]);
                g.hi[k] = std::max(g.hi[k], m->atom(i)[k]);
            }
    const double n = static_cast<double>(std::max(mu.n, nu.n));
    const auto per_axis = static_cast<std::size_t>(
        std::ceil(std::pow(n, 1.0 / (static_cast<double>(d) + 2.0))));
    g.bins.assign(d, std::max<std::size_t>(1, per_axis));
    for (std::size_t k = 0; k < d; ++k)
        if (!(g.hi[k] > g.lo[k]))
            g.hi[k] = g.lo[k] + 1.0;
    return g;
}

std::size_t HistogramGrid::cell_count() const
{
    std::size_t c = 1;
    for (auto b : bins)
        c *= b;
    return c;
}

std::size_t HistogramGrid::cell(std::span<const double> x) const
{
    require(x.size() == bins.size(), "HistogramGrid: dimension mismatch");
    std::size_t idx = 0;
    for (std::size_t k = bins.size(); k-- > 0;)
    {
        require(x[k] >= lo[k] && x[k] <= hi[k], "HistogramGrid: point outside the box");
        auto b = static_cast<std::size_t>((x[k] - lo[k]) / (hi[k] - lo[k])
                                          * static_cast<double>(bins[k]));
        b = std::min(b, bins[k] - 1);
        idx = idx * bins[k] + b;
    }
    return idx;
}

double tv_hist(const MeasureView& mu, const MeasureView& nu, const HistogramGrid& grid)
{
    check_pair(mu, nu, "tv_hist");
    require(grid.bins.size() == mu.dim && grid.lo.size() == mu.dim && grid.hi.size() == mu.dim,
            "tv_hist: grid dimension mismatch");
    for (std::size_t k = 0; k < mu.dim; ++k)
        require(grid.bins[k] > 0 && grid.hi[k] > grid.lo[k], "tv_hist: degenerate grid axis");
    std::vector<double> diff(grid.cell_count(), 0.0);
    for (std::size_t i = 0; i < mu.n; ++i)
        diff[grid.cell(mu.atom(i))] += 1.0 / static_cast<double>(mu.n);
    for (std::size_t i = 0; i < nu.n; ++i)
        diff[grid.cell(nu.atom(i))] -= 1.0 / static_cast<double>(nu.n);
    double total = 0;
    for (double v : diff)
        total += std::abs(v);
    return std::min(total, 2.0);
}

//---------------------------------------------------------------------------//
namespace
{
template<class Sum>
double hs_combine(const MeasureView& mu, const MeasureView& nu, const SobolevKernel& kernel,
                  Sum&& sum)
{
    check_nonempty(mu, "hs_sq");
    check_nonempty(nu, "hs_sq");
    require(mu.dim == nu.dim && mu.dim == kernel.dim(), "hs_sq: dimension mismatch");
    kernels::RadialKernel k = [&kernel](double r) { return kernel(r); };
    const double n = static_cast<double>(mu.n);
    const double m = static_cast<double>(nu.n);
    const double xx = sum(mu.atoms, mu.atoms, mu.dim, k);
    const double yy = sum(nu.atoms, nu.atoms, nu.dim, k);
    const double xy = sum(mu.atoms, nu.atoms, mu.dim, k);
    return std::max(0.0, xx / (n * n) + yy / (m * m) - 2.0 * xy / (n * m));
}
}  // namespace

double hs_sq(const MeasureView& mu, const MeasureView& nu, const SobolevKernel& kernel)
{
    return hs_combine(mu, nu, kernel, [](auto&&... a) { return kernels::radial_double_sum(a...); });
}

double serial::hs_sq(const MeasureView& mu, const MeasureView& nu, const SobolevKernel& kernel)
{
    return hs_combine(mu, nu, kernel,
                      [](auto&&... a) { return kernels::serial::radial_double_sum(a...); });
}

//---------------------------------------------------------------------------//
LipschitzFamily::LipschitzFamily(std::size_t dim, std::vector<Function> functions)
    : dim_(dim), fns_(std::move(functions))
{
    require(dim > 0, "LipschitzFamily: dimension must be positive");
}

LipschitzFamily LipschitzFamily::tents(std::size_t dim, double lo, double hi, std::size_t levels,
                                       double width)
{
    require(hi > lo, "LipschitzFamily::tents: empty interval");
    require(width >= 1.0, "LipschitzFamily::tents: width below 1 breaks the Lipschitz bound");
    std::vector<Function> fns;
    for (std::size_t level = 0; level < levels; ++level)
    {
        const std::size_t per_axis = (std::size_t{1} << level) + 1;
        std::size_t total = 1;
        for (std::size_t k = 0; k < dim; ++k)
            total *= per_axis;
        for (std::size_t flat = 0; flat < total; ++flat)
        {
            std::vector<double> c(dim);
            std::size_t rem = flat;
            for (std::size_t k = dim; k-- > 0;)
            {
                c[k] = lo + (hi - lo) * static_cast<double>(rem % per_axis)
                                / static_cast<double>(per_axis - 1);
                rem /= per_axis;
            }
            fns.emplace_back([c, width](std::span<const double> x) {
                double s = 0;
                for (std::size_t k = 0; k < c.size(); ++k)
                    s += (x[k] - c[k]) * (x[k] - c[k]);
                return std::max(0.0, 1.0 - std::sqrt(s) / width);
            });
        }
    }
    return LipschitzFamily(dim, std::move(fns));
}

void LipschitzFamily::verify(double lo, double hi, std::size_t pairs, std::uint64_t seed) const
{
    RngStream rng(seed, {purpose::sampling});
    std::vector<double> x(dim_), y(dim_);
    for (std::size_t t = 0; t < pairs; ++t)
    {
        double dist2 = 0;
        for (std::size_t k = 0; k < dim_; ++k)
        {
            x[k] = lo + (hi - lo) * rng.uniform();
            y[k] = lo + (hi - lo) * rng.uniform();
            dist2 += (x[k] - y[k]) * (x[k] - y[k]);
        }
        for (std::size_t f = 0; f < fns_.size(); ++f)
        {
            const double a = fns_[f](x), b = fns_[f](y);
            if (std::abs(a) > 1.0 + 1e-12 || std::abs(a - b) > std::sqrt(dist2) + 1e-12)
                throw BoundViolation("LipschitzFamily: function " + std::to_string(f)
                                     + " violates the bound");
        }
    }
}

double d1_dist(const MeasureView& mu, const MeasureView& nu, const LipschitzFamily& family)
{
    check_pair(mu, nu, "d1_dist");
    require(mu.dim == family.dim(), "d1_dist: dimension mismatch");
    double total = 0;
    double weight = 1.0;
    for (std::size_t k = 0; k < family.size(); ++k)
    {
        weight *= 0.5;
        double a = 0, b = 0;
        for (std::size_t i = 0; i < mu.n; ++i)
            a += family(k, mu.atom(i));
        for (std::size_t i = 0; i < nu.n; ++i)
            b += family(k, nu.atom(i));
        total += weight * std::abs(a / static_cast<double>(mu.n) - b / static_cast<double>(nu.n));
    }
    return total;
}

double relative_entropy_discrete(std::span<const double> p, std::span<const double> q)
{
    require(p.size() == q.size() && !p.empty(), "relative_entropy_discrete: length mismatch");
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        require(p[i] >= 0 && q[i] >= 0 && std::isfinite(p[i]) && std::isfinite(q[i]),
                "relative_entropy_discrete: entries must be finite and >= 0");
        sp += p[i];
        sq += q[i];
    }
    require(std::abs(sp - 1.0) <= 1e-12 && std::abs(sq - 1.0) <= 1e-12,
            "relative_entropy_discrete: vectors must sum to 1");
    double h = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        if (p[i] == 0)
            continue;
        if (q[i] == 0)
            return std::numeric_limits<double>::infinity();
        h += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, h);
}

}  // namespace chaoskit::metrics
