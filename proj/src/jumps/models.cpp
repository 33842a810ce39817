// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/jumps/models.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/core/error.hpp"

namespace chaoskit::jumps
{
namespace
{
double wrap_box(double x, double box)
{
    double r = std::fmod(x, box);
    if (r < 0)
        r += box;
    return r >= box ? 0.0 : r;
}

double box_diff(double a, double b, double box)
{
    double d = std::fmod(a - b, box);
    if (d < -box / 2)
        d += box;
    else if (d >= box / 2)
        d -= box;
    return d;
}

std::size_t pick(double u, std::size_t n)
{
    return std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
}
}  // namespace

std::vector<double> mutation_kernel(std::size_t m, double eps)
{
    require(m >= 1, "mutation_kernel: m must be >= 1");
    require(eps >= 0 && eps <= 1, "mutation_kernel: eps must lie in [0, 1]");
    std::vector<double> k(m * m, eps / static_cast<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        k[i * m + i] += 1 - eps;
    return k;
}

MeanFieldJumpModel choose_leader_finite(std::size_t m, std::vector<double> kernel)
{
    require(m >= 1, "choose_leader_finite: m must be >= 1");
    require(kernel.size() == m * m, "choose_leader_finite: kernel must be m x m");
    std::vector<double> cdf(m * m);
    for (std::size_t i = 0; i < m; ++i)
    {
        double acc = 0;
        for (std::size_t j = 0; j < m; ++j)
        {
            const double v = kernel[i * m + j];
            require(v >= 0, "choose_leader_finite: negative kernel entry");
            acc += v;
            cdf[i * m + j] = acc;
        }
        require(std::abs(acc - 1) <= 1e-9, "choose_leader_finite: kernel rows must sum to 1");
        cdf[i * m + m - 1] = 1.0;
    }
    MeanFieldJumpModel model;
    model.name = "choose_leader";
    model.dim = 1;
    model.measure_dependent = true;
    model.needs_atoms = false;
    model.summarize = [m](const MeasureView& mu, std::vector<double>& out) {
        out.assign(m, 0.0);
        for (std::size_t i = 0; i < mu.n; ++i)
        {
            const auto s = static_cast<std::size_t>(mu.atoms[i * mu.dim]);
            out[std::min(s, m - 1)] += 1.0 / static_cast<double>(mu.n);
        }
    };
    model.rate = [](std::span<const double>, const MeasureContext&) { return 1.0; };
    model.rate_bound = 1.0;
    model.sample_theta = [](RngStream& rng, std::vector<double>& theta) {
        theta.push_back(rng.uniform());
        theta.push_back(rng.uniform());
    };
    model.jump = [m, cdf](std::span<const double>, const MeasureContext& ctx,
                          std::span<const double> theta, std::span<double> out) {
        const auto& hist = ctx.summary;
        std::size_t leader = m - 1;
        double acc = 0;
        for (std::size_t s = 0; s < m; ++s)
        {
            acc += hist[s];
            if (theta[0] < acc)
            {
                leader = s;
                break;
            }
        }
        const auto row = std::span<const double>(cdf).subspan(leader * m, m);
        const auto it = std::upper_bound(row.begin(), row.end(), theta[1]);
        out[0] = static_cast<double>(std::min<std::size_t>(it - row.begin(), m - 1));
    };
    return model;
}

MeanFieldJumpModel choose_leader_smooth(double kernel_sd, double drift_rate)
{
    require(kernel_sd >= 0, "choose_leader_smooth: kernel sd must be >= 0");
    require(drift_rate >= 0, "choose_leader_smooth: drift rate must be >= 0");
    MeanFieldJumpModel model;
    model.name = "choose_leader_smooth";
    model.dim = 1;
    model.measure_dependent = true;
    model.needs_atoms = true;
    model.rate = [](std::span<const double>, const MeasureContext&) { return 1.0; };
    model.rate_bound = 1.0;
    model.sample_theta = [](RngStream& rng, std::vector<double>& theta) {
        theta.push_back(rng.uniform());
        theta.push_back(rng.normal());
    };
    model.jump = [kernel_sd](std::span<const double>, const MeasureContext& ctx,
                             std::span<const double> theta, std::span<double> out) {
        const auto& mu = ctx.atoms;
        out[0] = mu.atoms[pick(theta[0], mu.n)] + kernel_sd * theta[1];
    };
    if (drift_rate > 0)
    {
        model.flow = [drift_rate](std::span<const double> x, std::span<double> v) {
            v[0] = -drift_rate * x[0];
        };
        model.flow_lipschitz = drift_rate;
    }
    return model;
}

MeanFieldJumpModel bgk_model(std::size_t dim, double rate, double box, double radius)
{
    require(dim >= 1, "bgk_model: d must be >= 1");
    require(rate > 0, "bgk_model: rate must be positive");
    require(box > 0, "bgk_model: box length must be positive");
    if (radius <= 0)
        radius = box / 8;
    MeanFieldJumpModel model;
    model.name = "bgk";
    model.dim = 2 * dim;
    model.domain = Domain::kinetic;
    model.measure_dependent = true;
    model.needs_atoms = true;
    model.rate = [rate](std::span<const double>, const MeasureContext&) { return rate; };
    model.rate_bound = rate;
    model.sample_theta = [dim](RngStream& rng, std::vector<double>& theta) {
        for (std::size_t a = 0; a < dim; ++a)
            theta.push_back(rng.normal());
    };
    model.jump = [dim, box, radius](std::span<const double> x, const MeasureContext& ctx,
                                    std::span<const double> theta, std::span<double> out) {
        const auto& mu = ctx.atoms;
        std::vector<double> mean(dim, 0.0);
        double sq = 0;
        std::size_t count = 0;
        auto gather = [&](bool local) {
            for (std::size_t j = 0; j < mu.n; ++j)
            {
                auto z = mu.atom(j);
                if (local)
                {
                    double r2 = 0;
                    for (std::size_t a = 0; a < dim; ++a)
                    {
                        const double dx = box_diff(z[a], x[a], box);
                        r2 += dx * dx;
                    }
                    if (r2 > radius * radius)
                        continue;
                }
                ++count;
                for (std::size_t a = 0; a < dim; ++a)
                {
                    mean[a] += z[dim + a];
                    sq += z[dim + a] * z[dim + a];
                }
            }
        };
        gather(true);
        if (count < 2)
        {
            std::fill(mean.begin(), mean.end(), 0.0);
            sq = 0;
            count = 0;
            gather(false);
        }
        const double c = static_cast<double>(count);
        double m2 = 0;
        for (auto& v : mean)
        {
            v /= c;
            m2 += v * v;
        }
        const double temperature = std::max(0.0, (sq / c - m2) / static_cast<double>(dim));
        const double sd = std::sqrt(temperature);
        for (std::size_t a = 0; a < dim; ++a)
        {
            out[a] = x[a];
            out[dim + a] = mean[a] + sd * theta[a];
        }
    };
    model.flow = [dim](std::span<const double> x, std::span<double> v) {
        for (std::size_t a = 0; a < dim; ++a)
        {
            v[a] = x[dim + a];
            v[dim + a] = 0;
        }
    };
    model.flow_lipschitz = 1;
    model.normalize = [dim, box](std::span<double> x) {
        for (std::size_t a = 0; a < dim; ++a)
            x[a] = wrap_box(x[a], box);
    };
    return model;
}

MeanFieldJumpModel neuron_model(double rate_max, double leak)
{
    require(rate_max > 0, "neuron_model: rate must be positive");
    require(leak >= 0, "neuron_model: leak must be >= 0");
    MeanFieldJumpModel model;
    model.name = "neuron";
    model.dim = 1;
    model.measure_dependent = false;
    model.needs_atoms = false;
    model.rate = [rate_max](std::span<const double> x, const MeasureContext&) {
        const double v = std::max(x[0], 0.0);
        return rate_max * v / (1 + v);
    };
    model.rate_bound = rate_max;
    model.jump = [](std::span<const double>, const MeasureContext&, std::span<const double>,
                    std::span<double> out) { out[0] = 0; };
    if (leak > 0)
    {
        model.flow = [leak](std::span<const double> x, std::span<double> v) { v[0] = -leak * x[0]; };
        model.flow_lipschitz = leak;
    }
    model.collateral = [](std::span<const double>, std::span<const double>, const MeasureContext&,
                          std::span<const double>, std::span<const double>,
                          std::span<double> out) { out[0] = 1; };
    return model;
}

}  // namespace chaoskit::jumps
