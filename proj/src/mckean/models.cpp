// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/mckean/models.hpp"

#include <cmath>

#include "chaoskit/core/error.hpp"

namespace chaoskit::mckean
{
namespace
{
PointMap constant_diagonal(double sigma)
{
    return [sigma](std::span<const double>, const MeasureContext&, std::span<double> out) {
        std::fill(out.begin(), out.end(), sigma);
    };
}

void mean_summary(const MeasureView& v, std::vector<double>& out)
{
    out.assign(v.dim, 0.0);
    for (std::size_t i = 0; i < v.n; ++i)
        for (std::size_t a = 0; a < v.dim; ++a)
            out[a] += v.atom(i)[a];
    for (auto& m : out)
        m /= static_cast<double>(v.n);
}
}  // namespace

DiffusionModel gradient_model(std::size_t dim, Gradient grad_v, Gradient grad_w, double sigma)
{
    require(dim >= 1, "gradient_model: dimension must be >= 1");
    require(grad_v != nullptr, "gradient_model: grad V is required");
    DiffusionModel m;
    m.name = "gradient";
    m.dim = dim;
    m.measure_dependent = grad_w != nullptr;
    m.needs_atoms = m.measure_dependent;
    m.drift = [grad_v, grad_w, dim](std::span<const double> x, const MeasureContext& ctx,
                                    std::span<double> out) {
        grad_v(x, out);
        for (auto& v : out)
            v = -v;
        if (!grad_w)
            return;
        std::vector<double> z(dim), g(dim), acc(dim, 0.0);
        for (std::size_t j = 0; j < ctx.atoms.n; ++j)
        {
            auto y = ctx.atoms.atom(j);
            for (std::size_t a = 0; a < dim; ++a)
                z[a] = x[a] - y[a];
            grad_w(z, g);
            for (std::size_t a = 0; a < dim; ++a)
                acc[a] += g[a];
        }
        for (std::size_t a = 0; a < dim; ++a)
            out[a] -= acc[a] / static_cast<double>(ctx.atoms.n);
    };
    m.diffusion = constant_diagonal(sigma);
    m.scalar_sigma = sigma;
    return m;
}

DiffusionModel quadratic_gradient_model(std::size_t dim, double a, double c, double sigma)
{
    require(dim >= 1, "quadratic_gradient_model: dimension must be >= 1");
    DiffusionModel m;
    m.name = "gradient";
    m.dim = dim;
    m.measure_dependent = c != 0.0;
    m.summarize = mean_summary;
    m.drift = [a, c](std::span<const double> x, const MeasureContext& ctx, std::span<double> out) {
        for (std::size_t k = 0; k < x.size(); ++k)
            out[k] = -a * x[k] - c * (x[k] - ctx.summary[k]);
    };
    m.diffusion = constant_diagonal(sigma);
    m.scalar_sigma = sigma;
    m.drift_lipschitz = std::abs(a) + 2 * std::abs(c);
    return m;
}

DiffusionModel kuramoto_model(double k0, double sigma)
{
    DiffusionModel m;
    m.name = "kuramoto";
    m.dim = 1;
    m.domain = Domain::torus;
    m.measure_dependent = k0 != 0.0;
    m.summarize = [](const MeasureView& v, std::vector<double>& out) {
        double s = 0, c = 0;
        for (std::size_t i = 0; i < v.n; ++i)
        {
            s += std::sin(v.atoms[i]);
            c += std::cos(v.atoms[i]);
        }
        out = {s / static_cast<double>(v.n), c / static_cast<double>(v.n)};
    };
    // mean_j sin(theta_j - theta) = S cos(theta) - C sin(theta)
    m.drift = [k0](std::span<const double> x, const MeasureContext& ctx, std::span<double> out) {
        out[0] = k0 * (ctx.summary[0] * std::cos(x[0]) - ctx.summary[1] * std::sin(x[0]));
    };
    m.diffusion = constant_diagonal(sigma);
    m.scalar_sigma = sigma;
    m.drift_lipschitz = 2 * std::abs(k0);
    return m;
}

DiffusionModel cucker_smale_model(std::size_t dim, std::function<double(double)> k, double sigma)
{
    require(dim >= 1, "cucker_smale_model: dimension must be >= 1");
    require(k != nullptr, "cucker_smale_model: kernel is required");
    DiffusionModel m;
    m.name = "cucker_smale";
    m.dim = 2 * dim;
    m.domain = Domain::kinetic;
    m.needs_atoms = true;
    m.drift = [k, dim](std::span<const double> z, const MeasureContext& ctx, std::span<double> out) {
        for (std::size_t a = 0; a < dim; ++a)
        {
            out[a] = z[dim + a];
            out[dim + a] = 0;
        }
        for (std::size_t j = 0; j < ctx.atoms.n; ++j)
        {
            auto w = ctx.atoms.atom(j);
            double r2 = 0;
            for (std::size_t a = 0; a < dim; ++a)
                r2 += (w[a] - z[a]) * (w[a] - z[a]);
            const double kr = k(std::sqrt(r2));
            for (std::size_t a = 0; a < dim; ++a)
                out[dim + a] += kr * (w[dim + a] - z[dim + a]);
        }
        for (std::size_t a = 0; a < dim; ++a)
            out[dim + a] /= static_cast<double>(ctx.atoms.n);
    };
    m.diffusion = [sigma, dim](std::span<const double>, const MeasureContext&, std::span<double> out) {
        for (std::size_t a = 0; a < dim; ++a)
        {
            out[a] = 0;
            out[dim + a] = sigma;
        }
    };
    return m;
}

DiffusionModel linear_mean_model(std::size_t dim, double sigma)
{
    require(dim >= 1, "linear_mean_model: dimension must be >= 1");
    DiffusionModel m;
    m.name = "linear_mean";
    m.dim = dim;
    m.summarize = mean_summary;
    m.drift = [](std::span<const double> x, const MeasureContext& ctx, std::span<double> out) {
        for (std::size_t k = 0; k < x.size(); ++k)
            out[k] = ctx.summary[k] - x[k];
    };
    m.diffusion = constant_diagonal(sigma);
    m.scalar_sigma = sigma;
    m.drift_lipschitz = 2;
    return m;
}

PointSampler wrapped_normal(double mean, double sd)
{
    return [mean, sd](RngStream& rng, std::span<double> out) {
        for (auto& v : out)
            v = wrap_angle(mean + sd * rng.normal());
    };
}

PointSampler gaussian_point(double mean, double sd)
{
    return [mean, sd](RngStream& rng, std::span<double> out) {
        for (auto& v : out)
            v = mean + sd * rng.normal();
    };
}

}  // namespace chaoskit::mckean
