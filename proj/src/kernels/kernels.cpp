// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/kernels/kernels.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include <omp.h>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"

namespace chaoskit::kernels
{
namespace
{
struct Scratch
{
    std::vector<double> drift;
    std::vector<double> sigma;

    explicit Scratch(const DiffusionModel& m)
        : drift(m.dim),
          sigma(m.noise == NoiseShape::full ? m.dim * m.dim : m.dim)
    {
    }
};

//! Returns false if the update produced a non-finite value.
inline bool update_one(const DiffusionModel& m, const MeasureContext& ctx,
                       std::span<const double> x_in, std::size_t i, double dt,
                       double sqdt, std::span<const double> noise,
                       std::span<double> x_out, Scratch& s)
{
    const std::size_t d = m.dim;
    auto x = x_in.subspan(i * d, d);
    auto xi = noise.subspan(i * d, d);
    auto out = x_out.subspan(i * d, d);
    m.drift(x, ctx, s.drift);
    if (m.diffusion)
        m.diffusion(x, ctx, s.sigma);
    else
        std::fill(s.sigma.begin(), s.sigma.end(), 0.0);
    bool ok = true;
    for (std::size_t a = 0; a < d; ++a)
    {
        double inc = 0;
        if (m.noise == NoiseShape::diagonal)
        {
            inc = s.sigma[a] * xi[a];
        }
        else
        {
            for (std::size_t b = 0; b < d; ++b)
                inc += s.sigma[a * d + b] * xi[b];
        }
        double v = x[a] + s.drift[a] * dt + sqdt * inc;
        ok = ok && std::isfinite(v);
        out[a] = (m.domain == Domain::torus) ? wrap_angle(v) : v;
    }
    return ok;
}

[[noreturn]] void throw_nonfinite(std::size_t i)
{
    throw NumericalError("em_step: non-finite drift or diffusion output at particle "
                         + std::to_string(i));
}
}  // namespace

void em_update(const DiffusionModel& model, const MeasureContext& ctx,
               std::span<const double> x_in, std::size_t n, double dt,
               std::span<const double> noise, std::span<double> x_out)
{
    const double sqdt = std::sqrt(dt);
    std::size_t bad = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;
    std::size_t error_index = bad;
    std::mutex m;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel num_threads(thread_count()) if (n > 256 && !omp_in_parallel())
    {
        Scratch s(model);
        std::size_t local_bad = std::numeric_limits<std::size_t>::max();
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i)
        {
            auto u = static_cast<std::size_t>(i);
            try
            {
                if (!update_one(model, ctx, x_in, u, dt, sqdt, noise, x_out, s))
                    local_bad = std::min(local_bad, u);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(m);
                if (u < error_index)
                {
                    error_index = u;
                    error = std::current_exception();
                }
            }
        }
#pragma omp critical(chaoskit_em_bad)
        bad = std::min(bad, local_bad);
    }
    if (error && error_index <= bad)
        std::rethrow_exception(error);
    if (bad != std::numeric_limits<std::size_t>::max())
        throw_nonfinite(bad);
}

double radial_double_sum(std::span<const double> x, std::span<const double> y,
                         std::size_t dim, const RadialKernel& k)
{
    const std::size_t nx = x.size() / dim;
    const std::size_t ny = y.size() / dim;
    std::vector<double> rows(nx, 0.0);
    const auto count = static_cast<std::ptrdiff_t>(nx);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (nx * ny > 4096 && !omp_in_parallel())
    for (std::ptrdiff_t i = 0; i < count; ++i)
    {
        double acc = 0;
        const double* xi = x.data() + i * dim;
        for (std::size_t j = 0; j < ny; ++j)
        {
            const double* yj = y.data() + j * dim;
            double r2 = 0;
            for (std::size_t c = 0; c < dim; ++c)
            {
                double dlt = xi[c] - yj[c];
                r2 += dlt * dlt;
            }
            acc += k(std::sqrt(r2));
        }
        rows[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0;
    for (double r : rows)
        total += r;
    return total;
}

namespace serial
{
void em_update(const DiffusionModel& model, const MeasureContext& ctx,
               std::span<const double> x_in, std::size_t n, double dt,
               std::span<const double> noise, std::span<double> x_out)
{
    const double sqdt = std::sqrt(dt);
    Scratch s(model);
    for (std::size_t i = 0; i < n; ++i)
        if (!update_one(model, ctx, x_in, i, dt, sqdt, noise, x_out, s))
            throw_nonfinite(i);
}

double radial_double_sum(std::span<const double> x, std::span<const double> y,
                         std::size_t dim, const RadialKernel& k)
{
    const std::size_t nx = x.size() / dim;
    const std::size_t ny = y.size() / dim;
    double total = 0;
    for (std::size_t i = 0; i < nx; ++i)
    {
        double acc = 0;
        for (std::size_t j = 0; j < ny; ++j)
        {
            double r2 = 0;
            for (std::size_t c = 0; c < dim; ++c)
            {
                double dlt = x[i * dim + c] - y[j * dim + c];
                r2 += dlt * dlt;
            }
            acc += k(std::sqrt(r2));
        }
        total += acc;
    }
    return total;
}
}  // namespace serial

}  // namespace chaoskit::kernels
