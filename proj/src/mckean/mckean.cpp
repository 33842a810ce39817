// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/mckean/mckean.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/kernels/kernels.hpp"
#include "chaoskit/metrics/metrics.hpp"
#include "system.hpp"

namespace chaoskit::mckean
{
namespace
{
MeasureContext context_of(const DiffusionModel& model, const MeasureView& view,
                          std::vector<double>& summary)
{
    MeasureContext ctx;
    if (model.summarize)
    {
        model.summarize(view, summary);
        ctx.summary = summary;
    }
    if (model.needs_atoms)
        ctx.atoms = view;
    return ctx;
}

bool record_step(std::size_t k, std::size_t steps, std::size_t stride)
{
    return k == 0 || k == steps || (stride > 0 && k % stride == 0);
}

double point_gap(std::span<const double> x, std::span<const double> y, Domain domain, int p)
{
    const double d = ground_distance(x, y, domain);
    return p == 1 ? d : d * d;
}
}  // namespace

ParticleState em_step(const ParticleState& state, const DiffusionModel& model, double dt,
                      std::span<const double> noise)
{
    require(dt > 0, "em_step: dt must be positive");
    require(state.dim == model.dim, "em_step: state dimension does not match the model");
    require(noise.size() == state.n * state.dim, "em_step: noise must hold N*d normals");
    std::vector<double> summary;
    auto ctx = context_of(model, state.view(), summary);
    ParticleState out(state.t + dt, state.n, state.dim, state.domain);
    kernels::em_update(model, ctx, state.xs, state.n, dt, noise, out.xs);
    return out;
}

void DiffusionRun::validate() const
{
    require(n >= 1, "diffusion run: N must be >= 1");
    require(dt > 0, "diffusion run: dt must be positive");
    (void)step_count(t_final, dt);
    require(labels.empty() || labels.size() == n, "diffusion run: one label per particle");
    require(initial.has_value() || init != nullptr, "diffusion run: no initial law");
}

TrajectoryBundle simulate_particles(const DiffusionRun& run)
{
    run.validate();
    const std::size_t steps = step_count(run.t_final, run.dt);
    auto labels = run.labels.empty() ? detail::default_labels(run.n) : run.labels;
    detail::System sys(run.model, labels, run.root.split(run.replica), run.init,
                       run.initial ? &*run.initial : nullptr);
    TrajectoryBundle bundle;
    bundle.times.push_back(0.0);
    bundle.states.push_back(sys.external_state(0.0));
    std::vector<double> xi;
    for (std::size_t k = 1; k <= steps; ++k)
    {
        sys.draw_noise(xi);
        auto ctx = sys.own_context();
        sys.advance(ctx, run.dt, xi);
        if (record_step(k, steps, std::max<std::size_t>(run.stride, 1)))
        {
            const double t = static_cast<double>(k) * run.dt;
            bundle.times.push_back(t);
            bundle.states.push_back(sys.external_state(t));
        }
    }
    return bundle;
}

//---------------------------------------------------------------------------//
MeasureContext FrozenFlow::context(std::size_t step) const
{
    require(step < summaries.size(), "frozen flow: step outside the grid");
    MeasureContext ctx;
    ctx.summary = summaries[step];
    if (!atoms.empty())
        ctx.atoms = MeasureView{atoms[step], m, dim, domain};
    return ctx;
}

namespace
{
struct Iterate
{
    FrozenFlow flow;
    std::vector<double> final_points;
    TrajectoryBundle bundle;
};

//! M copies with labels 0..M-1 under `rng`, driven by `driver` or, when
//! null, by their own empirical flow.
Iterate run_iterate(const DiffusionModel& model, const PointSampler& init, std::size_t m,
                    std::size_t steps, double dt, const RngStream& rng, const FrozenFlow* driver,
                    bool keep_bundle, std::size_t stride)
{
    detail::System sys(model, detail::default_labels(m), rng, init, nullptr);
    Iterate it;
    FrozenFlow& flow = it.flow;
    flow.dt = dt;
    flow.steps = steps;
    flow.dim = model.dim;
    flow.m = m;
    flow.domain = model.domain;
    flow.summaries.resize(steps + 1);
    if (model.needs_atoms)
        flow.atoms.resize(steps + 1);
    std::vector<double> xi;
    for (std::size_t k = 0; k <= steps; ++k)
    {
        if (model.summarize)
            model.summarize(sys.view(), flow.summaries[k]);
        if (model.needs_atoms)
            flow.atoms[k].assign(sys.points().begin(), sys.points().end());
        if (keep_bundle && record_step(k, steps, stride))
        {
            const double t = static_cast<double>(k) * dt;
            it.bundle.times.push_back(t);
            it.bundle.states.push_back(sys.external_state(t));
        }
        if (k == steps)
            break;
        sys.draw_noise(xi);
        sys.advance(driver ? driver->context(k) : flow.context(k), dt, xi);
    }
    it.final_points.assign(sys.points().begin(), sys.points().end());
    return it;
}
}  // namespace

ReferenceResult nonlinear_reference(const DiffusionModel& model, const PointSampler& init,
                                    std::size_t m, double t_final, double dt,
                                    std::size_t picard_iters, const RngStream& rng,
                                    const ReferenceOptions& options)
{
    require(m >= 2, "nonlinear_reference: need M >= 2 copies");
    require(picard_iters >= 1, "nonlinear_reference: need at least one Picard iteration");
    require(dt > 0, "nonlinear_reference: dt must be positive");
    const std::size_t steps = step_count(t_final, dt);

    // Two ensembles with independent noise, each driven by the other's
    // previous flow. With a single ensemble and shared noise the M-particle
    // system would already be a fixed point of the frozen-flow map.
    const RngStream main_rng = rng;
    const RngStream twin_rng = rng.split(purpose::reference);
    const bool measure_free = !model.measure_dependent;
    ReferenceResult result;
    Iterate cur = run_iterate(model, init, m, steps, dt, main_rng, nullptr, picard_iters == 0,
                              options.stride);
    Iterate twin;
    if (!measure_free)
        twin = run_iterate(model, init, m, steps, dt, twin_rng, nullptr, false, options.stride);
    for (std::size_t iter = 1; iter <= picard_iters; ++iter)
    {
        const bool last = iter == picard_iters;
        const FrozenFlow& drive_main = measure_free ? cur.flow : twin.flow;
        Iterate next = run_iterate(model, init, m, steps, dt, main_rng, &drive_main, last,
                                   options.stride);
        Iterate next_twin;
        if (!measure_free && !last)
            next_twin = run_iterate(model, init, m, steps, dt, twin_rng, &cur.flow, false,
                                    options.stride);
        MeasureView a{next.final_points, m, model.dim, model.domain};
        MeasureView b{cur.final_points, m, model.dim, model.domain};
        result.increments.push_back(metrics::w1_auto(a, b));
        cur = std::move(next);
        if (!measure_free && !last)
            twin = std::move(next_twin);
    }
    result.bundle = std::move(cur.bundle);
    result.flow = std::move(cur.flow);
    result.converged = result.increments.back() <= options.tol;
    return result;
}

//---------------------------------------------------------------------------//
CouplingReport synchronous_coupling(const DiffusionModel& model, std::size_t n,
                                    const FrozenFlow& reference, double t_final, double dt,
                                    const PointSampler& init, const RngStream& rng,
                                    std::size_t replicas, int p)
{
    require(n >= 1 && replicas >= 1, "synchronous_coupling: need N >= 1 and at least one replica");
    require(p == 1 || p == 2, "synchronous_coupling: p must be 1 or 2");
    const std::size_t steps = step_count(t_final, dt);
    require(std::abs(reference.dt - dt) <= 1e-12 * dt && reference.steps == steps
                && reference.summaries.size() == steps + 1,
            "synchronous_coupling: reference grid does not match (T, dt)");
    require(reference.dim == model.dim && reference.domain == model.domain,
            "synchronous_coupling: reference dimension/domain mismatch");
    require(!model.needs_atoms || reference.atoms.size() == steps + 1,
            "synchronous_coupling: model needs atoms but the reference stored none");

    std::vector<double> pathwise(replicas);
    std::vector<std::vector<double>> curves(replicas, std::vector<double>(steps + 1, 0.0));
    const auto labels = detail::default_labels(n);
    parallel_for(replicas, [&](std::size_t r) {
        const RngStream root = rng.split(r);
        detail::System particles(model, labels, root, init, nullptr);
        detail::System copies(model, labels, root, init, nullptr);
        std::vector<double> sup(n, 0.0), xi;
        auto& curve = curves[r];
        for (std::size_t k = 1; k <= steps; ++k)
        {
            particles.draw_noise(xi);
            auto ctx = particles.own_context();
            particles.advance(ctx, dt, xi);
            copies.advance(reference.context(k - 1), dt, xi);
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i)
            {
                auto xi_p = particles.points().subspan(i * model.dim, model.dim);
                auto xi_c = copies.points().subspan(i * model.dim, model.dim);
                const double g = point_gap(xi_p, xi_c, model.domain, p);
                sup[i] = std::max(sup[i], g);
                acc += g;
            }
            curve[k] = acc / static_cast<double>(n);
        }
        double s = 0;
        for (double v : sup)
            s += v;
        pathwise[r] = s / static_cast<double>(n);
    });

    CouplingReport rep;
    rep.n = n;
    rep.t_final = t_final;
    rep.dt = dt;
    rep.p = p;
    rep.seed = rng.seed();
    rep.pointwise_curve.assign(steps + 1, 0.0);
    for (std::size_t r = 0; r < replicas; ++r)
        for (std::size_t k = 0; k <= steps; ++k)
            rep.pointwise_curve[k] += curves[r][k] / static_cast<double>(replicas);
    rep.pathwise = std::move(pathwise);
    rep.pathwise_eps = mean(rep.pathwise);
    rep.pointwise_eps = *std::max_element(rep.pointwise_curve.begin(), rep.pointwise_curve.end());
    rep.ci = bootstrap_mean_ci(rep.pathwise, rng.split(purpose::bootstrap));
    return rep;
}

//---------------------------------------------------------------------------//
ReflectionConfig ReflectionConfig::defaults(double sigma, double dt, double a)
{
    require(a > 0, "ReflectionConfig: warp rate must be positive");
    ReflectionConfig c;
    c.kappa = [](double) { return 0.0; };
    c.f = [a](double r) { return 1.0 - std::exp(-a * r); };
    c.c = 0.0;
    c.delta_couple = 2.0 * sigma * std::sqrt(dt);
    return c;
}

void ReflectionConfig::validate(double r_max) const
{
    require(f != nullptr, "ReflectionConfig: f is missing");
    require(delta_couple > 0, "ReflectionConfig: delta_couple must be positive");
    require(std::abs(f(0.0)) <= 1e-14, "ReflectionConfig: f(0) must be 0");
    const std::size_t grid = 1000;
    const double h = r_max / static_cast<double>(grid);
    double prev = f(0.0), prev_inc = INFINITY;
    for (std::size_t i = 1; i <= grid; ++i)
    {
        const double v = f(h * static_cast<double>(i));
        const double inc = v - prev;
        require(inc > 0, "ReflectionConfig: f must be increasing");
        require(inc <= prev_inc + 1e-12, "ReflectionConfig: f must be concave");
        prev = v;
        prev_inc = inc;
    }
}

ReflectionResult reflection_coupling(const DiffusionModel& model, std::size_t n, double t_final,
                                     double dt, const ReflectionConfig& config,
                                     const PointSampler& init_x, const PointSampler& init_y,
                                     const RngStream& rng, std::size_t stride)
{
    require(model.scalar_sigma.has_value(), "reflection_coupling: sigma must be a constant scalar");
    require(config.f != nullptr && config.delta_couple > 0, "reflection_coupling: invalid config");
    const std::size_t steps = step_count(t_final, dt);
    const std::size_t d = model.dim;
    const auto labels = detail::default_labels(n);
    detail::System xs(model, labels, rng.split(0), init_x, nullptr);
    detail::System ys(model, labels, rng.split(1), init_y, nullptr);
    std::vector<char> merged(n, 0);
    std::vector<double> diff(d);

    auto distance = [&](std::size_t i) {
        return ground_distance(xs.points().subspan(i * d, d), ys.points().subspan(i * d, d),
                               model.domain);
    };
    ReflectionResult out;
    auto merge_and_record = [&](std::size_t k) {
        double fsum = 0;
        std::size_t coupled = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!merged[i] && distance(i) < config.delta_couple)
                merged[i] = 1;
            if (merged[i])
            {
                auto src = xs.points().subspan(i * d, d);
                std::copy(src.begin(), src.end(), ys.points().begin() + static_cast<std::ptrdiff_t>(i * d));
                ++coupled;
            }
            else
            {
                fsum += config.f(distance(i));
            }
        }
        if (record_step(k, steps, std::max<std::size_t>(stride, 1)))
        {
            out.times.push_back(static_cast<double>(k) * dt);
            out.mean_f.push_back(fsum / static_cast<double>(n));
            out.coupled_fraction.push_back(static_cast<double>(coupled) / static_cast<double>(n));
        }
    };

    merge_and_record(0);
    std::vector<double> xi, eta(n * d);
    for (std::size_t k = 1; k <= steps; ++k)
    {
        xs.draw_noise(xi);
        for (std::size_t i = 0; i < n; ++i)
        {
            auto x = xs.points().subspan(i * d, d);
            auto y = ys.points().subspan(i * d, d);
            auto z = std::span<const double>(xi).subspan(i * d, d);
            double norm2 = 0;
            for (std::size_t a = 0; a < d; ++a)
            {
                diff[a] = model.domain == Domain::torus ? wrapped_diff(x[a], y[a]) : x[a] - y[a];
                norm2 += diff[a] * diff[a];
            }
            double dot = 0;
            if (!merged[i] && norm2 > 0)
                for (std::size_t a = 0; a < d; ++a)
                    dot += diff[a] * z[a] / norm2;
            for (std::size_t a = 0; a < d; ++a)
                eta[i * d + a] = z[a] - 2.0 * dot * diff[a];
        }
        auto cx = xs.own_context();
        auto cy = ys.own_context();
        xs.advance(cx, dt, xi);
        ys.advance(cy, dt, eta);
        merge_and_record(k);
    }
    return out;
}

}  // namespace chaoskit::mckean
