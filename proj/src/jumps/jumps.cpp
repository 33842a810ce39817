// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/jumps/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/metrics/metrics.hpp"
#include "system.hpp"

namespace chaoskit::jumps
{
namespace
{
std::vector<std::uint64_t> labels_for(std::size_t n, const std::vector<std::uint64_t>& given)
{
    if (!given.empty())
        return given;
    std::vector<std::uint64_t> l(n);
    std::iota(l.begin(), l.end(), std::uint64_t{0});
    return l;
}

std::string describe(std::span<const double> x)
{
    std::ostringstream os;
    os << "(";
    for (std::size_t a = 0; a < x.size(); ++a)
        os << (a ? ", " : "") << format_real(x[a]);
    os << ")";
    return os.str();
}

void sample_theta(const MeanFieldJumpModel& m, RngStream& rng, std::vector<double>& theta)
{
    theta.clear();
    if (m.sample_theta)
        m.sample_theta(rng, theta);
}

//! Grid of record times: 0, record_dt, ..., T (or just 0 and T).
std::vector<double> record_grid(double t_final, double record_dt)
{
    if (record_dt <= 0)
        return {0.0, t_final};
    const std::size_t k = step_count(t_final, record_dt);
    std::vector<double> g(k + 1);
    for (std::size_t i = 0; i <= k; ++i)
        g[i] = static_cast<double>(i) * record_dt;
    g.back() = t_final;
    return g;
}

enum class Collateral
{
    off,
    on
};

JumpResult run_engine(const JumpRun& run, Collateral mode)
{
    run.validate();
    const auto& model = run.model;
    if (mode == Collateral::on)
        require(model.collateral != nullptr, "simultaneous_jump_simulate: model declares no collateral");
    const auto labels = labels_for(run.n, run.labels);
    const RngStream root = run.root.split(run.replica);
    detail::JumpSystem sys(model, labels, root, run.init, run.initial ? &*run.initial : nullptr);
    RngStream clock = root.split(purpose::clock);
    const std::size_t n = sys.size(), d = sys.dim();

    JumpResult res;
    const auto grid = record_grid(run.t_final, run.record_dt);
    std::size_t next_record = 0;
    double t = 0;
    std::vector<double> theta, theta_j, out(d), delta;
    auto flush_records = [&](double until) {
        while (next_record < grid.size() && grid[next_record] <= until)
        {
            sys.flow_all(grid[next_record] - t, run.flow_step);
            t = grid[next_record];
            res.bundle.times.push_back(t);
            res.bundle.states.push_back(sys.external_state(t));
            ++next_record;
        }
    };
    flush_records(0.0);
    if (model.rate_bound > 0)
    {
        for (;;)
        {
            const Candidate c = thinning_next_event(n, model.rate_bound, clock);
            const double tc = t + c.dt;
            if (tc > run.t_final)
                break;
            flush_records(tc);
            sys.flow_all(tc - t, run.flow_step);
            t = tc;
            auto ctx = sys.own_context();
            const std::size_t k = c.index;
            JumpEvent ev;
            ev.time = t;
            ev.replica = run.replica;
            ev.index = sys.external(k);
            ev.accepted = thinning_accept(model, sys.point(k), ctx, c.u);
            if (ev.accepted)
            {
                sample_theta(model, sys.theta_stream(k), theta);
                ev.theta_digest = digest(theta);
                model.jump(sys.point(k), ctx, theta, out);
                if (mode == Collateral::on)
                {
                    ev.collateral = true;
                    delta.assign(n * d, 0.0);
                    for (std::size_t j = 0; j < n; ++j)
                    {
                        if (j == k)
                            continue;
                        sample_theta(model, sys.collateral_stream(j), theta_j);
                        model.collateral(sys.point(j), sys.point(k), ctx, theta_j, theta,
                                         std::span<double>(delta).subspan(j * d, d));
                    }
                    for (std::size_t j = 0; j < n; ++j)
                    {
                        if (j == k)
                            continue;
                        auto xj = sys.point(j);
                        for (std::size_t a = 0; a < d; ++a)
                            xj[a] += delta[j * d + a] / static_cast<double>(n);
                        sys.normalize(j);
                    }
                }
                std::copy(out.begin(), out.end(), sys.point(k).begin());
                sys.normalize(k);
                for (double v : sys.point(k))
                    if (!std::isfinite(v))
                        throw NumericalError("jump map produced a non-finite value at particle "
                                             + std::to_string(ev.index));
            }
            if (run.keep_events)
                res.events.push_back(ev);
        }
    }
    flush_records(run.t_final);
    return res;
}
}  // namespace

void write_event_log(std::ostream& os, const std::vector<JumpEvent>& events)
{
    os << "time,replica,index,accepted,collateral_flag,theta_digest\n";
    for (const auto& e : events)
        os << format_real(e.time) << ',' << e.replica << ',' << e.index << ',' << (e.accepted ? 1 : 0)
           << ',' << (e.collateral ? 1 : 0) << ',' << format_hex(e.theta_digest) << '\n';
}

Candidate thinning_next_event(std::size_t n, double rate_bound, RngStream& clock)
{
    require(n >= 1, "thinning: N must be >= 1");
    Candidate c;
    if (!(rate_bound > 0))
    {
        c.dt = std::numeric_limits<double>::infinity();
        return c;
    }
    c.dt = clock.exponential(static_cast<double>(n) * rate_bound);
    c.index = static_cast<std::size_t>(clock.below(n));
    c.u = clock.uniform();
    return c;
}

bool thinning_accept(const MeanFieldJumpModel& model, std::span<const double> x,
                     const MeasureContext& ctx, double u)
{
    const double lambda = model.rate(x, ctx);
    if (!(lambda >= 0) || !std::isfinite(lambda))
        throw NumericalError("jump rate is negative or non-finite at state " + describe(x));
    if (lambda > model.rate_bound * (1 + 1e-12))
        throw BoundViolation("jump rate " + format_real(lambda) + " exceeds the declared bound "
                             + format_real(model.rate_bound) + " at state " + describe(x));
    return u * model.rate_bound <= lambda;
}

void flow_point(const MeanFieldJumpModel& model, std::span<double> x, double t, double h)
{
    if (model.flow)
        detail::rk4(model.flow, x, t, h);
}

void JumpRun::validate() const
{
    require(n >= 1, "jump run: N must be >= 1");
    require(t_final >= 0 && std::isfinite(t_final), "jump run: T must be finite and >= 0");
    require(flow_step > 0, "jump run: flow step must be positive");
    require(labels.empty() || labels.size() == n, "jump run: one label per particle");
    require(initial.has_value() || init != nullptr, "jump run: no initial law");
}

JumpResult pdmp_simulate(const JumpRun& run) { return run_engine(run, Collateral::off); }

JumpResult parametric_jump_simulate(const JumpRun& run) { return run_engine(run, Collateral::off); }

JumpResult simultaneous_jump_simulate(const JumpRun& run) { return run_engine(run, Collateral::on); }

//---------------------------------------------------------------------------//
std::size_t JumpFlow::slot(double t) const
{
    require(dt > 0, "jump flow: empty grid");
    auto k = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
    return std::min(k, steps);
}

MeasureContext JumpFlow::context(double t) const
{
    const std::size_t k = slot(t);
    MeasureContext ctx;
    if (!summaries.empty())
        ctx.summary = summaries[k];
    if (!atoms.empty())
        ctx.atoms = MeasureView{atoms[k], m, dim, domain};
    return ctx;
}

void collateral_mean_drift(const MeanFieldJumpModel& model, std::span<const double> x,
                           const MeasureContext& ctx, RngStream& rng, std::size_t max_atoms,
                           std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    if (!model.collateral)
        return;
    require(ctx.atoms.n > 0, "collateral drift: the measure has no atoms");
    const std::size_t count = std::min(max_atoms, ctx.atoms.n);
    std::vector<double> theta_x, theta_z, tmp(out.size());
    for (std::size_t j = 0; j < count; ++j)
    {
        auto z = ctx.atoms.atom(j);
        const double lambda = model.rate(z, ctx);
        sample_theta(model, rng, theta_x);
        sample_theta(model, rng, theta_z);
        model.collateral(x, z, ctx, theta_x, theta_z, tmp);
        for (std::size_t a = 0; a < out.size(); ++a)
            out[a] += lambda * tmp[a];
    }
    for (auto& v : out)
        v /= static_cast<double>(count);
}

namespace
{
struct JumpIterate
{
    JumpFlow flow;
    std::vector<double> final_points;
    TrajectoryBundle bundle;
};

JumpIterate run_jump_iterate(const MeanFieldJumpModel& model, const PointSampler& init,
                             std::size_t m, double t_final, const RngStream& rng,
                             const JumpFlow* driver, bool keep_bundle,
                             const JumpReferenceOptions& opt)
{
    const std::size_t steps = step_count(t_final, opt.grid_dt);
    std::vector<std::uint64_t> labels(m);
    std::iota(labels.begin(), labels.end(), std::uint64_t{0});
    detail::JumpSystem sys(model, labels, rng, init, nullptr);
    RngStream clock = rng.split(purpose::clock);
    const std::size_t d = model.dim;

    JumpIterate it;
    JumpFlow& flow = it.flow;
    flow.dt = opt.grid_dt;
    flow.steps = steps;
    flow.dim = d;
    flow.m = m;
    flow.domain = model.domain;
    flow.summaries.resize(model.summarize ? steps + 1 : 0);
    flow.atoms.resize(model.needs_atoms || model.collateral ? steps + 1 : 0);
    auto snapshot = [&](std::size_t k) {
        if (model.summarize)
            model.summarize(sys.view(), flow.summaries[k]);
        if (!flow.atoms.empty())
            flow.atoms[k].assign(sys.points().begin(), sys.points().end());
        if (keep_bundle)
        {
            const double tk = static_cast<double>(k) * opt.grid_dt;
            it.bundle.times.push_back(tk);
            it.bundle.states.push_back(sys.external_state(tk));
        }
    };

    // Collateral mean-field drift, redrawn once per grid slot.
    const bool collateral_drift = driver && model.collateral;
    std::size_t drift_slot = 0;
    detail::Velocity velocity;
    if (collateral_drift)
    {
        velocity = [&](std::span<const double> x, std::span<double> v) {
            std::fill(v.begin(), v.end(), 0.0);
            if (model.flow)
                model.flow(x, v);
            std::vector<double> extra(d);
            RngStream r = rng.split(purpose::collateral).split(drift_slot);
            collateral_mean_drift(model, x, driver->context(static_cast<double>(drift_slot) * opt.grid_dt),
                                  r, opt.collateral_atoms, extra);
            for (std::size_t a = 0; a < d; ++a)
                v[a] += extra[a];
        };
    }

    double t = 0;
    std::size_t next_grid = 0;
    std::vector<double> theta, theta_j, out(d), delta;
    auto advance_to = [&](double target) {
        while (next_grid <= steps && static_cast<double>(next_grid) * opt.grid_dt <= target)
        {
            const double tg = static_cast<double>(next_grid) * opt.grid_dt;
            sys.flow_all(tg - t, opt.flow_step, velocity);
            t = tg;
            snapshot(next_grid);
            drift_slot = next_grid;
            ++next_grid;
        }
        sys.flow_all(target - t, opt.flow_step, velocity);
        t = target;
    };
    advance_to(0.0);
    if (model.rate_bound > 0)
    {
        for (;;)
        {
            const Candidate c = thinning_next_event(m, model.rate_bound, clock);
            if (t + c.dt > t_final)
                break;
            advance_to(t + c.dt);
            MeasureContext ctx = driver ? driver->context(t) : sys.own_context();
            const std::size_t k = c.index;
            if (!thinning_accept(model, sys.point(k), ctx, c.u))
                continue;
            sample_theta(model, sys.theta_stream(k), theta);
            model.jump(sys.point(k), ctx, theta, out);
            if (!driver && model.collateral)
            {
                delta.assign(m * d, 0.0);
                for (std::size_t j = 0; j < m; ++j)
                    if (j != k)
                    {
                        sample_theta(model, sys.collateral_stream(j), theta_j);
                        model.collateral(sys.point(j), sys.point(k), ctx, theta_j, theta,
                                         std::span<double>(delta).subspan(j * d, d));
                    }
                for (std::size_t j = 0; j < m; ++j)
                    if (j != k)
                    {
                        for (std::size_t a = 0; a < d; ++a)
                            sys.point(j)[a] += delta[j * d + a] / static_cast<double>(m);
                        sys.normalize(j);
                    }
            }
            std::copy(out.begin(), out.end(), sys.point(k).begin());
            sys.normalize(k);
        }
    }
    advance_to(t_final);
    it.final_points.assign(sys.points().begin(), sys.points().end());
    return it;
}
}  // namespace

JumpReferenceResult nonlinear_jump_reference(const MeanFieldJumpModel& model,
                                             const PointSampler& init, std::size_t m,
                                             double t_final, std::size_t picard_iters,
                                             const RngStream& rng,
                                             const JumpReferenceOptions& options)
{
    require(m >= 2, "nonlinear_jump_reference: need M >= 2 copies");
    require(picard_iters >= 1, "nonlinear_jump_reference: need at least one Picard iteration");
    require(options.grid_dt > 0 && options.flow_step > 0, "nonlinear_jump_reference: invalid grid");
    const RngStream twin_rng = rng.split(purpose::reference);
    const bool measure_free = !model.measure_dependent && !model.collateral;
    JumpReferenceResult result;
    JumpIterate cur = run_jump_iterate(model, init, m, t_final, rng, nullptr, false, options);
    JumpIterate twin;
    if (!measure_free)
        twin = run_jump_iterate(model, init, m, t_final, twin_rng, nullptr, false, options);
    for (std::size_t iter = 1; iter <= picard_iters; ++iter)
    {
        const bool last = iter == picard_iters;
        const JumpFlow& drive = measure_free ? cur.flow : twin.flow;
        JumpIterate next = run_jump_iterate(model, init, m, t_final, rng, &drive, last, options);
        JumpIterate next_twin;
        if (!measure_free && !last)
            next_twin = run_jump_iterate(model, init, m, t_final, twin_rng, &cur.flow, false, options);
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
double quantile_transfer(std::span<const double> particle_sorted, std::size_t rank)
{
    require(rank < particle_sorted.size(), "quantile_transfer: rank out of range");
    return particle_sorted[rank];
}

JumpCouplingReport optimal_jump_coupling_1d(const MeanFieldJumpModel& model, std::size_t n,
                                            const JumpFlow& reference, double t_final,
                                            const PointSampler& init, const RngStream& rng,
                                            std::size_t replicas,
                                            const JumpCouplingOptions& options)
{
    require(model.dim == 1, "optimal_jump_coupling_1d: d must be 1");
    require(n >= 1 && replicas >= 1, "optimal_jump_coupling_1d: need N >= 1 and one replica");
    require(options.samples >= 1, "optimal_jump_coupling_1d: Q must be >= 1");
    require(options.p == 1 || options.p == 2, "optimal_jump_coupling_1d: p must be 1 or 2");
    require(reference.dim == 1 && reference.dt > 0, "optimal_jump_coupling_1d: invalid reference");
    require(reference.steps == step_count(t_final, reference.dt),
            "optimal_jump_coupling_1d: reference grid does not cover [0, T]");
    const std::size_t steps = reference.steps;
    const std::size_t q = options.samples;
    const int p = options.p;

    struct ReplicaOut
    {
        double pathwise{0};
        std::vector<double> curve;
        double cost{0};
        std::size_t coupled{0};
        std::size_t solo{0};
        std::vector<JumpCouplingReport::ClockEntry> log;
    };
    std::vector<ReplicaOut> outs(replicas);
    std::vector<std::uint64_t> labels(n);
    std::iota(labels.begin(), labels.end(), std::uint64_t{0});

    parallel_for(replicas, [&](std::size_t r) {
        const RngStream root = rng.split(r);
        detail::JumpSystem part(model, labels, root, init, nullptr);
        detail::JumpSystem copy(model, labels, root, init, nullptr);
        RngStream clock = root.split(purpose::clock);
        ReplicaOut& o = outs[r];
        o.curve.assign(steps + 1, 0.0);
        std::vector<double> sup(n, 0.0), theta, ys_p(q), ys_c(q), out(1);
        std::vector<std::size_t> idx(q);
        double t = 0;
        std::size_t next_grid = 0;
        auto gap = [&](std::size_t k) {
            const double g = ground_distance(part.point(k), copy.point(k), model.domain);
            return p == 1 ? g : g * g;
        };
        auto track = [&]() {
            for (std::size_t k = 0; k < n; ++k)
                sup[k] = std::max(sup[k], gap(k));
        };
        auto advance_to = [&](double target) {
            while (next_grid <= steps && static_cast<double>(next_grid) * reference.dt <= target)
            {
                const double tg = static_cast<double>(next_grid) * reference.dt;
                part.flow_all(tg - t, options.flow_step);
                copy.flow_all(tg - t, options.flow_step);
                t = tg;
                double acc = 0;
                for (std::size_t k = 0; k < n; ++k)
                    acc += gap(k);
                o.curve[next_grid] = acc / static_cast<double>(n);
                track();
                ++next_grid;
            }
            part.flow_all(target - t, options.flow_step);
            copy.flow_all(target - t, options.flow_step);
            t = target;
        };
        advance_to(0.0);
        if (model.rate_bound > 0)
        {
            for (;;)
            {
                const Candidate c = thinning_next_event(n, model.rate_bound, clock);
                if (t + c.dt > t_final)
                    break;
                advance_to(t + c.dt);
                const std::size_t k = c.index;
                auto ctx_p = part.own_context();
                auto ctx_c = reference.context(t);
                const bool acc_p = thinning_accept(model, part.point(k), ctx_p, c.u);
                const bool acc_c = thinning_accept(model, copy.point(k), ctx_c, c.u);
                if (r == 0)
                    o.log.push_back({t, part.external(k), acc_p, acc_c});
                RngStream& ts = part.theta_stream(k);
                if (acc_p && acc_c)
                {
                    for (std::size_t s = 0; s < q; ++s)
                    {
                        theta.clear();
                        if (model.sample_theta)
                            model.sample_theta(ts, theta);
                        model.jump(part.point(k), ctx_p, theta, out);
                        ys_p[s] = out[0];
                        model.jump(copy.point(k), ctx_c, theta, out);
                        ys_c[s] = out[0];
                    }
                    std::sort(ys_p.begin(), ys_p.end());
                    std::sort(ys_c.begin(), ys_c.end());
                    const auto rank = static_cast<std::size_t>(ts.below(q));
                    copy.point(k)[0] = ys_c[rank];
                    part.point(k)[0] = quantile_transfer(ys_p, rank);
                    o.cost += std::abs(ys_p[rank] - ys_c[rank]);
                    ++o.coupled;
                }
                else if (acc_p || acc_c)
                {
                    theta.clear();
                    if (model.sample_theta)
                        model.sample_theta(ts, theta);
                    if (acc_p)
                    {
                        model.jump(part.point(k), ctx_p, theta, out);
                        part.point(k)[0] = out[0];
                    }
                    else
                    {
                        model.jump(copy.point(k), ctx_c, theta, out);
                        copy.point(k)[0] = out[0];
                    }
                    ++o.solo;
                }
                part.normalize(k);
                copy.normalize(k);
                sup[k] = std::max(sup[k], gap(k));
            }
        }
        advance_to(t_final);
        double s = 0;
        for (double v : sup)
            s += v;
        o.pathwise = s / static_cast<double>(n);
    });

    JumpCouplingReport rep;
    rep.n = n;
    rep.t_final = t_final;
    rep.p = p;
    rep.seed = rng.seed();
    rep.pointwise_curve.assign(steps + 1, 0.0);
    rep.curve_times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        rep.curve_times[k] = static_cast<double>(k) * reference.dt;
    double cost = 0;
    for (const auto& o : outs)
    {
        rep.pathwise.push_back(o.pathwise);
        for (std::size_t k = 0; k <= steps; ++k)
            rep.pointwise_curve[k] += o.curve[k] / static_cast<double>(replicas);
        cost += o.cost;
        rep.coupled_events += o.coupled;
        rep.solo_events += o.solo;
    }
    rep.clock_log = std::move(outs.front().log);
    rep.mean_event_cost = rep.coupled_events ? cost / static_cast<double>(rep.coupled_events) : 0.0;
    rep.pathwise_eps = mean(rep.pathwise);
    rep.pointwise_eps = *std::max_element(rep.pointwise_curve.begin(), rep.pointwise_curve.end());
    rep.ci = bootstrap_mean_ci(rep.pathwise, rng.split(purpose::bootstrap));
    return rep;
}

}  // namespace chaoskit::jumps
