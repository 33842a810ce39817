// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/stats.hpp"
#include "chaoskit/jumps/jumps.hpp"
#include "chaoskit/jumps/models.hpp"
#include "chaoskit/mckean/models.hpp"
#include "support/helpers.hpp"

using namespace chaoskit;
using namespace chaoskit::jumps;

namespace
{
MeanFieldJumpModel constant_rate(double lambda, double bound)
{
    MeanFieldJumpModel m;
    m.name = "constant";
    m.dim = 1;
    m.measure_dependent = false;
    m.needs_atoms = false;
    m.rate = [lambda](auto, auto&) { return lambda; };
    m.rate_bound = bound;
    m.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(r.normal()); };
    m.jump = [](std::span<const double> x, auto&, std::span<const double> th, std::span<double> out) {
        out[0] = x[0] + th[0];
    };
    return m;
}

MeanFieldJumpModel decay_flow()
{
    auto m = constant_rate(0.0, 1.0);
    m.flow = [](std::span<const double> x, std::span<double> v) { v[0] = -x[0]; };
    m.flow_lipschitz = 1;
    return m;
}

PointSampler fixed_point(double v)
{
    return [v](RngStream&, std::span<double> out) { std::fill(out.begin(), out.end(), v); };
}

PointSampler uniform_state(std::size_t m)
{
    return [m](RngStream& r, std::span<double> out) { out[0] = static_cast<double>(r.below(m)); };
}

std::vector<double> histogram(const ParticleState& s, std::size_t m)
{
    std::vector<double> h(m, 0.0);
    for (double x : s.xs)
        h[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(s.n);
    return h;
}

JumpRun basic_run(MeanFieldJumpModel model, std::size_t n, double t, PointSampler init)
{
    JumpRun run;
    run.model = std::move(model);
    run.n = n;
    run.t_final = t;
    run.root = RngStream(2024);
    run.init = std::move(init);
    return run;
}

//! Model whose jump law is Uniform[0, 1 + h * s] with s the measure summary.
MeanFieldJumpModel stretched_uniform(double h)
{
    MeanFieldJumpModel m = constant_rate(1.0, 1.0);
    m.measure_dependent = true;
    m.summarize = [](const MeasureView&, std::vector<double>& out) { out.assign(1, 0.0); };
    m.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(r.uniform()); };
    m.jump = [h](auto, const MeasureContext& ctx, std::span<const double> th, std::span<double> out) {
        out[0] = th[0] * (1 + h * ctx.summary[0]);
    };
    return m;
}

JumpFlow constant_flow(double summary, double t, double dt)
{
    JumpFlow f;
    f.dt = dt;
    f.steps = step_count(t, dt);
    f.dim = 1;
    f.m = 1;
    f.summaries.assign(f.steps + 1, std::vector<double>{summary});
    return f;
}
}  // namespace

TEST_SUITE("jumps")
{
TEST_CASE("zero rate never accepts")
{
    auto model = constant_rate(0.0, 2.0);
    RngStream clock(1);
    for (int i = 0; i < 1000; ++i)
    {
        auto c = thinning_next_event(5, model.rate_bound, clock);
        CHECK(c.index < 5);
        CHECK_FALSE(thinning_accept(model, std::vector<double>{0.0}, {}, c.u));
    }
    auto res = pdmp_simulate(basic_run(model, 5, 10.0, fixed_point(1.5)));
    for (const auto& e : res.events)
        CHECK_FALSE(e.accepted);
    CHECK(res.bundle.final().xs == std::vector<double>(5, 1.5));
}

TEST_CASE("rate above the bound is a hard error")
{
    auto model = constant_rate(3.0, 2.0);
    CHECK_THROWS_AS(thinning_accept(model, std::vector<double>{0.25}, {}, 0.5), BoundViolation);
    CHECK_THROWS_AS(pdmp_simulate(basic_run(model, 3, 1.0, fixed_point(0))), BoundViolation);
}

TEST_CASE("full rate gives exponential inter-event times")
{
    const double lambda = 2.5;
    auto run = basic_run(constant_rate(lambda, lambda), 1, 4200.0, fixed_point(0));
    auto res = pdmp_simulate(run);
    std::vector<double> gaps;
    double last = 0;
    for (const auto& e : res.events)
    {
        CHECK(e.accepted);
        gaps.push_back(e.time - last);
        last = e.time;
    }
    REQUIRE(gaps.size() >= 10000);
    gaps.resize(10000);
    const double d = testing::ks_statistic(gaps, [&](double x) { return 1 - std::exp(-lambda * x); });
    CHECK(d < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("superposed rate of four particles")
{
    const double lambda = 1.5, t = 20000.0;
    auto run = basic_run(constant_rate(lambda, lambda), 4, t, fixed_point(0));
    run.keep_events = true;
    auto res = pdmp_simulate(run);
    const double rate = static_cast<double>(res.events.size()) / t;
    CHECK(std::abs(rate / (4 * lambda) - 1) < 0.02);
}

TEST_CASE("half rate accepts half the candidates")
{
    auto run = basic_run(constant_rate(0.5, 1.0), 3, 5000.0, fixed_point(0));
    auto res = pdmp_simulate(run);
    double acc = 0;
    for (const auto& e : res.events)
        acc += e.accepted;
    const double n = static_cast<double>(res.events.size());
    CHECK(std::abs(acc / n - 0.5) <= 3 * std::sqrt(0.25 / n));
}

TEST_CASE("event log is sorted and inside the horizon")
{
    auto run = basic_run(choose_leader_finite(3, mutation_kernel(3, 0.3)), 10, 2.0, uniform_state(3));
    auto res = pdmp_simulate(run);
    for (std::size_t k = 0; k < res.events.size(); ++k)
    {
        CHECK(res.events[k].time >= 0);
        CHECK(res.events[k].time <= 2.0);
        if (k)
            CHECK(res.events[k].time >= res.events[k - 1].time);
    }
    std::ostringstream os;
    write_event_log(os, res.events);
    CHECK(os.str().rfind("time,replica,index,accepted,collateral_flag,theta_digest\n", 0) == 0);
}

TEST_CASE("rk4 flow matches the exponential decay")
{
    std::vector<double> x{1.0};
    flow_point(decay_flow(), x, 2.0, 1e-2);
    CHECK(std::abs(x[0] - std::exp(-2.0)) < 1e-8);

    auto run = basic_run(decay_flow(), 2, 1.0, fixed_point(1.0));
    run.record_dt = 0.25;
    auto res = pdmp_simulate(run);
    REQUIRE(res.bundle.times.size() == 5);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(std::abs(res.bundle.states[k].xs[0] - std::exp(-res.bundle.times[k])) < 1e-8);

    auto still = basic_run(constant_rate(0.0, 0.0), 3, 4.0, fixed_point(-0.5));
    still.record_dt = 1.0;
    for (const auto& s : pdmp_simulate(still).bundle.states)
        CHECK(s.xs == std::vector<double>(3, -0.5));
}

TEST_CASE("parametric and pdmp forms agree")
{
    std::vector<JumpRun> runs{
        basic_run(choose_leader_finite(4, mutation_kernel(4, 0.2)), 12, 3.0, uniform_state(4)),
        basic_run(choose_leader_smooth(0.3, 0.5), 9, 2.0, mckean::gaussian_point(0, 1)),
        basic_run(bgk_model(1, 2.0, 1.0, 0.0), 16, 1.5, [](RngStream& r, std::span<double> o) {
            o[0] = r.uniform();
            o[1] = r.normal();
        }),
    };
    for (auto& run : runs)
    {
        run.record_dt = 0.5;
        auto a = pdmp_simulate(run);
        auto b = parametric_jump_simulate(run);
        REQUIRE(a.bundle.states.size() == b.bundle.states.size());
        for (std::size_t k = 0; k < a.bundle.states.size(); ++k)
            CHECK(a.bundle.states[k].xs == b.bundle.states[k].xs);
        CHECK(a.events.size() == b.events.size());
    }
}

TEST_CASE("zero collateral reproduces the plain simulation")
{
    auto model = choose_leader_smooth(0.4, 1.0);
    model.collateral = [](auto, auto, auto&, auto, auto, std::span<double> out) { out[0] = 0; };
    auto run = basic_run(model, 11, 3.0, mckean::gaussian_point(0, 1));
    auto a = parametric_jump_simulate(run);
    auto b = simultaneous_jump_simulate(run);
    CHECK(a.bundle.final().xs == b.bundle.final().xs);
    CHECK_THROWS_AS(simultaneous_jump_simulate(basic_run(choose_leader_smooth(0.4, 0), 3, 1.0,
                                                         mckean::gaussian_point(0, 1))),
                    PreconditionError);
}

TEST_CASE("neuron potentials stay in the cone")
{
    auto run = basic_run(neuron_model(3.0, 0.7), 50, 5.0, [](RngStream& r, std::span<double> o) {
        o[0] = std::abs(r.normal());
    });
    run.record_dt = 0.1;
    auto res = simultaneous_jump_simulate(run);
    std::size_t fired = 0;
    for (const auto& e : res.events)
        fired += e.accepted;
    CHECK(fired > 0);
    for (const auto& s : res.bundle.states)
        for (double x : s.xs)
            CHECK(x >= 0);
}

TEST_CASE("collateral displacement is bounded by one over N")
{
    MeanFieldJumpModel m = constant_rate(1.0, 1.0);
    m.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(2 * r.uniform() - 1); };
    m.jump = [](std::span<const double> x, auto&, auto, std::span<double> out) { out[0] = x[0]; };
    m.collateral = [](auto, auto, auto&, std::span<const double> tx, auto, std::span<double> out) {
        out[0] = tx[0];
    };
    for (std::size_t n : {10u, 100u})
    {
        auto run = basic_run(m, n, 50.0, mckean::gaussian_point(0, 1));
        auto full = simultaneous_jump_simulate(run);
        REQUIRE(full.events.size() >= 2);
        run.t_final = 0.5 * (full.events[0].time + full.events[1].time);
        auto one = simultaneous_jump_simulate(run);
        REQUIRE(one.events.size() == 1);
        CHECK(one.events[0].collateral);
        const auto& x0 = one.bundle.states.front().xs;
        const auto& x1 = one.bundle.final().xs;
        double largest = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double dx = std::abs(x1[i] - x0[i]);
            CHECK(dx <= 1.0 / static_cast<double>(n));
            if (i == one.events[0].index)
                CHECK(dx == 0);
            largest = std::max(largest, dx);
        }
        CHECK(largest > 0);
    }
}

TEST_CASE("slot permutation commutes with the simulation")
{
    auto run = basic_run(choose_leader_smooth(0.3, 0.8), 8, 2.0, mckean::gaussian_point(0, 1));
    run.record_dt = 1.0;
    const std::vector<std::size_t> perm{3, 7, 0, 5, 1, 6, 2, 4};
    auto base = pdmp_simulate(run);
    JumpRun shuffled = run;
    shuffled.labels.resize(8);
    for (std::size_t i = 0; i < 8; ++i)
        shuffled.labels[i] = perm[i];
    shuffled.initial = permuted(base.bundle.states.front(), perm);
    auto other = pdmp_simulate(shuffled);
    for (std::size_t k = 0; k < base.bundle.states.size(); ++k)
        CHECK(permuted(base.bundle.states[k], perm).xs == other.bundle.states[k].xs);
}

TEST_CASE("neutral choose-the-leader keeps the mean histogram")
{
    const std::size_t m = 3, runs = 10000, n = 10;
    auto model = choose_leader_finite(m, mutation_kernel(m, 0.0));
    std::vector<std::vector<double>> drift(m, std::vector<double>(runs));
    for (std::size_t r = 0; r < runs; ++r)
    {
        auto run = basic_run(model, n, 1.0, uniform_state(m));
        run.replica = r;
        run.keep_events = false;
        auto res = pdmp_simulate(run);
        auto h0 = histogram(res.bundle.states.front(), m);
        auto h1 = histogram(res.bundle.final(), m);
        for (std::size_t s = 0; s < m; ++s)
            drift[s][r] = h1[s] - h0[s];
    }
    for (std::size_t s = 0; s < m; ++s)
    {
        const double se = std::sqrt(variance(drift[s]) / static_cast<double>(runs));
        CHECK(std::abs(mean(drift[s])) <= 3 * se);
    }
}

TEST_CASE("BGK keeps a uniform spatial density")
{
    JumpRun run = basic_run(bgk_model(1, 2.0, 1.0, 0.0), 2000, 2.0, [](RngStream& r, std::span<double> o) {
        o[0] = r.uniform();
        o[1] = 0.5 + r.normal();
    });
    run.keep_events = false;
    auto res = pdmp_simulate(run);
    const std::size_t bins = 20;
    std::vector<double> counts(bins, 0.0);
    const auto& s = res.bundle.final();
    for (std::size_t i = 0; i < s.n; ++i)
    {
        const double x = s.point(i)[0];
        REQUIRE(x >= 0);
        REQUIRE(x < 1);
        counts[static_cast<std::size_t>(x * bins)] += 1;
    }
    const double expected = 2000.0 / bins;
    double chi2 = 0;
    for (double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 43.82);
}

TEST_CASE("BGK jumps sample the local Maxwellian")
{
    auto model = bgk_model(2, 1.0, 4.0, 0.5);
    RngStream r(77);
    std::vector<double> atoms;
    double su[2] = {0, 0}, sq = 0;
    std::size_t local = 0;
    for (int j = 0; j < 400; ++j)
    {
        const double x = 4 * r.uniform(), y = 4 * r.uniform();
        const double vx = 1.0 + 0.7 * r.normal(), vy = -0.5 + 0.7 * r.normal();
        atoms.insert(atoms.end(), {x, y, vx, vy});
        const double dx = std::remainder(x - 0.1, 4.0), dy = std::remainder(y - 3.9, 4.0);
        if (dx * dx + dy * dy <= 0.25)
        {
            ++local;
            su[0] += vx;
            su[1] += vy;
            sq += vx * vx + vy * vy;
        }
    }
    REQUIRE(local >= 2);
    const double ux = su[0] / local, uy = su[1] / local;
    const double temp = (sq / local - ux * ux - uy * uy) / 2;
    MeasureContext ctx;
    ctx.atoms = MeasureView{atoms, 400, 4, Domain::kinetic};
    std::vector<double> x{0.1, 3.9, 0, 0}, out(4), th;
    std::vector<double> vs;
    const int draws = 20000;
    for (int k = 0; k < draws; ++k)
    {
        th.clear();
        model.sample_theta(r, th);
        model.jump(x, ctx, th, out);
        CHECK(out[0] == 0.1);
        vs.push_back(out[2]);
    }
    const double sd = std::sqrt(temp);
    CHECK(std::abs(mean(vs) - ux) <= 3 * sd / std::sqrt(double(draws)));
    CHECK(std::abs(variance(vs) / temp - 1) <= 3 * std::sqrt(2.0 / draws));
}

TEST_CASE("measure-free reference is a fixed point after one sweep")
{
    auto model = constant_rate(0.8, 1.0);
    auto ref = nonlinear_jump_reference(model, mckean::gaussian_point(0, 1), 500, 1.0, 2,
                                        RngStream(5));
    REQUIRE(ref.increments.size() == 2);
    CHECK(ref.increments[0] == 0);
    CHECK(ref.increments[1] == 0);
    CHECK(ref.converged);
}

TEST_CASE("choose-the-leader reference follows the limit equation")
{
    const std::size_t m = 3;
    const double eps = 0.6, t = 1.0;
    auto model = choose_leader_finite(m, mutation_kernel(m, eps));
    auto init = [](RngStream& r, std::span<double> o) { o[0] = r.uniform() < 0.8 ? 0.0 : 1.0; };
    auto ref = nonlinear_jump_reference(model, init, 3000, t, 3, RngStream(11));
    auto h = histogram(ref.bundle.final(), m);
    const double w = std::exp(-eps * t);
    const std::vector<double> f0{0.8, 0.2, 0.0};
    double tv = 0;
    for (std::size_t s = 0; s < m; ++s)
        tv += 0.5 * std::abs(h[s] - (w * f0[s] + (1 - w) / m));
    CHECK(tv <= 0.03);
}

TEST_CASE("collateral drift agrees with held-out Monte Carlo")
{
    auto model = neuron_model(2.0, 0.0);
    RngStream r(3);
    std::vector<double> atoms(128);
    for (auto& a : atoms)
        a = std::abs(r.normal());
    MeasureContext ctx;
    ctx.atoms = MeasureView{atoms, atoms.size(), 1, Domain::euclidean};
    std::vector<double> drift(1);
    RngStream dr(4);
    collateral_mean_drift(model, std::vector<double>{0.3}, ctx, dr, 128, drift);
    std::vector<double> rates;
    for (double a : atoms)
        rates.push_back(model.rate(std::vector<double>{a}, ctx));
    const double half = 1.96 * std::sqrt(variance(rates) / 128.0);
    std::vector<double> held;
    for (int k = 0; k < 200000; ++k)
        held.push_back(model.rate(std::vector<double>{std::abs(r.normal())}, ctx));
    CHECK(std::abs(drift[0] - mean(held)) <= 2 * (2 * half));
}

TEST_CASE("identical jump laws couple without a gap")
{
    auto model = stretched_uniform(0.5);
    auto rep = optimal_jump_coupling_1d(model, 20, constant_flow(0.0, 2.0, 0.1), 2.0,
                                        mckean::gaussian_point(0, 1), RngStream(9), 3);
    CHECK(rep.coupled_events > 0);
    CHECK(rep.solo_events == 0);
    CHECK(rep.mean_event_cost == 0);
    CHECK(rep.pathwise_eps == 0);
}

TEST_CASE("stretched uniform jump laws differ by h over two")
{
    const double h = 0.4;
    auto rep = optimal_jump_coupling_1d(stretched_uniform(h), 200, constant_flow(1.0, 2.0, 0.1), 2.0,
                                        mckean::gaussian_point(0, 1), RngStream(10), 4);
    REQUIRE(rep.coupled_events > 1000);
    CHECK(rep.mean_event_cost == doctest::Approx(h / 2).epsilon(0.05));
}

TEST_CASE("coupled clocks are shared exactly on joint acceptance")
{
    auto model = choose_leader_finite(3, mutation_kernel(3, 0.3));
    model.rate = [](std::span<const double> x, const MeasureContext& ctx) {
        return 0.5 + 0.5 * ctx.summary[static_cast<std::size_t>(x[0])];
    };
    JumpFlow flow = constant_flow(0.0, 2.0, 0.1);
    flow.summaries.assign(flow.steps + 1, std::vector<double>{0.2, 0.3, 0.5});
    auto rep = optimal_jump_coupling_1d(model, 30, flow, 2.0, uniform_state(3), RngStream(12), 1);
    std::size_t both = 0, one = 0;
    for (std::size_t k = 0; k < rep.clock_log.size(); ++k)
    {
        const auto& e = rep.clock_log[k];
        both += e.particle && e.copy;
        one += e.particle != e.copy;
        if (k)
            CHECK(e.time > rep.clock_log[k - 1].time);
    }
    CHECK(both == rep.coupled_events);
    CHECK(one == rep.solo_events);
    CHECK(one > 0);
    CHECK_THROWS_AS(optimal_jump_coupling_1d(bgk_model(1, 1, 1, 0), 5, flow, 2.0, uniform_state(3),
                                             RngStream(1), 1),
                    PreconditionError);
}

TEST_CASE("coupling error shrinks with N")
{
    auto model = choose_leader_finite(3, mutation_kernel(3, 0.5));
    auto init = [](RngStream& r, std::span<double> o) { o[0] = r.uniform() < 0.7 ? 0.0 : 2.0; };
    JumpReferenceOptions opt;
    opt.grid_dt = 0.05;
    auto ref = nonlinear_jump_reference(model, init, 20000, 1.0, 2, RngStream(21), opt);
    double previous = INFINITY;
    for (std::size_t n : {50u, 200u, 800u})
    {
        auto rep = optimal_jump_coupling_1d(model, n, ref.flow, 1.0, init, RngStream(22), 8);
        CHECK(rep.pathwise_eps < previous);
        previous = rep.pathwise_eps;
    }
}
}
