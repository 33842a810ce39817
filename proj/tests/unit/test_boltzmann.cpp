// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/stats.hpp"
#include "support/helpers.hpp"

using namespace chaoskit;
using namespace chaoskit::boltzmann;

namespace
{
CollisionModel constant_kac(double lambda, double bound)
{
    auto m = kac_model(bound);
    m.rate = [lambda](auto, auto) { return lambda; };
    return m;
}

//! Two-point start at +-1 with a little spread.
void bimodal(RngStream& r, std::span<double> out)
{
    out[0] = (r.uniform() < 0.5 ? -1.0 : 1.0) + 0.1 * r.normal();
}

CollisionRun kac_run(CollisionModel model, std::size_t n, double t, std::uint64_t seed = 1)
{
    CollisionRun run;
    run.model = std::move(model);
    run.n = n;
    run.t_final = t;
    run.root = RngStream(seed);
    run.init = bimodal;
    run.keep_events = false;
    return run;
}

using Simulator = CollisionResult (*)(const CollisionRun&);

//! First coordinate of every particle at T, pooled over replicas.
std::vector<double> pooled(Simulator sim, CollisionRun run, std::size_t replicas,
                           std::size_t keep = 0)
{
    std::vector<double> out;
    for (std::size_t r = 0; r < replicas; ++r)
    {
        run.replica = r;
        const auto s = sim(run).bundle.final();
        const std::size_t m = keep ? keep : s.n;
        for (std::size_t i = 0; i < m; ++i)
            out.push_back(s.point(i)[0]);
    }
    return out;
}

//! Inverse CDF of (1 + a cos t) / (2 pi) on [0, 2 pi).
double tilted_angle(double u, double a)
{
    double lo = 0, hi = two_pi;
    for (int k = 0; k < 60; ++k)
    {
        const double mid = 0.5 * (lo + hi);
        ((mid + a * std::sin(mid)) / two_pi < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

//! Expected number of routes of the backward graph: birth chain on the
//! collected-set size s, integrated with RK4.
double birth_chain_routes(double n, double lt)
{
    const std::size_t cap = 600;
    std::vector<double> p(cap + 1, 0.0);
    p[1] = 1;
    auto deriv = [&](const std::vector<double>& q, std::vector<double>& dq, double& droutes) {
        std::fill(dq.begin(), dq.end(), 0.0);
        droutes = 0;
        for (std::size_t s = 1; s <= cap; ++s)
        {
            const double sd = static_cast<double>(s);
            const double birth = sd * (n - sd) / n;
            const double total = birth + sd * (sd - 1) / (2 * n);
            droutes += q[s] * total;
            dq[s] -= q[s] * birth;
            if (s < cap)
                dq[s + 1] += q[s] * birth;
        }
    };
    const int steps = 4000;
    const double h = lt / steps;
    double routes = 0;
    std::vector<double> k1(cap + 1), k2(cap + 1), k3(cap + 1), k4(cap + 1), y(cap + 1);
    double r1, r2, r3, r4;
    for (int i = 0; i < steps; ++i)
    {
        deriv(p, k1, r1);
        for (std::size_t s = 0; s <= cap; ++s)
            y[s] = p[s] + 0.5 * h * k1[s];
        deriv(y, k2, r2);
        for (std::size_t s = 0; s <= cap; ++s)
            y[s] = p[s] + 0.5 * h * k2[s];
        deriv(y, k3, r3);
        for (std::size_t s = 0; s <= cap; ++s)
            y[s] = p[s] + h * k3[s];
        deriv(y, k4, r4);
        for (std::size_t s = 0; s <= cap; ++s)
            p[s] += h / 6 * (k1[s] + 2 * k2[s] + 2 * k3[s] + k4[s]);
        routes += h / 6 * (r1 + 2 * r2 + 2 * r3 + r4);
    }
    return routes;
}
}  // namespace

TEST_SUITE("boltzmann")
{
TEST_CASE("kac rotation")
{
    auto [a, b] = kac_collision(0.3, -1.2, 0.0);
    CHECK(a == 0.3);
    CHECK(b == -1.2);
    auto [c, d] = kac_collision(0.3, -1.2, std::numbers::pi / 2);
    CHECK(c == doctest::Approx(-1.2).epsilon(1e-15));
    CHECK(std::abs(d + 0.3) < 1e-15);
    RngStream r(3);
    for (int k = 0; k < 1000; ++k)
    {
        const double v1 = r.normal(), v2 = r.normal(), th = two_pi * r.uniform();
        auto [x, y] = kac_collision(v1, v2, th);
        CHECK(std::abs(x * x + y * y - v1 * v1 - v2 * v2) <= 1e-14 * std::max(1.0, v1 * v1 + v2 * v2));
    }
}

TEST_CASE("sigma collisions conserve momentum and energy")
{
    RngStream r(4);
    std::vector<double> v(3), w(3), s(3), a(3), b(3);
    for (int k = 0; k < 1000; ++k)
    {
        for (std::size_t c = 0; c < 3; ++c)
        {
            v[c] = r.normal();
            w[c] = r.normal();
        }
        sample_sphere(r, s);
        maxwell_collision(v, w, s, a, b);
        double e0 = 0, e1 = 0;
        for (std::size_t c = 0; c < 3; ++c)
        {
            CHECK(std::abs(a[c] + b[c] - v[c] - w[c]) <= 4e-16 * (std::abs(v[c]) + std::abs(w[c]) + 1));
            e0 += v[c] * v[c] + w[c] * w[c];
            e1 += a[c] * a[c] + b[c] * b[c];
        }
        CHECK(std::abs(e1 - e0) <= 1e-12 * e0);
    }
    std::vector<double> v0{1, 2, 0}, w0{-1, 2, 3}, dir(3), a0(3), b0(3);
    double len = 0;
    for (std::size_t c = 0; c < 3; ++c)
        len += (v0[c] - w0[c]) * (v0[c] - w0[c]);
    for (std::size_t c = 0; c < 3; ++c)
        dir[c] = (v0[c] - w0[c]) / std::sqrt(len);
    maxwell_collision(v0, w0, dir, a0, b0);
    for (std::size_t c = 0; c < 3; ++c)
    {
        CHECK(a0[c] == doctest::Approx(v0[c]).epsilon(1e-14));
        CHECK(b0[c] == doctest::Approx(w0[c]).epsilon(1e-14));
    }
    std::vector<double> bad{1, 1, 0};
    CHECK_THROWS_AS(maxwell_collision(v0, w0, bad, a0, b0), PreconditionError);
}

TEST_CASE("cross sections")
{
    std::vector<double> v{0.5, -1.0}, same{0.5, -1.0}, w{0.5, 1.0};
    CHECK(cross_section_rate(CrossSection::hard_sphere, v, same) == 0);
    CHECK(cross_section_rate(CrossSection::hard_sphere, v, w) == doctest::Approx(2.0));
    RngStream r(5);
    for (int k = 0; k < 100; ++k)
    {
        std::vector<double> a{r.normal(), r.normal()}, b{r.normal(), r.normal()};
        CHECK(cross_section_rate(CrossSection::maxwell_cutoff, a, b, 0.7) == 0.7);
    }
    auto hs = maxwell_model(2, CrossSection::hard_sphere, 3.0);
    CHECK(hs.rate_bound == doctest::Approx(2 * 3.0 * std::sqrt(2.0)));
    CHECK_THROWS_AS(maxwell_model(2, CrossSection::hard_sphere, 0.0), PreconditionError);
    CHECK_THROWS_AS(mollified_model(1, 0.0, CrossSection::maxwell_cutoff), PreconditionError);
    auto mol = mollified_model(1, 0.5, CrossSection::maxwell_cutoff);
    CHECK(mol.rate(std::vector<double>{0, 1}, std::vector<double>{0.6, -1}) == 0);
    CHECK(mol.rate(std::vector<double>{0, 1}, std::vector<double>{0.0, -1}) == 1);

    auto box = [](RngStream& rr, std::span<double> o) {
        for (auto& x : o)
            x = 2 * rr.uniform() - 1;
    };
    CHECK_NOTHROW(validate_collision_model(kac_model(), box, RngStream(1)));
    CHECK_NOTHROW(validate_collision_model(maxwell_model(2, CrossSection::hard_sphere, 1.0), box,
                                           RngStream(2)));
    CHECK_NOTHROW(validate_collision_model(mol, box, RngStream(3)));
}

TEST_CASE("zero rate gives no collisions")
{
    auto run = kac_run(constant_kac(0.0, 1.0), 10, 5.0);
    run.keep_events = true;
    for (Simulator sim : {&uniform_clock_simulate, &nanbu_simulate})
    {
        auto res = sim(run);
        CHECK(res.accepted == 0);
        CHECK(res.candidates > 0);
        CHECK(res.bundle.final().xs == res.bundle.states.front().xs);
    }
    CHECK(pair_clock_simulate(run).accepted == 0);
    CHECK_THROWS_AS(uniform_clock_simulate(kac_run(constant_kac(2.0, 1.0), 4, 1.0)), BoundViolation);
}

TEST_CASE("two particles collide at the Poisson mean")
{
    const double lambda = 2.0, t = 3.0;
    const std::size_t reps = 4000;
    std::vector<double> counts;
    for (std::size_t r = 0; r < reps; ++r)
    {
        auto run = kac_run(constant_kac(lambda, lambda), 2, t);
        run.replica = r;
        counts.push_back(static_cast<double>(uniform_clock_simulate(run).accepted));
    }
    const double expect = lambda * t / 2;
    CHECK(std::abs(mean(counts) - expect) <= 4 * std::sqrt(expect / reps));
}

TEST_CASE("kac energy is conserved over many collisions")
{
    auto run = kac_run(kac_model(1.0), 100, 2100.0);
    auto res = uniform_clock_simulate(run);
    REQUIRE(res.accepted >= 100000);
    double e0 = 0, e1 = 0;
    for (double x : res.bundle.states.front().xs)
        e0 += x * x;
    for (double x : res.bundle.final().xs)
        e1 += x * x;
    CHECK(std::abs(e1 / e0 - 1) <= 1e-12);
}

TEST_CASE("pair clocks give exponential waiting times")
{
    const double lambda = 3.0;
    auto run = kac_run(constant_kac(lambda, lambda), 2, 14000.0);
    run.keep_events = true;
    auto res = pair_clock_simulate(run);
    std::vector<double> gaps;
    double last = 0;
    for (const auto& e : res.events)
    {
        CHECK(e.i == 0);
        CHECK(e.j == 1);
        CHECK_FALSE(e.fictitious);
        gaps.push_back(e.time - last);
        last = e.time;
    }
    REQUIRE(gaps.size() >= 10000);
    const double rate = lambda / 2;
    const double d = testing::ks_statistic(gaps, [&](double x) { return 1 - std::exp(-rate * x); });
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(gaps.size())));
}

TEST_CASE("pair clocks and the uniform clock agree in law")
{
    const std::size_t reps = 3000;
    auto run = kac_run(kac_model(1.0), 8, 1.0, 10);
    auto a = pooled(&uniform_clock_simulate, run, reps, 1);
    auto b = pooled(&pair_clock_simulate, run, reps, 1);
    run.root = RngStream(11);
    auto a2 = pooled(&uniform_clock_simulate, run, reps, 1);
    auto b2 = pooled(&pair_clock_simulate, run, reps, 1);
    const double floor = std::max(testing::w1_samples(a, a2), testing::w1_samples(b, b2));
    CHECK(testing::w1_samples(a, b) <= 3 * floor);
}

TEST_CASE("nanbu updates exactly one particle per collision")
{
    auto run = kac_run(kac_model(1.0), 6, 30.0);
    run.keep_events = true;
    auto full = nanbu_simulate(run);
    std::vector<double> times;
    for (const auto& e : full.events)
        if (!e.fictitious)
            times.push_back(e.time);
    REQUIRE(times.size() >= 2);
    run.t_final = 0.5 * (times[0] + times[1]);
    auto one = nanbu_simulate(run);
    REQUIRE(one.accepted == 1);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 6; ++i)
        changed += one.bundle.final().xs[i] != one.bundle.states.front().xs[i];
    CHECK(changed == 1);
}

TEST_CASE("nanbu at twice the rate matches the pair model")
{
    const double lambda = 1.0;
    auto pair_run = kac_run(kac_model(lambda), 2000, 1.0, 20);
    auto nanbu_run = kac_run(kac_model(2 * lambda), 2000, 1.0, 21);
    auto a = pooled(&uniform_clock_simulate, pair_run, 5);
    auto b = pooled(&nanbu_simulate, nanbu_run, 5);
    CHECK(testing::w1_samples(a, b) <= 0.05);

    std::vector<double> pc, nc;
    for (std::size_t r = 0; r < 20; ++r)
    {
        auto p = kac_run(kac_model(lambda), 50, 2.0, 30);
        auto q = kac_run(kac_model(2 * lambda), 50, 2.0, 31);
        p.replica = q.replica = r;
        pc.push_back(static_cast<double>(uniform_clock_simulate(p).accepted));
        nc.push_back(static_cast<double>(nanbu_simulate(q).accepted));
    }
    const double expect = lambda * 49 * 2.0 / 2;
    CHECK(std::abs(mean(pc) - expect) <= 4 * std::sqrt(expect / 20));
    CHECK(std::abs(mean(nc) - 2 * expect) <= 4 * std::sqrt(2 * expect / 20));
}

TEST_CASE("every simulator commutes with relabeling")
{
    const std::vector<std::size_t> perm{3, 7, 0, 5, 1, 6, 2, 4};
    for (Simulator sim : {&uniform_clock_simulate, &pair_clock_simulate, &nanbu_simulate})
    {
        auto run = kac_run(kac_model(1.0), 8, 2.0);
        run.record_dt = 0.5;
        auto base = sim(run);
        CollisionRun shuffled = run;
        shuffled.labels.assign(perm.begin(), perm.end());
        shuffled.initial = permuted(base.bundle.states.front(), perm);
        auto other = sim(shuffled);
        REQUIRE(other.bundle.states.size() == base.bundle.states.size());
        for (std::size_t k = 0; k < base.bundle.states.size(); ++k)
            CHECK(permuted(base.bundle.states[k], perm).xs == other.bundle.states[k].xs);
    }
    auto kin = kac_run(mollified_model(1, 0.4, CrossSection::maxwell_cutoff), 8, 2.0);
    kin.init = [](RngStream& r, std::span<double> o) {
        o[0] = 0.2 * r.uniform();
        o[1] = 0.05 * r.normal();
    };
    auto base = pair_clock_simulate(kin);
    CHECK(base.accepted > 0);
    CollisionRun shuffled = kin;
    shuffled.labels.assign(perm.begin(), perm.end());
    shuffled.initial = permuted(base.bundle.states.front(), perm);
    CHECK(permuted(base.bundle.final(), perm).xs == pair_clock_simulate(shuffled).bundle.final().xs);
}

TEST_CASE("accepted intensity stays below the master clock")
{
    auto run = kac_run(maxwell_model(1, CrossSection::hard_sphere, 3.0), 40, 5.0);
    run.init = [](RngStream& r, std::span<double> o) { o[0] = std::clamp(r.normal(), -2.9, 2.9); };
    auto res = uniform_clock_simulate(run);
    const double master = run.model.rate_bound * 39 / 2 * 5.0;
    CHECK(res.accepted <= res.candidates);
    CHECK(static_cast<double>(res.candidates) <= master + 4 * std::sqrt(master));
    std::ostringstream os;
    run.keep_events = true;
    write_collision_log(os, uniform_clock_simulate(run).events);
    CHECK(os.str().rfind("time,i,j,fictitious,theta_digest\n", 0) == 0);
}

TEST_CASE("symmetrization of a symmetric model keeps its law")
{
    OrderedPairModel sym;
    sym.dim = 1;
    sym.rate = [](auto, auto) { return 1.0; };
    sym.rate_bound = 1;
    sym.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(r.normal()); };
    sym.psi1 = [](std::span<const double> a, std::span<const double> b, std::span<const double> th,
                  std::span<double> o) { o[0] = 0.7 * a[0] + 0.3 * b[0] + th[0]; };
    sym.psi2 = [&](std::span<const double> a, std::span<const double> b, std::span<const double> th,
                   std::span<double> o) { o[0] = 0.7 * b[0] + 0.3 * a[0] + th[0]; };
    auto m = wagner_symmetrize(sym);
    RngStream r(8);
    std::vector<double> z1{0.4}, z2{-1.1}, o1(1), o2(1), p1(1), p2(1), th;
    std::vector<double> in1, in2, out1, out2;
    for (int k = 0; k < 4000; ++k)
    {
        th.clear();
        sym.sample_theta(r, th);
        sym.psi1(z1, z2, th, p1);
        sym.psi2(z1, z2, th, p2);
        in1.push_back(p1[0]);
        in2.push_back(p2[0]);
        th.clear();
        m.sample_theta(r, th);
        m.post(z1, z2, th, o1, o2);
        out1.push_back(o1[0]);
        out2.push_back(o2[0]);
    }
    const double crit = 1.95 * std::sqrt(2.0 / 4000);
    CHECK(testing::ks_two_sample(in1, out1) < crit);
    CHECK(testing::ks_two_sample(in2, out2) < crit);
}

TEST_CASE("symmetrized post-collision law is swap invariant")
{
    OrderedPairModel asym;
    asym.dim = 1;
    asym.rate = [](std::span<const double> a, std::span<const double> b) {
        return 1 + std::tanh(a[0] - b[0]);
    };
    asym.rate_bound = 2;
    asym.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(r.uniform()); };
    asym.psi1 = [](std::span<const double> a, auto, std::span<const double> th, std::span<double> o) {
        o[0] = a[0] + th[0];
    };
    asym.psi2 = [](auto, std::span<const double> b, std::span<const double> th, std::span<double> o) {
        o[0] = b[0] - 2 * th[0];
    };
    auto m = wagner_symmetrize(asym);
    RngStream r(9);
    std::vector<double> fwd, swp, z1(1), z2(1), o1(1), o2(1), th;
    for (int k = 0; k < 1000; ++k)
    {
        z1[0] = r.normal();
        z2[0] = r.normal();
        CHECK(m.rate(z1, z2) == doctest::Approx(m.rate(z2, z1)));
        th.clear();
        m.sample_theta(r, th);
        m.post(z1, z2, th, o1, o2);
        fwd.push_back(o1[0]);
        th.clear();
        m.sample_theta(r, th);
        m.post(z2, z1, th, o1, o2);
        swp.push_back(o2[0]);
    }
    CHECK(testing::ks_two_sample(fwd, swp) < 1.95 * std::sqrt(2.0 / 1000));
}

TEST_CASE("symmetrized wealth exchange conserves total wealth")
{
    const double l = 0.3, rr = 0.7;
    OrderedPairModel trade;
    trade.dim = 1;
    trade.rate = [](auto, auto) { return 1.0; };
    trade.rate_bound = 1;
    trade.sample_theta = [](RngStream&, std::vector<double>&) {};
    trade.psi1 = [=](std::span<const double> a, std::span<const double> b, auto, std::span<double> o) {
        o[0] = l * a[0] + rr * b[0];
    };
    trade.psi2 = [=](std::span<const double> a, std::span<const double> b, auto, std::span<double> o) {
        o[0] = l * b[0] + rr * a[0];
    };
    auto run = kac_run(wagner_symmetrize(trade), 50, 20.0);
    run.init = [](RngStream& r, std::span<double> o) { o[0] = r.exponential(1.0); };
    auto res = uniform_clock_simulate(run);
    CHECK(res.accepted > 100);
    double w0 = 0, w1 = 0;
    for (double x : res.bundle.states.front().xs)
        w0 += x;
    for (double x : res.bundle.final().xs)
        w1 += x;
    CHECK(std::abs(w1 - w0) <= 1e-12 * w0);
}

TEST_CASE("semi-parametric reduction")
{
    SemiParametricModel same;
    same.base = kac_model(1.0);
    same.q = [](auto, auto, auto) { return 1.0; };
    same.q0 = [](auto) { return 1.0; };
    same.bound = 1;
    auto red = semiparametric_reduce(same);
    CHECK(red.time_scale == 1);
    RngStream r(6);
    std::vector<double> z1{0.5}, z2{-2.0}, o1(1), o2(1), b1(1), b2(1), th;
    for (int k = 0; k < 100; ++k)
    {
        th.clear();
        red.model.sample_theta(r, th);
        red.model.post(z1, z2, th, o1, o2);
        same.base.post(z1, z2, std::span<const double>(th).first(1), b1, b2);
        CHECK(o1 == b1);
        CHECK(o2 == b2);
    }

    SemiParametricModel half = same;
    half.q = [](auto, auto, auto) { return 0.5; };
    auto hred = semiparametric_reduce(half);
    int kept = 0;
    const int trials = 20000;
    for (int k = 0; k < trials; ++k)
    {
        th.clear();
        hred.model.sample_theta(r, th);
        hred.model.post(z1, z2, th, o1, o2);
        kept += o1[0] == z1[0] && o2[0] == z2[0];
    }
    CHECK(std::abs(kept / double(trials) - 0.5) <= 3 * std::sqrt(0.25 / trials));

    SemiParametricModel over = same;
    over.q = [](auto, auto, auto) { return 2.0; };
    auto ored = semiparametric_reduce(over);
    th.clear();
    ored.model.sample_theta(r, th);
    CHECK_THROWS_AS(ored.model.post(z1, z2, th, o1, o2), BoundViolation);
}

TEST_CASE("reduced model at rescaled time matches the density-weighted sampler")
{
    const double a = 0.8;
    SemiParametricModel sp;
    sp.base = kac_model(1.0);
    sp.q = [a](auto, auto, std::span<const double> th) { return 1 + a * std::cos(th[0]); };
    sp.q0 = [](auto) { return 1.0; };
    sp.bound = 1 + a;
    auto red = semiparametric_reduce(sp);
    auto reduced = with_time_scale(red.model, red.time_scale);
    CollisionModel direct = kac_model(1.0);
    direct.sample_theta = [a](RngStream& r, std::vector<double>& th) {
        th.push_back(tilted_angle(r.uniform(), a));
    };
    const std::size_t reps = 1500;
    auto x = pooled(&uniform_clock_simulate, kac_run(reduced, 20, 1.0, 40), reps);
    auto y = pooled(&uniform_clock_simulate, kac_run(direct, 20, 1.0, 41), reps);
    auto y2 = pooled(&uniform_clock_simulate, kac_run(direct, 20, 1.0, 42), reps);
    auto x2 = pooled(&uniform_clock_simulate, kac_run(reduced, 20, 1.0, 43), reps);
    const double floor = std::max(testing::w1_samples(y, y2), testing::w1_samples(x, x2));
    CHECK(testing::w1_samples(x, y) <= 3 * floor);
}

TEST_CASE("interaction graph structure")
{
    RngStream r(1);
    auto empty = sample_interaction_graph(100, 0.0, 1.0, 5, r);
    CHECK(empty.routes.empty());
    CHECK(count_recollisions(empty) == 0);

    InteractionGraph fig;
    fig.n = 10;
    fig.t = 1.0;
    fig.root = 0;
    fig.routes = {{0.875, 1, 0}, {0.75, 2, 0}, {0.5, 1, 2}, {0.25, 4, 1}};
    CHECK_NOTHROW(fig.validate());
    CHECK(count_recollisions(fig) == 1);
    CHECK(recollision_flags(fig) == std::vector<bool>{false, false, true, false});
    std::ostringstream os;
    write_graph(os, fig);
    CHECK(os.str() == "time,i,j,recollision_flag\n0.875,1,0,0\n0.75,2,0,0\n0.5,1,2,1\n0.25,4,1,0\n");

    InteractionGraph tree = fig;
    tree.routes = {{0.9, 1, 0}, {0.7, 2, 0}, {0.5, 3, 2}};
    CHECK(count_recollisions(tree) == 0);

    for (int k = 0; k < 500; ++k)
    {
        auto g = sample_interaction_graph(12, 1.5, 1.0, 3, r);
        CHECK_NOTHROW(g.validate());
        auto idx = collected_indices(g);
        std::sort(idx.begin(), idx.end());
        const bool dupes = std::adjacent_find(idx.begin(), idx.end()) != idx.end();
        CHECK(dupes == (count_recollisions(g) > 0));
    }
}

TEST_CASE("route count follows the birth chain")
{
    const double n = 1e4, lambda = 2.0, t = 1.0;
    RngStream r(2);
    std::vector<double> counts;
    for (int k = 0; k < 20000; ++k)
        counts.push_back(static_cast<double>(sample_interaction_graph(10000, lambda, t, 0, r).routes.size()));
    const double oracle = birth_chain_routes(n, lambda * t);
    CHECK(oracle == doctest::Approx(std::exp(2.0) - 1).epsilon(0.01));
    CHECK(std::abs(mean(counts) / oracle - 1) <= 0.05);
}

TEST_CASE("recollisions vanish like one over N")
{
    RngStream r(3);
    std::vector<double> xs, ys;
    for (std::size_t n : {100u, 1000u, 10000u})
    {
        double total = 0;
        const int samples = 200000;
        for (int k = 0; k < samples; ++k)
            total += static_cast<double>(count_recollisions(sample_interaction_graph(n, 2.0, 1.0, 0, r)));
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(total / samples));
    }
    const auto fit = ols(xs, ys);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.3));
}

TEST_CASE("forward realization along a graph")
{
    CollisionModel drift = kac_model(1.0);
    drift.rate = [](auto, auto) { return 0.0; };
    drift.free_flight = [](std::span<double> z, double dt) { z[0] += dt; };
    RngStream r(4);
    auto g = sample_interaction_graph(8, 1.0, 2.0, 0, r);
    RngStream rr(5);
    auto path = graph_forward_realize(g, drift, 1.0, bimodal, rr);
    CHECK(path.final()[0] == doctest::Approx(path.at(0)[0] + 2.0));

    InteractionGraph lone;
    lone.n = 8;
    lone.t = 1.0;
    auto solo = graph_forward_realize(lone, kac_model(1.0), 1.0, bimodal, rr);
    CHECK(solo.times.size() == 2);
    CHECK(solo.final()[0] == solo.at(0)[0]);

    const std::size_t reps = 20000;
    std::vector<double> via_graph, via_sim, via_sim2;
    for (std::size_t k = 0; k < reps; ++k)
    {
        RngStream gs = RngStream(6).split(k);
        auto gk = sample_interaction_graph(8, 1.0, 1.0, 0, gs);
        via_graph.push_back(graph_forward_realize(gk, kac_model(1.0), 1.0, bimodal, gs).final()[0]);
    }
    via_sim = pooled(&uniform_clock_simulate, kac_run(kac_model(1.0), 8, 1.0, 7), reps, 1);
    via_sim2 = pooled(&uniform_clock_simulate, kac_run(kac_model(1.0), 8, 1.0, 8), reps, 1);
    CHECK(testing::w1_samples(via_graph, via_sim) <= 3 * testing::w1_samples(via_sim, via_sim2));
}
}
