// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/jumps/jumps.hpp"
#include "chaoskit/jumps/models.hpp"
#include "chaoskit/oracle/oracle.hpp"

using namespace chaoskit;
using namespace chaoskit::oracle;

namespace
{
//! Random exchangeable law: one exponential weight per multiset of states.
std::vector<double> random_symmetric(RngStream& r, std::size_t m, std::size_t n)
{
    const std::size_t total = state_count(m, n);
    std::map<std::vector<std::size_t>, double> weight;
    std::vector<double> f(total);
    double s = 0;
    for (std::size_t x = 0; x < total; ++x)
    {
        auto xs = decode(x, m, n);
        std::sort(xs.begin(), xs.end());
        auto [it, fresh] = weight.try_emplace(xs, 0.0);
        if (fresh)
            it->second = r.uniform() < 0.2 ? 0.0 : r.exponential(1.0);
        f[x] = it->second;
        s += f[x];
    }
    if (s == 0)
    {
        f.assign(total, 1.0);
        s = static_cast<double>(total);
    }
    for (auto& v : f)
        v /= s;
    return f;
}

std::vector<double> random_law(RngStream& r, std::size_t m)
{
    std::vector<double> f(m);
    double s = 0;
    for (auto& v : f)
        s += v = r.exponential(1.0);
    for (auto& v : f)
        v /= s;
    return f;
}

FiniteModel swap_model()
{
    return FiniteModel::mean_field(
        2, [](std::size_t, auto) { return 1.0; },
        [](std::size_t e, auto, std::span<double> row) {
            row[0] = e == 0 ? 0.0 : 1.0;
            row[1] = e == 0 ? 1.0 : 0.0;
        });
}

//! Random mean-field model whose rates and kernels depend on the histogram.
FiniteModel random_mean_field(RngStream& r, std::size_t m)
{
    std::vector<double> a(m), b(m * m);
    for (auto& v : a)
        v = r.uniform();
    for (auto& v : b)
        v = r.uniform();
    return FiniteModel::mean_field(
        m, [a](std::size_t e, std::span<const double> h) { return a[e] + h[e]; },
        [m, b](std::size_t e, std::span<const double> h, std::span<double> row) {
            double s = 0;
            for (std::size_t g = 0; g < m; ++g)
                s += row[g] = b[e * m + g] + h[g];
            for (auto& v : row)
                v /= s;
        });
}

double total_variation(std::span<const double> a, std::span<const double> b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

PointSampler law_sampler(std::vector<double> f)
{
    return [f](RngStream& r, std::span<double> out) {
        const double u = r.uniform();
        double acc = 0;
        std::size_t s = 0;
        for (; s + 1 < f.size(); ++s)
        {
            acc += f[s];
            if (u < acc)
                break;
        }
        out[0] = static_cast<double>(s);
    };
}

//! Per-state check of the slot-0 law against the exact marginal.
template<class Run>
void check_against_exact(std::span<const double> exact, std::size_t reps, Run&& run_one)
{
    std::vector<double> counts(exact.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r)
        counts[static_cast<std::size_t>(run_one(r))] += 1;
    for (std::size_t s = 0; s < exact.size(); ++s)
    {
        const double p = exact[s];
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(reps));
        CHECK(std::abs(counts[s] / static_cast<double>(reps) - p) <= 3 * se + 1e-12);
    }
}
}  // namespace

TEST_SUITE("oracle")
{
TEST_CASE("encoding is little endian")
{
    CHECK(encode(std::vector<std::size_t>{1, 0, 2}, 3) == 1 + 0 * 3 + 2 * 9);
    CHECK(decode(19, 3, 3) == std::vector<std::size_t>{1, 0, 2});
    CHECK(histogram_of(19, 3, 3) == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK_THROWS_AS(state_count(3, 20), PreconditionError);
}

TEST_CASE("two-state generator by hand")
{
    auto q = build_generator(swap_model(), 1);
    CHECK(q.dense() == std::vector<double>{-1, 1, 1, -1});
    std::vector<double> f0{1, 0};
    CHECK(exact_evolve(q, f0, 0.0) == f0);
    for (double t : {0.1, 1.0, 3.0})
    {
        auto f = exact_evolve(q, f0, t);
        CHECK(std::abs(f[1] - 0.5 * (1 - std::exp(-2 * t))) < 1e-12);
    }
}

TEST_CASE("generators commute with slot transpositions")
{
    RngStream r(1);
    for (int trial = 0; trial < 3; ++trial)
    {
        const std::size_t m = 3, n = 3;
        FiniteModel model = trial == 2 ? exchange(m, 0.3, 1.2) : random_mean_field(r, m);
        auto q = build_generator(model, n);
        auto dense = q.dense();
        const std::size_t s = q.states;
        for (std::size_t x = 0; x < s; ++x)
        {
            double row = 0;
            for (std::size_t y = 0; y < s; ++y)
            {
                if (x != y)
                    CHECK(dense[x * s + y] >= 0);
                row += dense[x * s + y];
            }
            CHECK(std::abs(row) < 1e-10);
        }
        for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}})
        {
            auto sigma = [&](std::size_t x) {
                auto xs = decode(x, m, n);
                std::swap(xs[i], xs[j]);
                return encode(xs, m);
            };
            for (std::size_t x = 0; x < s; ++x)
                for (std::size_t y = 0; y < s; ++y)
                    CHECK(dense[sigma(x) * s + sigma(y)] == doctest::Approx(dense[x * s + y]));
        }
    }
}

TEST_CASE("no transitions out of equal pairs when lambda(e, e) = 0")
{
    auto q = build_generator(exchange(3, 0.0, 1.0), 2);
    for (std::size_t e = 0; e < 3; ++e)
    {
        const std::size_t x = e + 3 * e;
        CHECK(q.diag[x] == 0);
        CHECK(q.row_ptr[x + 1] == q.row_ptr[x]);
    }
    CHECK_THROWS_AS(build_generator(FiniteModel::collision(
                                        2, [](auto, auto) { return 1.0; },
                                        [](auto, auto, std::span<double> o) {
                                            std::fill(o.begin(), o.end(), 0.3);
                                        }),
                                    2),
                    PreconditionError);
}

TEST_CASE("uniformization keeps mass and the semigroup property")
{
    RngStream r(2);
    auto q = build_generator(random_mean_field(r, 3), 4);
    auto f0 = product_measure(random_law(r, 3), 4);
    auto a = exact_evolve(q, f0, 0.7);
    auto b = exact_evolve(q, exact_evolve(q, f0, 0.3), 0.4);
    double mass = 0;
    for (std::size_t x = 0; x < a.size(); ++x)
    {
        CHECK(a[x] >= 0);
        CHECK(std::abs(a[x] - b[x]) < 1e-10);
        mass += a[x];
    }
    CHECK(std::abs(mass - 1) < 1e-10);
    auto far = exact_evolve(q, f0, 40.0);
    double far_mass = 0;
    for (double v : far)
        far_mass += v;
    CHECK(std::abs(far_mass - 1) < 1e-10);
    std::ostringstream os;
    write_distribution(os, std::vector<double>{0.25, 0.75});
    CHECK(os.str() == "state,probability\n0,0.25\n1,0.75\n");
}

TEST_CASE("marginals")
{
    RngStream r(3);
    const std::size_t m = 3, n = 4;
    auto f = random_law(r, m);
    auto prod = product_measure(f, n);
    CHECK(exact_marginal(prod, m, n, n) == prod);
    auto two = exact_marginal(prod, m, n, 2);
    auto want = product_measure(f, 2);
    for (std::size_t y = 0; y < two.size(); ++y)
        CHECK(two[y] == doctest::Approx(want[y]).epsilon(1e-13));
    for (int k = 0; k < 20; ++k)
    {
        auto fn = random_symmetric(r, m, n);
        CHECK(is_symmetric(fn, m, n));
        auto sym = symmetrize(fn, m, n);
        for (std::size_t x = 0; x < fn.size(); ++x)
            CHECK(sym[x] == doctest::Approx(fn[x]).epsilon(1e-12));
        auto f1 = exact_marginal(fn, m, n, 1);
        auto f2 = exact_marginal(fn, m, n, 2);
        auto f21 = exact_marginal(f2, m, 2, 1);
        for (std::size_t e = 0; e < m; ++e)
            CHECK(f21[e] == doctest::Approx(f1[e]).epsilon(1e-13));
    }
    std::vector<double> skew(9, 0.0);
    skew[1] = 1;
    CHECK_THROWS_AS(exact_marginal(skew, 3, 2, 1), PreconditionError);
}

TEST_CASE("moment measures")
{
    RngStream r(4);
    std::vector<double> f{0.2, 0.5, 0.3};
    CHECK(exact_moment_measure(f, 3, 1, 1) == exact_marginal(f, 3, 1, 1));
    auto fn = random_symmetric(r, 3, 4);
    auto f1 = exact_marginal(fn, 3, 4, 1);
    auto m1 = exact_moment_measure(fn, 3, 4, 1);
    for (std::size_t e = 0; e < 3; ++e)
        CHECK(m1[e] == doctest::Approx(f1[e]).epsilon(1e-14));

    std::vector<double> anti{0, 0.5, 0.5, 0};
    auto mom = exact_moment_measure(anti, 2, 2, 2);
    CHECK(mom == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    auto g = check_grunbaum(anti, 2, 2, 2);
    CHECK(g.tv == doctest::Approx(1.0));
    CHECK(g.bound == doctest::Approx(2.0));
    CHECK(g.pass);
}

TEST_CASE("marginal approximation by the moment measure")
{
    RngStream r(5);
    CHECK(check_grunbaum(random_symmetric(r, 3, 3), 3, 3, 1).tv < 1e-15);
    CHECK(check_grunbaum(product_measure(std::vector<double>{0.5, 0.5}, 10), 2, 10, 2).bound ==
          doctest::Approx(0.4));
    for (int trial = 0; trial < 1000; ++trial)
    {
        const std::size_t n = 3 + trial % 4, k = 2 + (trial / 4) % 2;
        auto fn = random_symmetric(r, 3, n);
        auto c = check_grunbaum(fn, 3, n, k);
        CHECK(c.pass);
    }
}

TEST_CASE("W1 isometry on exchangeable laws")
{
    std::vector<double> ground{0, 1, 1, 0};
    std::vector<double> d00(4, 0.0), d01(4, 0.0);
    d00[0] = 1;
    d01[1] = 0.5;
    d01[2] = 0.5;
    auto same = check_w1_isometry(d00, d00, 2, 2, ground);
    CHECK(same.lhs == 0);
    CHECK(same.rhs == 0);
    auto hand = check_w1_isometry(d00, d01, 2, 2, ground);
    CHECK(hand.lhs == doctest::Approx(0.5));
    CHECK(hand.rhs == doctest::Approx(0.5));
    RngStream r(6);
    for (int trial = 0; trial < 100; ++trial)
    {
        auto c = check_w1_isometry(random_symmetric(r, 2, 3), random_symmetric(r, 2, 3), 2, 3, ground);
        CHECK(c.gap <= 1e-8);
    }
    std::vector<double> line{0, 1, 3, 1, 0, 2, 3, 2, 0};
    for (int trial = 0; trial < 20; ++trial)
    {
        auto c = check_w1_isometry(random_symmetric(r, 3, 3), random_symmetric(r, 3, 3), 3, 3, line);
        CHECK(c.gap <= 1e-8);
    }
}

TEST_CASE("dimensional entropy bound")
{
    RngStream r(7);
    auto f = random_law(r, 3);
    auto zero = check_csiszar(product_measure(f, 4), f, 3, 4, 2);
    CHECK(std::abs(zero.lhs) < 1e-14);
    CHECK(zero.pass);
    auto fn = random_symmetric(r, 3, 4);
    auto full = check_csiszar(fn, f, 3, 4, 4);
    CHECK(full.lhs == doctest::Approx(full.rhs).epsilon(1e-12));
    for (int trial = 0; trial < 1000; ++trial)
    {
        auto g = random_law(r, 3);
        auto c = check_csiszar(random_symmetric(r, 3, 4), g, 3, 4, 1 + trial % 3);
        CHECK(c.pass);
    }
}

TEST_CASE("nonlinear ODE on E")
{
    FiniteModel lin = FiniteModel::mean_field(
        3, [](std::size_t e, auto) { return 0.5 + e; },
        [](std::size_t e, auto, std::span<double> row) {
            std::fill(row.begin(), row.end(), 0.0);
            row[(e + 1) % 3] = 1;
        });
    std::vector<double> f0{0.7, 0.2, 0.1};
    auto ode = nonlinear_finite_ode(lin, f0, 1.5);
    auto exact = exact_evolve(build_generator(lin, 1), f0, 1.5);
    for (std::size_t e = 0; e < 3; ++e)
        CHECK(std::abs(ode[e] - exact[e]) < 1e-10);

    auto neutral = choose_leader(3, jumps::mutation_kernel(3, 0.0));
    auto still = nonlinear_finite_ode(neutral, f0, 2.0);
    double mass = 0;
    for (std::size_t e = 0; e < 3; ++e)
    {
        CHECK(std::abs(still[e] - f0[e]) < 1e-10);
        mass += still[e];
    }
    CHECK(std::abs(mass - 1) < 1e-10);
    auto mix = nonlinear_finite_ode(choose_leader(3, jumps::mutation_kernel(3, 0.4)), f0, 1.0);
    const double w = std::exp(-0.4);
    for (std::size_t e = 0; e < 3; ++e)
        CHECK(std::abs(mix[e] - (w * f0[e] + (1 - w) / 3)) < 1e-10);
}

TEST_CASE("simulators agree with the exact marginals")
{
    const std::size_t n = 3, reps = 100000;
    const double t = 1.0;
    const std::vector<double> f0{0.6, 0.3, 0.1};
    const auto init = law_sampler(f0);
    const auto start = product_measure(f0, n);

    SUBCASE("choose-the-leader")
    {
        auto kernel = jumps::mutation_kernel(3, 0.5);
        auto exact = exact_marginal(exact_evolve(build_generator(choose_leader(3, kernel), n), start, t), 3, n, 1);
        jumps::JumpRun run;
        run.model = jumps::choose_leader_finite(3, kernel);
        run.n = n;
        run.t_final = t;
        run.root = RngStream(100);
        run.init = init;
        run.keep_events = false;
        check_against_exact(exact, reps, [&](std::size_t r) {
            run.replica = r;
            return jumps::pdmp_simulate(run).bundle.final().xs[0];
        });
    }
    SUBCASE("exchange collisions")
    {
        auto exact = exact_marginal(exact_evolve(build_generator(exchange(3, 0.5, 2.0), n), start, t), 3, n, 1);
        boltzmann::CollisionRun run;
        run.model = boltzmann::exchange_model(3, 0.5, 2.0);
        run.n = n;
        run.t_final = t;
        run.root = RngStream(101);
        run.init = init;
        run.keep_events = false;
        for (auto sim : {&boltzmann::uniform_clock_simulate, &boltzmann::pair_clock_simulate})
            check_against_exact(exact, reps, [&](std::size_t r) {
                run.replica = r;
                return sim(run).bundle.final().xs[0];
            });
    }
    SUBCASE("nanbu exchange")
    {
        const double same = 0.5, differ = 2.0;
        FiniteModel nanbu = FiniteModel::mean_field(
            3,
            [&](std::size_t e, std::span<const double> h) {
                double rate = 0;
                for (std::size_t s = 0; s < 3; ++s)
                {
                    const double others = h[s] * n - (s == e ? 1.0 : 0.0);
                    rate += others * (s == e ? same : differ);
                }
                return rate / (2.0 * n);
            },
            [](std::size_t, auto, std::span<double> row) { std::fill(row.begin(), row.end(), 1.0 / 3); });
        auto exact = exact_marginal(exact_evolve(build_generator(nanbu, n), start, t), 3, n, 1);
        boltzmann::CollisionRun run;
        run.model = boltzmann::exchange_model(3, same, differ);
        run.n = n;
        run.t_final = t;
        run.root = RngStream(102);
        run.init = init;
        run.keep_events = false;
        check_against_exact(exact, reps, [&](std::size_t r) {
            run.replica = r;
            return boltzmann::nanbu_simulate(run).bundle.final().xs[0];
        });
    }
}
}
