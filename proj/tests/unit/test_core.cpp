// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"
#include "chaoskit/metrics/metrics.hpp"

using namespace chaoskit;

TEST_SUITE("core")
{
TEST_CASE("philox known answers")
{
    using W = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
          == W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
          == W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("split appends the label")
{
    RngStream root(1);
    auto child = split_stream(root, 7);
    CHECK(child.seed() == 1);
    REQUIRE(child.path().size() == 1);
    CHECK(child.path()[0] == 7);

    RngStream direct(1, {7});
    auto again = root.split(7);
    for (int i = 0; i < 1000; ++i)
    {
        auto a = child();
        CHECK(a == direct());
        CHECK(a == again());
    }
}

TEST_CASE("sibling streams differ almost everywhere")
{
    RngStream root(1);
    auto a = root.split(0);
    auto b = root.split(1);
    int same = 0;
    for (int i = 0; i < 10000; ++i)
        same += a() == b();
    CHECK(same <= 100);
}

TEST_CASE("stream output does not depend on creation order")
{
    RngStream root(42);
    auto s1 = root.split(3).split(5);
    std::vector<std::uint64_t> first;
    for (int i = 0; i < 16; ++i)
        first.push_back(s1());
    auto other = root.split(9);
    (void)other();
    auto s2 = root.split(3).split(5);
    for (int i = 0; i < 16; ++i)
        CHECK(first[i] == s2());
}

TEST_CASE("uniform, normal and integer draws have the right moments")
{
    RngStream rng(5, {1});
    double su = 0, sn = 0, sn2 = 0;
    std::vector<int> counts(6, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i)
    {
        double u = rng.uniform();
        REQUIRE(u > 0);
        REQUIRE(u < 1);
        su += u;
        double z = rng.normal();
        sn += z;
        sn2 += z * z;
        counts[rng.below(6)]++;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    for (int c : counts)
        CHECK(std::abs(c - n / 6.0) < 5 * std::sqrt(n / 6.0));
    CHECK_THROWS_AS(rng.exponential(0.0), PreconditionError);
}

TEST_CASE("empirical measure of a state")
{
    ParticleState one(0.0, 1, Domain::euclidean, {0.0});
    auto m1 = empirical_of(one);
    CHECK(m1.size() == 1);
    CHECK(m1.weight() == 1.0);
    CHECK(m1.atom(0)[0] == 0.0);

    ParticleState two(0.0, 1, Domain::euclidean, {0.0, 1.0});
    auto m2 = empirical_of(two);
    CHECK(m2.weight() == 0.5);
    CHECK(m2.atom(1)[0] == 1.0);

    ParticleState many(0.0, 2, Domain::euclidean, {0, 1, 2, 3, 4, 5, 6, 7});
    std::vector<std::size_t> perm{2, 0, 3, 1};
    auto shuffled = permuted(many, perm);
    CHECK(shuffled.point(0)[0] == 4.0);
    auto a = empirical_of(many);
    auto b = empirical_of(shuffled);
    CHECK(metrics::wp_assignment(a, b, 1) == 0.0);
    CHECK(metrics::wp_assignment(a, b, 2) == 0.0);
    metrics::SobolevKernel k(2, 2.0);
    CHECK(metrics::hs_sq(a, b, k) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(metrics::tv_hist(a, b, metrics::HistogramGrid::fit(a, b)) == 0.0);

    CHECK_THROWS_AS(EmpiricalMeasure({}, 1), PreconditionError);
}

TEST_CASE("state validation")
{
    ParticleState bad(0.0, 1, Domain::euclidean, {0.0, std::nan("")});
    CHECK_THROWS_AS(bad.validate(), NumericalError);
    ParticleState torus(0.0, 1, Domain::torus, {7.0});
    CHECK_THROWS_AS(torus.validate(), PreconditionError);
    torus.wrap();
    CHECK_NOTHROW(torus.validate());
    CHECK(torus.xs[0] == doctest::Approx(7.0 - two_pi));
    CHECK(wrapped_diff(0.1, two_pi - 0.1) == doctest::Approx(0.2));
    std::vector<double> x{0.1}, y{two_pi - 0.1};
    CHECK(ground_distance(x, y, Domain::torus) == doctest::Approx(0.2));
}

TEST_CASE("step counts")
{
    CHECK(step_count(1.0, 0.01) == 100);
    CHECK(step_count(2.0, 0.5) == 4);
    CHECK_THROWS_AS(step_count(1.0, 0.3), PreconditionError);
}

TEST_CASE("trajectory csv round trip")
{
    TrajectoryBundle b;
    b.times = {0.0, 0.5};
    b.states.emplace_back(0.0, 2, Domain::euclidean, std::vector<double>{0.1, 0.2, 0.3, 0.4});
    b.states.emplace_back(0.5, 2, Domain::euclidean, std::vector<double>{1.0 / 3.0, 0.2, 0.3, 0.4});
    std::ostringstream os;
    write_trajectory_header(os, 2);
    write_trajectory_rows(os, b, 3);
    std::istringstream is(os.str());
    auto table = read_csv(is);
    CHECK(table.header == std::vector<std::string>{"replica", "t", "particle", "x0", "x1"});
    REQUIRE(table.rows.size() == 4);
    CHECK(std::stod(table.rows[2][3]) == 1.0 / 3.0);
    CHECK(table.rows[3][0] == "3");
}

TEST_CASE("registry rejects unknown tags and parameters")
{
    ModelRegistry reg;
    reg.add({"toy", "constant drift", {{"a", 1.0}}, [](const ModelRegistry::Params& p) {
                 DiffusionModel m;
                 m.name = "toy";
                 double a = p.at("a");
                 m.drift = [a](auto, auto&, std::span<double> out) { out[0] = a; };
                 return ModelSpec(m);
             }});
    CHECK(reg.contains("toy"));
    CHECK_THROWS_AS(reg.at("nope"), ConfigError);
    CHECK_THROWS_AS(reg.make("toy", {{"b", 2.0}}), ConfigError);
    auto spec = reg.make("toy", {{"a", 2.0}});
    CHECK(std::get<DiffusionModel>(spec).name == "toy");
}
}
