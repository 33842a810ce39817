// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"

namespace chaoskit::boltzmann
{
namespace
{
double norm_diff(std::span<const double> a, std::span<const double> b)
{
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

double energy(std::span<const double> a)
{
    double s = 0;
    for (double x : a)
        s += x * x;
    return s;
}

[[maybe_unused]] void check_conserved(double before, double after, const char* what)
{
    if (std::abs(after - before) > 1e-12 * std::max(1.0, std::abs(before)))
        throw NumericalError(std::string("collision does not conserve ") + what);
}

double hard_sphere_bound(std::size_t dim, double vmax)
{
    require(vmax > 0, "hard spheres need a velocity box vmax > 0");
    return 2 * vmax * std::sqrt(static_cast<double>(dim));
}
}  // namespace

std::pair<double, double> kac_collision(double v1, double v2, double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    return {v1 * c + v2 * s, -v1 * s + v2 * c};
}

void maxwell_collision(std::span<const double> v, std::span<const double> vstar,
                       std::span<const double> sigma, std::span<double> v_out,
                       std::span<double> vstar_out)
{
    const std::size_t d = v.size();
    require(vstar.size() == d && sigma.size() == d && v_out.size() == d && vstar_out.size() == d,
            "maxwell_collision: dimension mismatch");
    require(std::abs(std::sqrt(energy(sigma)) - 1) <= 1e-12,
            "maxwell_collision: sigma must be a unit vector");
    const double half = 0.5 * norm_diff(v, vstar);
    for (std::size_t k = 0; k < d; ++k)
    {
        const double mid = 0.5 * (v[k] + vstar[k]);
        const double a = mid + half * sigma[k];
        const double b = mid - half * sigma[k];
        v_out[k] = a;
        vstar_out[k] = b;
    }
}

double cross_section_rate(CrossSection kind, std::span<const double> v,
                          std::span<const double> vstar, double angular_mass)
{
    switch (kind)
    {
    case CrossSection::hard_sphere:
        return norm_diff(v, vstar) * angular_mass;
    case CrossSection::maxwell_cutoff:
        return angular_mass;
    }
    return 0;
}

void sample_sphere(RngStream& rng, std::span<double> out)
{
    for (;;)
    {
        double s = 0;
        for (auto& x : out)
        {
            x = rng.normal();
            s += x * x;
        }
        if (s > 1e-300)
        {
            const double r = std::sqrt(s);
            for (auto& x : out)
                x /= r;
            const double r2 = std::sqrt(energy(out));
            for (auto& x : out)
                x /= r2;
            return;
        }
    }
}

//---------------------------------------------------------------------------//
CollisionModel kac_model(double rate)
{
    require(rate > 0, "kac_model: rate must be positive");
    CollisionModel m;
    m.name = "kac";
    m.dim = 1;
    m.rate = [rate](auto, auto) { return rate; };
    m.rate_bound = rate;
    m.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(two_pi * r.uniform()); };
    m.post = [](std::span<const double> z1, std::span<const double> z2, std::span<const double> th,
                std::span<double> o1, std::span<double> o2) {
        const auto [a, b] = kac_collision(z1[0], z2[0], th[0]);
        o1[0] = a;
        o2[0] = b;
#ifndef NDEBUG
        check_conserved(z1[0] * z1[0] + z2[0] * z2[0], a * a + b * b, "energy");
#endif
    };
    return m;
}

namespace
{
CollisionModel::Post elastic_post(std::size_t dim, std::size_t offset)
{
    return [dim, offset](std::span<const double> z1, std::span<const double> z2,
                         std::span<const double> th, std::span<double> o1, std::span<double> o2) {
        std::copy(z1.begin(), z1.end(), o1.begin());
        std::copy(z2.begin(), z2.end(), o2.begin());
        maxwell_collision(z1.subspan(offset, dim), z2.subspan(offset, dim), th,
                          o1.subspan(offset, dim), o2.subspan(offset, dim));
#ifndef NDEBUG
        for (std::size_t k = 0; k < dim; ++k)
            check_conserved(z1[offset + k] + z2[offset + k], o1[offset + k] + o2[offset + k],
                            "momentum");
        check_conserved(energy(z1.subspan(offset, dim)) + energy(z2.subspan(offset, dim)),
                        energy(o1.subspan(offset, dim)) + energy(o2.subspan(offset, dim)),
                        "energy");
#endif
    };
}
}  // namespace

CollisionModel maxwell_model(std::size_t dim, CrossSection kind, double vmax, double angular_mass)
{
    require(dim >= 1, "maxwell_model: d must be >= 1");
    require(angular_mass > 0, "maxwell_model: angular mass must be positive");
    CollisionModel m;
    m.name = kind == CrossSection::hard_sphere ? "hard_sphere" : "maxwell";
    m.dim = dim;
    m.rate = [kind, angular_mass](std::span<const double> a, std::span<const double> b) {
        return cross_section_rate(kind, a, b, angular_mass);
    };
    m.rate_bound = kind == CrossSection::hard_sphere ? hard_sphere_bound(dim, vmax) * angular_mass
                                                      : angular_mass;
    m.sample_theta = [dim](RngStream& r, std::vector<double>& th) {
        th.resize(th.size() + dim);
        sample_sphere(r, std::span<double>(th).last(dim));
    };
    m.post = elastic_post(dim, 0);
    return m;
}

CollisionModel mollified_model(std::size_t dim, double radius, CrossSection kind, double vmax,
                               double angular_mass)
{
    require(dim >= 1, "mollified_model: d must be >= 1");
    require(radius > 0 && std::isfinite(radius),
            "mollified_model: purely local collisions are not supported; the radius must be positive");
    require(angular_mass > 0, "mollified_model: angular mass must be positive");
    CollisionModel m;
    m.name = "mollified";
    m.dim = 2 * dim;
    m.domain = Domain::kinetic;
    m.rate = [dim, radius, kind, angular_mass](std::span<const double> a, std::span<const double> b) {
        const double r = norm_diff(a.first(dim), b.first(dim));
        if (r >= radius)
            return 0.0;
        const double q = 1 - (r * r) / (radius * radius);
        return q * q * cross_section_rate(kind, a.subspan(dim, dim), b.subspan(dim, dim), angular_mass);
    };
    m.rate_bound = kind == CrossSection::hard_sphere ? hard_sphere_bound(dim, vmax) * angular_mass
                                                      : angular_mass;
    m.sample_theta = [dim](RngStream& r, std::vector<double>& th) {
        th.resize(th.size() + dim);
        sample_sphere(r, std::span<double>(th).last(dim));
    };
    m.post = elastic_post(dim, dim);
    m.free_flight = [dim](std::span<double> z, double dt) {
        for (std::size_t k = 0; k < dim; ++k)
            z[k] += dt * z[dim + k];
    };
    return m;
}

CollisionModel exchange_model(std::size_t m, double same, double differ)
{
    require(m >= 1, "exchange_model: m must be >= 1");
    require(same >= 0 && differ >= 0, "exchange_model: rates must be >= 0");
    CollisionModel c;
    c.name = "exchange";
    c.dim = 1;
    c.rate = [same, differ](std::span<const double> a, std::span<const double> b) {
        return a[0] == b[0] ? same : differ;
    };
    c.rate_bound = std::max(same, differ);
    c.sample_theta = [](RngStream& r, std::vector<double>& th) { th.push_back(r.uniform()); };
    c.post = [m](std::span<const double> a, std::span<const double> b, std::span<const double> th,
                 std::span<double> o1, std::span<double> o2) {
        const auto sum = static_cast<std::size_t>(a[0]) + static_cast<std::size_t>(b[0]);
        const auto f1 = std::min(static_cast<std::size_t>(th[0] * static_cast<double>(m)), m - 1);
        o1[0] = static_cast<double>(f1);
        o2[0] = static_cast<double>((sum + m - f1) % m);
    };
    return c;
}

//---------------------------------------------------------------------------//
CollisionModel wagner_symmetrize(const OrderedPairModel& tilde)
{
    require(tilde.rate && tilde.psi1 && tilde.psi2 && tilde.sample_theta,
            "wagner_symmetrize: rate, psi1, psi2 and sample_theta are required");
    require(tilde.rate_bound >= 0, "wagner_symmetrize: rate bound must be >= 0");
    CollisionModel m;
    m.name = tilde.name.empty() ? "symmetrized" : tilde.name + "_symmetrized";
    m.dim = tilde.dim;
    m.domain = tilde.domain;
    auto rate = tilde.rate;
    m.rate = [rate](std::span<const double> a, std::span<const double> b) {
        const double ab = rate(a, b), ba = rate(b, a);
        require(ab >= 0 && ba >= 0, "wagner_symmetrize: negative ordered rate");
        return 0.5 * (ab + ba);
    };
    m.rate_bound = tilde.rate_bound;
    auto sampler = tilde.sample_theta;
    m.sample_theta = [sampler](RngStream& r, std::vector<double>& th) {
        sampler(r, th);
        th.push_back(r.uniform());
    };
    auto psi1 = tilde.psi1, psi2 = tilde.psi2;
    m.post = [rate, psi1, psi2](std::span<const double> z1, std::span<const double> z2,
                                std::span<const double> th, std::span<double> o1,
                                std::span<double> o2) {
        const double sigma = th.back();
        const auto inner = th.first(th.size() - 1);
        const double ab = rate(z1, z2), ba = rate(z2, z1);
        const double lambda = 0.5 * (ab + ba);
        if (lambda <= 0)
            require(ab == 0 && ba == 0, "wagner_symmetrize: zero symmetric rate with nonzero part");
        const double split = lambda > 0 ? ab / (2 * lambda) : 0.5;
        if (sigma <= split)
        {
            psi1(z1, z2, inner, o1);
            psi2(z1, z2, inner, o2);
        }
        else
        {
            psi2(z2, z1, inner, o1);
            psi1(z2, z1, inner, o2);
        }
    };
    return m;
}

Reduction semiparametric_reduce(const SemiParametricModel& sp)
{
    require(sp.q && sp.q0, "semiparametric_reduce: q and q0 are required");
    require(sp.bound > 0 && std::isfinite(sp.bound), "semiparametric_reduce: M must be positive");
    require(sp.base.post && sp.base.sample_theta, "semiparametric_reduce: base needs post and sampler");
    Reduction red;
    red.time_scale = sp.bound;
    red.model = sp.base;
    red.model.name = sp.base.name + "_reduced";
    auto sampler = sp.base.sample_theta;
    red.model.sample_theta = [sampler](RngStream& r, std::vector<double>& th) {
        sampler(r, th);
        th.push_back(r.uniform());
    };
    auto post = sp.base.post;
    auto q = sp.q;
    auto q0 = sp.q0;
    const double m = sp.bound;
    red.model.post = [post, q, q0, m](std::span<const double> z1, std::span<const double> z2,
                                      std::span<const double> th, std::span<double> o1,
                                      std::span<double> o2) {
        const double eta = th.back();
        const auto inner = th.first(th.size() - 1);
        const double dens = q(z1, z2, inner), env = m * q0(inner);
        if (dens > env * (1 + 1e-12))
            throw BoundViolation("semi-parametric density " + format_real(dens)
                                 + " exceeds the envelope " + format_real(env));
        if (eta * env <= dens)
        {
            post(z1, z2, inner, o1, o2);
        }
        else
        {
            std::copy(z1.begin(), z1.end(), o1.begin());
            std::copy(z2.begin(), z2.end(), o2.begin());
        }
    };
    return red;
}

CollisionModel with_time_scale(CollisionModel model, double factor)
{
    require(factor > 0, "time scale must be positive");
    auto rate = model.rate;
    model.rate = [rate, factor](std::span<const double> a, std::span<const double> b) {
        return factor * rate(a, b);
    };
    model.rate_bound *= factor;
    return model;
}

}  // namespace chaoskit::boltzmann
