// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/core/state.hpp"

#include <cmath>
#include <string>

#include "chaoskit/core/error.hpp"

namespace chaoskit
{

std::string_view to_string(Domain d)
{
    switch (d)
    {
        case Domain::euclidean: return "euclidean";
        case Domain::torus: return "torus";
        case Domain::kinetic: return "kinetic";
    }
    return "?";
}

double wrap_angle(double a)
{
    double r = std::fmod(a, two_pi);
    if (r < 0)
        r += two_pi;
    // fmod of a tiny negative value can round up to exactly 2pi
    if (r >= two_pi)
        r = 0;
    return r;
}

double wrapped_diff(double a, double b)
{
    double d = std::fmod(a - b, two_pi);
    if (d < -std::numbers::pi)
        d += two_pi;
    else if (d >= std::numbers::pi)
        d -= two_pi;
    return d;
}

double ground_distance(std::span<const double> x, std::span<const double> y,
                       Domain domain)
{
    double s = 0;
    if (domain == Domain::torus)
    {
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            double d = wrapped_diff(x[k], y[k]);
            s += d * d;
        }
    }
    else
    {
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            double d = x[k] - y[k];
            s += d * d;
        }
    }
    return std::sqrt(s);
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms, std::size_t dim,
                                   Domain domain)
    : atoms_(std::move(atoms)), n_(0), dim_(dim), domain_(domain)
{
    require(dim_ >= 1, "EmpiricalMeasure: dim must be >= 1");
    require(atoms_.size() % dim_ == 0, "EmpiricalMeasure: atom buffer not a multiple of dim");
    n_ = atoms_.size() / dim_;
    require(n_ >= 1, "EmpiricalMeasure: empty measure");
}

ParticleState::ParticleState(double t_, std::size_t n_, std::size_t dim_, Domain domain_)
    : t(t_), n(n_), dim(dim_), domain(domain_), xs(n_ * dim_, 0.0)
{
}

ParticleState::ParticleState(double t_, std::size_t dim_, Domain domain_,
                             std::vector<double> xs_)
    : t(t_), n(dim_ ? xs_.size() / dim_ : 0), dim(dim_), domain(domain_), xs(std::move(xs_))
{
    require(dim >= 1 && xs.size() % dim == 0, "ParticleState: bad buffer size");
}

void ParticleState::validate() const
{
    require(n >= 1, "ParticleState: N must be >= 1");
    require(xs.size() == n * dim, "ParticleState: buffer size mismatch");
    for (std::size_t k = 0; k < xs.size(); ++k)
    {
        if (!std::isfinite(xs[k]))
            throw NumericalError("ParticleState: non-finite coordinate at particle "
                                 + std::to_string(k / dim));
        if (domain == Domain::torus && (xs[k] < 0 || xs[k] >= two_pi))
            throw PreconditionError("ParticleState: torus coordinate outside [0, 2pi) at particle "
                                    + std::to_string(k / dim));
    }
}

void ParticleState::wrap()
{
    if (domain != Domain::torus)
        return;
    for (double& x : xs)
        x = wrap_angle(x);
}

EmpiricalMeasure empirical_of(const ParticleState& state)
{
    return EmpiricalMeasure(state.xs, state.dim, state.domain);
}

ParticleState permuted(const ParticleState& state, std::span<const std::size_t> perm)
{
    require(perm.size() == state.n, "permuted: permutation size mismatch");
    ParticleState out(state.t, state.n, state.dim, state.domain);
    for (std::size_t i = 0; i < state.n; ++i)
    {
        auto src = state.point(perm[i]);
        std::copy(src.begin(), src.end(), out.point(i).begin());
    }
    return out;
}

void TrajectoryBundle::validate() const
{
    require(!states.empty() && states.size() == times.size(),
            "TrajectoryBundle: one state per grid time required");
    for (std::size_t k = 0; k < states.size(); ++k)
    {
        require(states[k].n == states[0].n && states[k].dim == states[0].dim,
                "TrajectoryBundle: N and d must be constant across the grid");
        if (k > 0)
            require(times[k] > times[k - 1], "TrajectoryBundle: times must strictly increase");
    }
}

std::size_t step_count(double t_final, double dt)
{
    require(dt > 0, "time step must be positive");
    require(t_final >= 0, "final time must be nonnegative");
    double ratio = t_final / dt;
    double rounded = std::round(ratio);
    require(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio),
            "T/dt must be integral (within 1e-9)");
    return static_cast<std::size_t>(rounded);
}

}  // namespace chaoskit
