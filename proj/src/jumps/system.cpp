// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"

namespace chaoskit::jumps::detail
{

JumpSystem::JumpSystem(const MeanFieldJumpModel& model, std::span<const std::uint64_t> labels,
                       const RngStream& root, const PointSampler& init, const ParticleState* initial)
    : model_(&model), n_(labels.size()), dim_(model.dim)
{
    require(n_ >= 1, "jump run: N must be >= 1");
    require(model.rate != nullptr && model.jump != nullptr, "jump run: model needs rate and jump");
    require(model.rate_bound >= 0, "jump run: rate bound must be >= 0");
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    for (std::size_t k = 1; k < n_; ++k)
        require(labels[order_[k]] != labels[order_[k - 1]], "jump run: duplicate particle label");
    if (initial)
    {
        require(initial->n == n_ && initial->dim == dim_, "jump run: initial state shape mismatch");
        initial->validate();
    }
    else
    {
        require(init != nullptr, "jump run: no initial law");
    }
    x_.resize(n_ * dim_);
    theta_.reserve(n_);
    collateral_.reserve(n_);
    for (std::size_t k = 0; k < n_; ++k)
    {
        RngStream particle = root.split(labels[order_[k]]);
        theta_.push_back(particle.split(purpose::theta));
        collateral_.push_back(particle.split(purpose::collateral));
        if (initial)
        {
            auto src = initial->point(order_[k]);
            std::copy(src.begin(), src.end(), point(k).begin());
        }
        else
        {
            RngStream s = particle.split(purpose::init);
            init(s, point(k));
        }
        normalize(k);
    }
}

MeasureContext JumpSystem::own_context()
{
    MeasureContext ctx;
    if (model_->summarize)
    {
        model_->summarize(view(), summary_);
        ctx.summary = summary_;
    }
    if (model_->needs_atoms)
        ctx.atoms = view();
    return ctx;
}

void rk4(const Velocity& v, std::span<double> x, double t, double h)
{
    if (t <= 0)
        return;
    const std::size_t d = x.size();
    const auto steps = static_cast<std::size_t>(std::ceil(t / h - 1e-12));
    const double dt = t / static_cast<double>(std::max<std::size_t>(steps, 1));
    thread_local std::vector<double> k1, k2, k3, k4, y;
    k1.resize(d);
    k2.resize(d);
    k3.resize(d);
    k4.resize(d);
    y.resize(d);
    for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s)
    {
        v(x, k1);
        for (std::size_t a = 0; a < d; ++a)
            y[a] = x[a] + 0.5 * dt * k1[a];
        v(y, k2);
        for (std::size_t a = 0; a < d; ++a)
            y[a] = x[a] + 0.5 * dt * k2[a];
        v(y, k3);
        for (std::size_t a = 0; a < d; ++a)
            y[a] = x[a] + dt * k3[a];
        v(y, k4);
        for (std::size_t a = 0; a < d; ++a)
            x[a] += dt / 6.0 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
    }
}

void JumpSystem::flow_all(double t, double h, const Velocity& v)
{
    if (t <= 0)
        return;
    const Velocity& vel = v ? v : model_->flow;
    if (!vel)
        return;
    parallel_for(n_, [&](std::size_t k) {
        rk4(vel, point(k), t, h);
        normalize(k);
        for (double c : point(k))
            if (!std::isfinite(c))
                throw NumericalError("jump flow produced a non-finite value at particle "
                                     + std::to_string(order_[k]));
    });
}

void JumpSystem::normalize(std::size_t k)
{
    if (model_->normalize)
        model_->normalize(point(k));
    if (model_->domain == Domain::torus)
        for (auto& c : point(k))
            c = wrap_angle(c);
}

ParticleState JumpSystem::external_state(double t) const
{
    ParticleState s(t, n_, dim_, model_->domain);
    for (std::size_t k = 0; k < n_; ++k)
        std::copy_n(x_.data() + k * dim_, dim_, s.xs.data() + order_[k] * dim_);
    return s;
}

}  // namespace chaoskit::jumps::detail
