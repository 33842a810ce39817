// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "system.hpp"

#include <algorithm>
#include <numeric>

#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/kernels/kernels.hpp"

namespace chaoskit::mckean::detail
{

std::vector<std::uint64_t> default_labels(std::size_t n)
{
    std::vector<std::uint64_t> labels(n);
    std::iota(labels.begin(), labels.end(), std::uint64_t{0});
    return labels;
}

System::System(const DiffusionModel& model, std::span<const std::uint64_t> labels,
               const RngStream& root, const PointSampler& init, const ParticleState* initial)
    : model_(&model), n_(labels.size()), dim_(model.dim)
{
    require(n_ >= 1, "diffusion run: N must be >= 1");
    require(model.drift != nullptr, "diffusion run: model has no drift");
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    for (std::size_t k = 1; k < n_; ++k)
        require(labels[order_[k]] != labels[order_[k - 1]], "diffusion run: duplicate particle label");

    x_.resize(n_ * dim_);
    next_.resize(n_ * dim_);
    noise_.reserve(n_);
    if (initial)
    {
        require(initial->n == n_ && initial->dim == dim_, "diffusion run: initial state shape mismatch");
        initial->validate();
    }
    else
    {
        require(init != nullptr, "diffusion run: no initial law");
    }
    for (std::size_t k = 0; k < n_; ++k)
    {
        RngStream particle = root.split(labels[order_[k]]);
        noise_.push_back(particle.split(purpose::noise));
        std::span<double> xk(x_.data() + k * dim_, dim_);
        if (initial)
        {
            auto src = initial->point(order_[k]);
            std::copy(src.begin(), src.end(), xk.begin());
        }
        else
        {
            RngStream s = particle.split(purpose::init);
            init(s, xk);
        }
    }
    if (model.domain == Domain::torus)
        for (auto& v : x_)
            v = wrap_angle(v);
}

void System::draw_noise(std::vector<double>& xi)
{
    xi.resize(n_ * dim_);
    parallel_for(n_, [&](std::size_t k) {
        for (std::size_t a = 0; a < dim_; ++a)
            xi[k * dim_ + a] = noise_[k].normal();
    });
}

MeasureContext System::own_context()
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

void System::advance(const MeasureContext& ctx, double dt, std::span<const double> xi)
{
    kernels::em_update(*model_, ctx, x_, n_, dt, xi, next_);
    x_.swap(next_);
}

ParticleState System::external_state(double t) const
{
    ParticleState s(t, n_, dim_, model_->domain);
    for (std::size_t k = 0; k < n_; ++k)
        std::copy_n(x_.data() + k * dim_, dim_, s.xs.data() + order_[k] * dim_);
    return s;
}

}  // namespace chaoskit::mckean::detail
