// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"

namespace chaoskit::jumps::detail
{

using Velocity = std::function<void(std::span<const double> x, std::span<double> v)>;

//! Particles in label order with per-particle parameter streams.
class JumpSystem
{
  public:
    JumpSystem(const MeanFieldJumpModel& model, std::span<const std::uint64_t> labels,
               const RngStream& root, const PointSampler& init, const ParticleState* initial);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    std::span<double> point(std::size_t k) { return {x_.data() + k * dim_, dim_}; }
    std::span<const double> point(std::size_t k) const { return {x_.data() + k * dim_, dim_}; }
    std::span<double> points() { return x_; }
    std::span<const double> points() const { return x_; }
    MeasureView view() const { return {x_, n_, dim_, model_->domain}; }
    std::size_t external(std::size_t k) const { return order_[k]; }
    RngStream& theta_stream(std::size_t k) { return theta_[k]; }
    //! Parameters of collateral moves, kept apart from the main jumps.
    RngStream& collateral_stream(std::size_t k) { return collateral_[k]; }

    MeasureContext own_context();
    //! Flow every particle over `t` with velocity `v` (or the model flow).
    void flow_all(double t, double h, const Velocity& v = nullptr);
    void normalize(std::size_t k);
    ParticleState external_state(double t) const;

  private:
    const MeanFieldJumpModel* model_;
    std::size_t n_;
    std::size_t dim_;
    std::vector<std::size_t> order_;
    std::vector<RngStream> theta_, collateral_;
    std::vector<double> x_, summary_;
};

void rk4(const Velocity& v, std::span<double> x, double t, double h);

}  // namespace chaoskit::jumps::detail
