// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"

namespace chaoskit::mckean::detail
{

//! Particles stored in label order; slot k is external index order[k].
class System
{
  public:
    System(const DiffusionModel& model, std::span<const std::uint64_t> labels,
           const RngStream& root, const PointSampler& init, const ParticleState* initial);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> points() const { return x_; }
    std::span<double> points() { return x_; }
    MeasureView view() const { return {x_, n_, dim_, model_->domain}; }

    //! N*dim fresh normals from the per-particle noise streams.
    void draw_noise(std::vector<double>& xi);
    //! Context built from this system's own empirical measure.
    MeasureContext own_context();
    void advance(const MeasureContext& ctx, double dt, std::span<const double> xi);

    ParticleState external_state(double t) const;

  private:
    const DiffusionModel* model_;
    std::size_t n_;
    std::size_t dim_;
    std::vector<std::size_t> order_;
    std::vector<RngStream> noise_;
    std::vector<double> x_, next_, summary_;
};

std::vector<std::uint64_t> default_labels(std::size_t n);

}  // namespace chaoskit::mckean::detail
