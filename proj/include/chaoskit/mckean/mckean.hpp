// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"
#include "chaoskit/core/stats.hpp"

namespace chaoskit::mckean
{

//! One Euler-Maruyama step of every particle against the state's own
//! empirical measure. `noise` holds N*dim standard normals.
ParticleState em_step(const ParticleState& state, const DiffusionModel& model, double dt,
                      std::span<const double> noise);

/*!
 * N-particle diffusion run.
 *
 * Particle slot i draws its initial point and its Brownian increments from
 * root.split(replica).split(labels[i]).split(purpose), so permuting the
 * slots together with their labels permutes the output exactly.
 */
struct DiffusionRun
{
    DiffusionModel model;
    std::size_t n{0};
    double dt{0};
    double t_final{0};
    RngStream root;
    std::size_t stride{1};  //!< record every stride-th step (and the last)
    std::size_t replica{0};
    PointSampler init;                    //!< used unless `initial` is set
    std::optional<ParticleState> initial;
    std::vector<std::uint64_t> labels;   //!< default 0..N-1

    void validate() const;
};

TrajectoryBundle simulate_particles(const DiffusionRun& run);

//---------------------------------------------------------------------------//
//! Measure argument at every step of a time grid.
struct FrozenFlow
{
    double dt{0};
    std::size_t steps{0};
    std::size_t dim{0};
    std::size_t m{0};
    Domain domain{Domain::euclidean};
    std::vector<std::vector<double>> summaries;  //!< steps + 1 entries
    std::vector<std::vector<double>> atoms;      //!< steps + 1 entries, or empty

    MeasureContext context(std::size_t step) const;
};

struct ReferenceOptions
{
    std::size_t stride{0};  //!< 0: record only t = 0 and t = T
    double tol{1e-2};
};

struct ReferenceResult
{
    TrajectoryBundle bundle;  //!< last Picard iterate, M copies
    FrozenFlow flow;          //!< empirical flow of the last iterate
    //! W1 between successive iterates at time T; entry k compares k+1 with k.
    std::vector<double> increments;
    bool converged{true};
};

/*!
 * Frozen-flow Picard approximation of the nonlinear process with M copies.
 *
 * Iteration 0 is the M-particle system; iteration k+1 re-runs the same
 * initial points and noise with the measure argument frozen to the
 * empirical flow of iteration k. Copy i uses label i under `rng`.
 */
ReferenceResult nonlinear_reference(const DiffusionModel& model, const PointSampler& init,
                                    std::size_t m, double t_final, double dt,
                                    std::size_t picard_iters, const RngStream& rng,
                                    const ReferenceOptions& options = {});

//---------------------------------------------------------------------------//
struct CouplingReport
{
    std::size_t n{0};
    double t_final{0};
    double dt{0};
    int p{2};
    std::uint64_t seed{0};
    //! Per replica: mean over particles of sup_t |X^i_t - Xbar^i_t|^p.
    std::vector<double> pathwise;
    //! Per grid step: mean over replicas and particles of |X^i_t - Xbar^i_t|^p.
    std::vector<double> pointwise_curve;
    double pathwise_eps{0};
    double pointwise_eps{0};
    Interval ci;  //!< bootstrap CI of pathwise_eps over replicas
};

/*!
 * Synchronous coupling of the N-particle system with N copies of the
 * nonlinear process driven by the reference flow. Replica r uses
 * rng.split(r); particle i and copy i share the initial point and the
 * Brownian increments of label i.
 */
CouplingReport synchronous_coupling(const DiffusionModel& model, std::size_t n,
                                    const FrozenFlow& reference, double t_final, double dt,
                                    const PointSampler& init, const RngStream& rng,
                                    std::size_t replicas, int p = 2);

//---------------------------------------------------------------------------//
struct ReflectionConfig
{
    std::function<double(double)> kappa;  //!< one-sided Lipschitz profile (reported only)
    std::function<double(double)> f;
    double c{0};
    double delta_couple{0};

    //! f(r) = 1 - exp(-a r), delta_couple = 2 sigma sqrt(dt).
    static ReflectionConfig defaults(double sigma, double dt, double a = 1.0);
    //! f(0) = 0, f increasing and concave on a grid of [0, r_max].
    void validate(double r_max) const;
};

struct ReflectionResult
{
    std::vector<double> times;
    std::vector<double> mean_f;
    std::vector<double> coupled_fraction;
};

/*!
 * Reflection coupling of two N-particle systems X and Y with constant
 * scalar sigma: Y is driven by (I - 2 e e^T) xi with e the pre-step unit
 * difference of the partners; pairs closer than delta_couple merge.
 */
ReflectionResult reflection_coupling(const DiffusionModel& model, std::size_t n, double t_final,
                                     double dt, const ReflectionConfig& config,
                                     const PointSampler& init_x, const PointSampler& init_y,
                                     const RngStream& rng, std::size_t stride = 1);

}  // namespace chaoskit::mckean
