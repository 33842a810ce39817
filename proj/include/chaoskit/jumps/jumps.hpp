// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"
#include "chaoskit/core/stats.hpp"

namespace chaoskit::jumps
{

struct JumpEvent
{
    double time{0};
    std::size_t replica{0};
    std::size_t index{0};  //!< external particle slot
    std::uint64_t theta_digest{0};
    bool accepted{false};
    bool collateral{false};
};

void write_event_log(std::ostream& os, const std::vector<JumpEvent>& events);

struct Candidate
{
    double dt{0};
    std::size_t index{0};
    double u{0};  //!< acceptance uniform
};

/*!
 * Next candidate of the global clock of rate N * Lambda: exponential
 * waiting time, uniform index, acceptance uniform. The caller flows the
 * system to the candidate time and accepts iff u * Lambda <= lambda.
 */
Candidate thinning_next_event(std::size_t n, double rate_bound, RngStream& clock);

//! Evaluates lambda and throws BoundViolation if it exceeds the bound.
bool thinning_accept(const MeanFieldJumpModel& model, std::span<const double> x,
                     const MeasureContext& ctx, double u);

//! RK4 integration of dx = a(x) dt over [0, t] with steps of at most h.
void flow_point(const MeanFieldJumpModel& model, std::span<double> x, double t, double h);

//---------------------------------------------------------------------------//
struct JumpRun
{
    MeanFieldJumpModel model;
    std::size_t n{0};
    double t_final{0};
    RngStream root;
    std::size_t replica{0};
    double record_dt{0};  //!< 0: record t = 0 and t = T only
    double flow_step{1e-2};
    PointSampler init;
    std::optional<ParticleState> initial;
    std::vector<std::uint64_t> labels;
    bool keep_events{true};

    void validate() const;
};

struct JumpResult
{
    TrajectoryBundle bundle;
    std::vector<JumpEvent> events;
};

//! Flow-and-jump simulation with global thinning. Collateral is ignored.
JumpResult pdmp_simulate(const JumpRun& run);
//! Same process written as the Poisson-random-measure SDE; same output.
JumpResult parametric_jump_simulate(const JumpRun& run);
//! Main jumps plus collateral moves alpha~(x_j, x_i, mu, theta_j, theta_i)/N.
JumpResult simultaneous_jump_simulate(const JumpRun& run);

//---------------------------------------------------------------------------//
//! Measure argument on a uniform grid, held constant between grid times.
struct JumpFlow
{
    double dt{0};
    std::size_t steps{0};
    std::size_t dim{0};
    std::size_t m{0};
    Domain domain{Domain::euclidean};
    std::vector<std::vector<double>> summaries;
    std::vector<std::vector<double>> atoms;

    std::size_t slot(double t) const;
    MeasureContext context(double t) const;
};

struct JumpReferenceResult
{
    TrajectoryBundle bundle;  //!< last iterate, M copies, recorded on the grid
    JumpFlow flow;
    std::vector<double> increments;
    bool converged{true};
};

struct JumpReferenceOptions
{
    double grid_dt{1e-2};
    double flow_step{1e-2};
    double tol{2e-2};
    //! Frozen atoms used for the collateral mean-field drift.
    std::size_t collateral_atoms{128};
};

/*!
 * Frozen-flow Picard approximation of the nonlinear jump process with M
 * copies (two cross-fitted ensembles, as for diffusions). A declared
 * collateral term becomes the drift int lambda(z, f) alpha~(x, z, f, .) f(dz).
 */
JumpReferenceResult nonlinear_jump_reference(const MeanFieldJumpModel& model,
                                             const PointSampler& init, std::size_t m,
                                             double t_final, std::size_t picard_iters,
                                             const RngStream& rng,
                                             const JumpReferenceOptions& options = {});

//! Monte Carlo estimate of int lambda(z, f) E alpha~(x, z, f, theta, theta') f(dz)
//! using the atoms of `ctx` (first `max_atoms` of them).
void collateral_mean_drift(const MeanFieldJumpModel& model, std::span<const double> x,
                           const MeasureContext& ctx, RngStream& rng, std::size_t max_atoms,
                           std::span<double> out);

//---------------------------------------------------------------------------//
//! Value at the same rank: particle_sorted[r] where reference_sorted[r] was drawn.
double quantile_transfer(std::span<const double> particle_sorted, std::size_t rank);

struct JumpCouplingOptions
{
    std::size_t samples{256};  //!< Q, quantile-map sample size per event
    double flow_step{1e-2};
    int p{1};
};

struct JumpCouplingReport
{
    std::size_t n{0};
    double t_final{0};
    int p{1};
    std::uint64_t seed{0};
    std::vector<double> pathwise;  //!< per replica
    std::vector<double> pointwise_curve;
    std::vector<double> curve_times;
    double pathwise_eps{0};
    double pointwise_eps{0};
    Interval ci;
    double mean_event_cost{0};  //!< mean |y_particle - y_copy| over coupled jumps
    std::size_t coupled_events{0};
    std::size_t solo_events{0};
    //! Per candidate event of replica 0: (time, index, particle accepted, copy accepted).
    struct ClockEntry
    {
        double time;
        std::size_t index;
        bool particle;
        bool copy;
    };
    std::vector<ClockEntry> clock_log;
};

/*!
 * Coupling of the N-particle jump system (d = 1) with N nonlinear copies
 * driven by `reference`. Particle i and copy i share candidate times and the
 * acceptance uniform (each accepts iff u * Lambda <= its own rate); when both
 * jump, the copy takes a uniformly chosen sample of its jump law and the
 * particle takes the sample of equal rank from its own law.
 */
JumpCouplingReport optimal_jump_coupling_1d(const MeanFieldJumpModel& model, std::size_t n,
                                            const JumpFlow& reference, double t_final,
                                            const PointSampler& init, const RngStream& rng,
                                            std::size_t replicas,
                                            const JumpCouplingOptions& options = {});

}  // namespace chaoskit::jumps
