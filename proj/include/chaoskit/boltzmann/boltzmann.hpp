// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"

namespace chaoskit::boltzmann
{

struct CollisionEvent
{
    double time{0};
    std::size_t i{0};  //!< external slots, i < j
    std::size_t j{0};
    bool fictitious{false};
    std::uint64_t theta_digest{0};
};

void write_collision_log(std::ostream& os, const std::vector<CollisionEvent>& events);

struct CollisionRun
{
    CollisionModel model;
    std::size_t n{0};
    double t_final{0};
    RngStream root;
    std::size_t replica{0};
    double record_dt{0};  //!< 0: record t = 0 and t = T only
    PointSampler init;
    std::optional<ParticleState> initial;
    std::vector<std::uint64_t> labels;
    bool keep_events{true};
    //! Sub-step of the pair-clock rate integral along free flight (0: T / 1e4).
    double dt_rate{0};

    void validate() const;
};

struct CollisionResult
{
    TrajectoryBundle bundle;
    std::vector<CollisionEvent> events;
    std::size_t accepted{0};
    std::size_t candidates{0};
};

/*!
 * One master clock of rate Lambda (N - 1) / 2, uniform unordered pair,
 * acceptance lambda / Lambda, post-collision states from (psi1, psi2).
 * Free flight is applied lazily to the particles that collide.
 */
CollisionResult uniform_clock_simulate(const CollisionRun& run);

/*!
 * One clock per unordered pair: the pair collides when the integral of
 * lambda / N along the path crosses an Exp(1) threshold. Rates are
 * piecewise constant between events (and between dt_rate sub-steps when
 * particles move). Intended for N <= 64.
 */
CollisionResult pair_clock_simulate(const CollisionRun& run);

//! Uniform clock, but only one member of the pair (chosen uniformly) jumps
//! to psi1(z_self, z_other, theta).
CollisionResult nanbu_simulate(const CollisionRun& run);

//---------------------------------------------------------------------------//
//! Rotation of (v1, v2) by theta.
std::pair<double, double> kac_collision(double v1, double v2, double theta);

//! Sigma-parametrized elastic collision; sigma must be a unit vector.
void maxwell_collision(std::span<const double> v, std::span<const double> vstar,
                       std::span<const double> sigma, std::span<double> v_out,
                       std::span<double> vstar_out);

enum class CrossSection
{
    hard_sphere,    //!< Phi(|u|) = |u|
    maxwell_cutoff  //!< Phi(|u|) = 1
};

//! Phi(|v - v*|) times the total angular mass.
double cross_section_rate(CrossSection kind, std::span<const double> v,
                          std::span<const double> vstar, double angular_mass = 1.0);

//! Uniform direction on the unit sphere of R^d.
void sample_sphere(RngStream& rng, std::span<double> out);

//---------------------------------------------------------------------------//
//! Kac caricature on R: constant rate, theta uniform on [0, 2pi).
CollisionModel kac_model(double rate = 1.0);

/*!
 * Spatially homogeneous gas in R^d with uniform scattering direction.
 * Hard spheres are bounded by declaring the velocity box [-vmax, vmax]^d.
 */
CollisionModel maxwell_model(std::size_t dim, CrossSection kind, double vmax = 0.0,
                             double angular_mass = 1.0);

/*!
 * Kinetic state (x, v) in R^{2d} with free transport and rate
 * K(|x1 - x2|) Phi(|v1 - v2|), K(r) = (1 - r^2 / R^2)^2 on r < R.
 */
CollisionModel mollified_model(std::size_t dim, double radius, CrossSection kind,
                               double vmax = 0.0, double angular_mass = 1.0);

/*!
 * Exchange collisions on {0, ..., m-1} (stored as reals): rate `same` for
 * equal states and `differ` otherwise; the pair moves to (f1, f2) uniform
 * among pairs with f1 + f2 = e1 + e2 mod m.
 */
CollisionModel exchange_model(std::size_t m, double same, double differ);

//---------------------------------------------------------------------------//
//! Ordered-pair model: i jumps with rate tilde_rate(z_i, z_j) / (2N) for all i != j.
struct OrderedPairModel
{
    using Rate = CollisionModel::Rate;
    using Map = std::function<void(std::span<const double> z1, std::span<const double> z2,
                                   std::span<const double> theta, std::span<double> out)>;
    std::string name;
    std::size_t dim{1};
    Domain domain{Domain::euclidean};
    Rate rate;  //!< need not be symmetric
    double rate_bound{0};
    ThetaSampler sample_theta;
    Map psi1;
    Map psi2;
};

//! Unordered-pair model with theta extended by sigma ~ U[0, 1] (last entry).
CollisionModel wagner_symmetrize(const OrderedPairModel& model);

//! Post-collision law q(z1, z2, theta) nu(dtheta) with q <= M q0.
struct SemiParametricModel
{
    using Density = std::function<double(std::span<const double> z1, std::span<const double> z2,
                                         std::span<const double> theta)>;
    CollisionModel base;  //!< rate, post; base.sample_theta draws from q0 nu
    Density q;
    std::function<double(std::span<const double> theta)> q0;
    double bound{1};  //!< M
};

struct Reduction
{
    CollisionModel model;  //!< theta extended by eta ~ U[0, 1] (last entry)
    double time_scale{1};  //!< run the reduced model M times faster
};

Reduction semiparametric_reduce(const SemiParametricModel& model);

//! Multiplies rate and bound by `factor` (time change t -> factor t).
CollisionModel with_time_scale(CollisionModel model, double factor);

//---------------------------------------------------------------------------//
struct Route
{
    double time{0};
    std::size_t i{0};  //!< joined (or re-joined) index
    std::size_t j{0};  //!< already collected index
};

struct InteractionGraph
{
    std::size_t n{0};
    double t{0};
    std::size_t root{0};
    std::vector<Route> routes;  //!< backward order: times strictly decrease

    //! Time monotonicity and route membership; throws PreconditionError.
    void validate() const;
};

//! Backward construction with independent pair processes of rate Lambda / N.
InteractionGraph sample_interaction_graph(std::size_t n, double lambda, double t,
                                          std::size_t root, RngStream& rng);

//! Per-route flag: both endpoints already present.
std::vector<bool> recollision_flags(const InteractionGraph& graph);
std::size_t count_recollisions(const InteractionGraph& graph);
//! i_0 = root, i_1, ..., i_k (repeats allowed).
std::vector<std::size_t> collected_indices(const InteractionGraph& graph);

void write_graph(std::ostream& os, const InteractionGraph& graph);

struct RootPath
{
    std::size_t dim{0};
    std::vector<double> times;
    std::vector<double> states;  //!< row-major, one row per time

    std::span<const double> at(std::size_t k) const { return {states.data() + k * dim, dim}; }
    std::span<const double> final() const { return at(times.size() - 1); }
};

/*!
 * Forward realization along a sampled graph: collected particles start
 * i.i.d. from `init`, move freely between route times and collide with
 * probability lambda / lambda_bound at each route. Returns the root path
 * at 0, at every route touching the root, and at t.
 */
RootPath graph_forward_realize(const InteractionGraph& graph, const CollisionModel& model,
                               double lambda_bound, const PointSampler& init, RngStream& rng);

}  // namespace chaoskit::boltzmann
