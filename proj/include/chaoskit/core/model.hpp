// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"

namespace chaoskit
{

/*!
 * Measure argument handed to model callbacks.
 *
 * `summary` holds model-defined features of the measure (e.g. the Kuramoto
 * order parameter). `atoms` is populated only for models that declare
 * `needs_atoms`; frozen-flow references store summaries, and atoms only when
 * requested, so large reference ensembles stay cheap.
 */
struct MeasureContext
{
    MeasureView atoms;
    std::span<const double> summary;
};

using Summarizer = std::function<void(const MeasureView&, std::vector<double>&)>;
using PointMap = std::function<void(std::span<const double> x, const MeasureContext&,
                                    std::span<double> out)>;
//! Appends one parameter draw to `theta`; callers clear it first.
using ThetaSampler = std::function<void(RngStream&, std::vector<double>& theta)>;
//! Draws one point of the state space into `out`.
using PointSampler = std::function<void(RngStream&, std::span<double> out)>;

enum class NoiseShape
{
    diagonal,  //!< diffusion writes dim entries: sigma = diag(s)
    full       //!< diffusion writes dim*dim entries, row-major
};

//---------------------------------------------------------------------------//
//! dX = b(X, mu) dt + sigma(X, mu) dB
struct DiffusionModel
{
    std::string name;
    std::size_t dim{1};
    Domain domain{Domain::euclidean};
    bool measure_dependent{true};
    bool needs_atoms{false};
    Summarizer summarize;  //!< may be empty
    PointMap drift;
    NoiseShape noise{NoiseShape::diagonal};
    PointMap diffusion;
    //! Set when sigma(x, mu) == scalar * I.
    std::optional<double> scalar_sigma;
    double drift_lipschitz{0};
    double diffusion_lipschitz{0};
};

//---------------------------------------------------------------------------//
/*!
 * Mean-field jump / PDMP mechanism: flow dx = a(x) dt between jumps, jumps of
 * particle i at rate lambda(x_i, mu) <= rate_bound to psi(x_i, mu, theta) with
 * theta ~ nu. Optional collateral amplitude moves every other particle by
 * alpha~(x_j, x_i, mu, theta_j, theta_i) / N.
 */
struct MeanFieldJumpModel
{
    using Rate = std::function<double(std::span<const double> x, const MeasureContext&)>;
    using Jump = std::function<void(std::span<const double> x, const MeasureContext&,
                                    std::span<const double> theta, std::span<double> out)>;
    using Flow = std::function<void(std::span<const double> x, std::span<double> velocity)>;
    using Collateral = std::function<void(
        std::span<const double> x, std::span<const double> z, const MeasureContext&,
        std::span<const double> theta_x, std::span<const double> theta_z,
        std::span<double> out)>;

    std::string name;
    std::size_t dim{1};
    Domain domain{Domain::euclidean};
    bool measure_dependent{true};
    bool needs_atoms{true};
    Summarizer summarize;
    Rate rate;
    double rate_bound{0};
    Jump jump;
    ThetaSampler sample_theta;
    Flow flow;  //!< empty: no deterministic motion
    Collateral collateral;
    //! Applied after every flow step and jump (e.g. periodic box).
    std::function<void(std::span<double>)> normalize;
    double flow_lipschitz{0};
};

//---------------------------------------------------------------------------//
/*!
 * Binary collision mechanism: unordered pair (i, j) collides at rate
 * lambda(z_i, z_j) / N, lambda symmetric with lambda(z, z) = 0 allowed,
 * bounded by rate_bound. Post-collision states are (psi1, psi2)(z_i, z_j, theta)
 * with theta ~ nu, which also covers general samplers Gamma^(2).
 */
struct CollisionModel
{
    using Rate = std::function<double(std::span<const double>, std::span<const double>)>;
    using Post = std::function<void(std::span<const double> z1, std::span<const double> z2,
                                    std::span<const double> theta, std::span<double> out1,
                                    std::span<double> out2)>;
    using FreeFlight = std::function<void(std::span<double> z, double dt)>;

    std::string name;
    std::size_t dim{1};
    Domain domain{Domain::euclidean};
    Rate rate;
    double rate_bound{0};
    ThetaSampler sample_theta;
    Post post;
    FreeFlight free_flight;  //!< empty: L^(1) = 0
};

using ModelSpec = std::variant<DiffusionModel, MeanFieldJumpModel, CollisionModel>;

//! Evaluate a model's summary for a view (empty summary when no summarizer).
std::vector<double> summarize_with(const Summarizer& s, const MeasureView& view);

//! Randomized spot checks of the collision-model contract: bounded
//! nonnegative symmetric rate and symmetric post-collision law (swap test on
//! coordinate means). Throws PreconditionError with the failing check.
void validate_collision_model(const CollisionModel& model,
                              const PointSampler& point_sampler,
                              RngStream rng, std::size_t trials = 200);

//---------------------------------------------------------------------------//
/*!
 * String-tagged model factories.
 *
 * Each entry declares its parameter names and defaults; `make` rejects
 * parameters the entry does not declare.
 */
class ModelRegistry
{
  public:
    using Params = std::map<std::string, double>;
    using Factory = std::function<ModelSpec(const Params&)>;

    struct Entry
    {
        std::string tag;
        std::string description;
        Params defaults;
        Factory factory;
    };

    void add(Entry entry);
    bool contains(const std::string& tag) const;
    const Entry& at(const std::string& tag) const;
    std::vector<std::string> tags() const;
    //! Defaults overlaid with `params`; unknown parameter names throw ConfigError.
    ModelSpec make(const std::string& tag, const Params& params) const;

  private:
    std::map<std::string, Entry> entries_;
};

}  // namespace chaoskit
