// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chaoskit/core/model.hpp"
#include "chaoskit/core/rng.hpp"
#include "chaoskit/core/state.hpp"
#include "chaoskit/core/stats.hpp"
#include "chaoskit/jumps/jumps.hpp"
#include "chaoskit/mckean/mckean.hpp"
#include "chaoskit/metrics/metrics.hpp"

namespace chaoskit::chaos
{

struct Estimate
{
    double value{0};
    Interval ci;
};

//---------------------------------------------------------------------------//
struct OmegaOptions
{
    std::size_t k{2};
    int p{1};
    std::size_t bootstrap{50};  //!< resamples for the cloud-level CIs
};

/*!
 * Omega_k, Omega_N and Omega_inf of R particle runs against M reference
 * samples, each with the matching split-half noise floor of the reference.
 */
struct OmegaEstimates
{
    Estimate omega_k;
    Estimate omega_n;
    Estimate omega_inf;
    double floor_k{0};
    double floor_n{0};
    double floor_inf{0};
    std::vector<double> inf_per_replica;
};

/*!
 * Omega_k: W_p between the R k-tuples (X^1..X^k) and R independent k-tuples
 * of reference atoms, under the normalized product cost
 * (1/k) sum_i d(x_i, y_i)^p. Omega_N is the same with k = N. Omega_inf is
 * the replica mean of W_p(mu_{X^N}, reference): exact on the line, and for
 * d > 1 against an N-atom subsample of the reference.
 */
OmegaEstimates omega_estimates(std::span<const ParticleState> runs, const MeasureView& reference,
                               const RngStream& rng, const OmegaOptions& options = {});

//! Reference curve for E W_p^p(mu_N, f) with the constant set to 1.
double fournier_guillin_beta(double n, std::size_t d, double p, double q);

//---------------------------------------------------------------------------//
struct RateFit
{
    std::vector<std::size_t> ns;
    std::vector<double> means;
    std::vector<Interval> cis;
    SlopeFit fit;
    bool fitted{false};  //!< false when some mean is zero
};

/*!
 * E W_p(mu_N, f_hat) for i.i.d. samples of f against a reference of
 * `reference_size` samples (exact on the line; for d > 1 against an N-atom
 * subsample of the reference by exact assignment), with a log-log slope.
 */
RateFit iid_wasserstein_rate_check(const PointSampler& f, std::size_t d, int p,
                                   std::span<const std::size_t> ns, std::size_t reps,
                                   const RngStream& rng, std::size_t reference_size = 100000);

//---------------------------------------------------------------------------//
struct GirsanovEstimate
{
    std::size_t n{0};
    Estimate bound;
    std::vector<double> per_replica;
};

/*!
 * (1/2) E int_0^T |b(X_t, mu_{X^N_t}) - b(X_t, f_t)|^2 dt by a left Riemann
 * sum on the simulation grid, averaged over particles and replicas. Needs
 * sigma = I and a reference flow on the same grid.
 */
GirsanovEstimate girsanov_entropy_rhs(const DiffusionModel& model, std::size_t n,
                                      const mckean::FrozenFlow& reference, double t_final,
                                      double dt, const PointSampler& init, const RngStream& rng,
                                      std::size_t reps);

//---------------------------------------------------------------------------//
struct BlockBoundCheck
{
    double lhs{0};
    Interval ci;
    double rhs{0};
    bool pass{false};
    std::vector<double> per_replica;
};

//! E ||mu_{X^{M,N}} - mu_{X^N}||^2_{H^-s} (first M slots) against 2 Phi_s(0) (1/M - 1/N).
BlockBoundCheck hs_block_bound_check(std::span<const ParticleState> samples, std::size_t m,
                                     const metrics::SobolevKernel& kernel, const RngStream& rng);

//---------------------------------------------------------------------------//
struct ToyLinearOptions
{
    std::vector<std::size_t> ns;
    std::size_t reps{1000};
    bool subtract_initial{true};
};

struct ToyLinearReport
{
    std::vector<std::size_t> ns;
    std::vector<double> g_initial;  //!< sup_phi E <mu_0 - f_0, phi>^2
    std::vector<double> g_final;    //!< sup_phi E <mu_T - f_T, phi>^2
    std::vector<double> statistic;  //!< g_final, minus g_initial when subtracting
    std::vector<Interval> cis;
    std::vector<std::vector<double>> samples;  //!< per N, per replica
    SlopeFit fit;
    bool fitted{false};
};

/*!
 * Empirical-process statistic of a mean-field jump model over a finite
 * Lipschitz family. `ref_initial[k]` and `ref_final[k]` are <f_0, phi_k>
 * and <f_T, phi_k>. The run's n and replica fields are overwritten.
 */
ToyLinearReport toy_linear_d2_check(const jumps::JumpRun& base,
                                    const metrics::LipschitzFamily& family,
                                    std::span<const double> ref_initial,
                                    std::span<const double> ref_final,
                                    const ToyLinearOptions& options);

//! <f, phi_k> for a law f on {0, ..., m-1}.
std::vector<double> finite_family_means(std::span<const double> f,
                                        const metrics::LipschitzFamily& family);

//---------------------------------------------------------------------------//
//! Model together with its default initial law.
struct Experiment
{
    std::string tag;
    ModelSpec model;
    PointSampler init;
};

//! Registry of every built-in model (parameters include the initial law).
const ModelRegistry& model_registry();
//! Throws ConfigError listing the valid tags when `tag` is unknown.
Experiment make_experiment(const std::string& tag, const ModelRegistry::Params& params = {});

struct SweepConfig
{
    std::string model;
    ModelRegistry::Params params;
    std::vector<std::size_t> ns;
    std::string metric;
    std::size_t reps{32};
    double t_final{1};
    double dt{1e-2};
    int p{2};
    double s{1};
    std::size_t k{2};
    std::size_t reference_size{0};  //!< 0: 16 * max(N)
    std::size_t picard{2};
    std::uint64_t seed{0};
};

std::vector<std::string> sweep_metrics();

struct ReportRow
{
    std::string model;
    std::size_t n{0};
    double t{0};
    double dt{0};
    std::size_t reps{0};
    std::string metric;
    std::string estimator;
    double value{0};
    double ci_lo{0};
    double ci_hi{0};
    double slope{0};
    double slope_ci_lo{0};
    double slope_ci_hi{0};
    std::uint64_t seed{0};
};

struct ChaosReport
{
    std::vector<ReportRow> rows;
    //! Estimates >= 0, ci_lo <= value <= ci_hi, pointwise eps <= pathwise eps.
    void validate() const;
};

/*!
 * Runs the metric for every N and fits a log-log slope per estimator with a
 * replica bootstrap CI. Deterministic given the seed and independent of the
 * thread count.
 */
ChaosReport sweep(const SweepConfig& config);

inline constexpr const char* report_header =
    "model,N,T,dt,reps,metric,estimator,value,ci_lo,ci_hi,slope,slope_ci_lo,slope_ci_hi,seed";
void write_report(std::ostream& os, const ChaosReport& report);
//! Throws IoError on a malformed report.
ChaosReport read_report(std::istream& is);

}  // namespace chaoskit::chaos
