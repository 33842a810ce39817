// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace chaoskit
{

enum class Domain
{
    euclidean,
    torus,   //!< angles stored in [0, 2pi), wrapped metric
    kinetic  //!< (position, velocity) flattened into R^{2d}
};

std::string_view to_string(Domain d);

inline constexpr double two_pi = 2.0 * std::numbers::pi;

//! Wrap an angle into [0, 2pi).
double wrap_angle(double a);
//! Signed shortest difference a - b on the circle, in [-pi, pi).
double wrapped_diff(double a, double b);

//! Ground distance between two points of a domain.
double ground_distance(std::span<const double> x, std::span<const double> y,
                       Domain domain);

//---------------------------------------------------------------------------//
//! Non-owning view of N atoms in R^d; each atom has weight 1/N.
struct MeasureView
{
    std::span<const double> atoms;  //!< row-major, size n * dim
    std::size_t n{0};
    std::size_t dim{0};
    Domain domain{Domain::euclidean};

    std::span<const double> atom(std::size_t i) const
    {
        return atoms.subspan(i * dim, dim);
    }
};

//---------------------------------------------------------------------------//
/*!
 * Uniform-weight atomic measure (1/N) sum_i delta_{x_i}.
 */
class EmpiricalMeasure
{
  public:
    EmpiricalMeasure(std::vector<double> atoms, std::size_t dim,
                     Domain domain = Domain::euclidean);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    Domain domain() const { return domain_; }
    double weight() const { return 1.0 / static_cast<double>(n_); }
    std::span<const double> atoms() const { return atoms_; }
    std::span<const double> atom(std::size_t i) const
    {
        return std::span<const double>(atoms_).subspan(i * dim_, dim_);
    }

    MeasureView view() const { return {atoms_, n_, dim_, domain_}; }
    operator MeasureView() const { return view(); }

  private:
    std::vector<double> atoms_;
    std::size_t n_;
    std::size_t dim_;
    Domain domain_;
};

//---------------------------------------------------------------------------//
//! Time-stamped N-particle configuration.
struct ParticleState
{
    double t{0};
    std::size_t n{0};
    std::size_t dim{0};
    Domain domain{Domain::euclidean};
    std::vector<double> xs;  //!< row-major, size n * dim

    ParticleState() = default;
    ParticleState(double t, std::size_t n, std::size_t dim, Domain domain);
    ParticleState(double t, std::size_t dim, Domain domain, std::vector<double> xs);

    std::span<double> point(std::size_t i) { return {xs.data() + i * dim, dim}; }
    std::span<const double> point(std::size_t i) const
    {
        return {xs.data() + i * dim, dim};
    }
    MeasureView view() const { return {xs, n, dim, domain}; }

    //! Throws PreconditionError if N == 0, a coordinate is non-finite, or a
    //! torus coordinate lies outside [0, 2pi).
    void validate() const;
    //! Apply the torus wrap in place (no-op for other domains).
    void wrap();
};

EmpiricalMeasure empirical_of(const ParticleState& state);

//! Permutation of particle slots: out.point(i) = in.point(perm[i]).
ParticleState permuted(const ParticleState& state, std::span<const std::size_t> perm);

//---------------------------------------------------------------------------//
//! Time-gridded path ensemble of one N-particle run.
struct TrajectoryBundle
{
    struct Touch
    {
        double time;
        std::uint32_t i;
        std::int64_t j;  //!< -1 when a single particle is touched
    };

    std::vector<double> times;
    std::vector<ParticleState> states;
    std::vector<Touch> touches;

    const ParticleState& final() const { return states.back(); }
    //! Throws unless times strictly increase and N, d are constant.
    void validate() const;
};

//! Uniform time grid 0, dt*stride, ..., T.  Throws if T/dt is not integral.
std::size_t step_count(double t_final, double dt);

}  // namespace chaoskit
