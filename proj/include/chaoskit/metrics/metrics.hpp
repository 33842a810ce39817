// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "chaoskit/core/state.hpp"
#include "chaoskit/metrics/assignment.hpp"
#include "chaoskit/metrics/sobolev.hpp"

namespace chaoskit::metrics
{

inline constexpr std::size_t default_assignment_cap = 4096;

//! W_1 between one-dimensional empirical measures (line or circle).
double w1_exact_1d(const MeasureView& mu, const MeasureView& nu);

//! W_p (p = 1, 2) on the line via the merged quantile grid.
double wp_exact_1d(const MeasureView& mu, const MeasureView& nu, int p);

/*!
 * W_p (p = 1, 2) between equal-size clouds by exact assignment on the
 * ground distance of the measures' domain. Throws if sizes differ or
 * N exceeds `cap`.
 */
double wp_assignment(const MeasureView& mu, const MeasureView& nu, int p,
                     std::size_t cap = default_assignment_cap);

/*!
 * W1 between two clouds by the best exact method available: the 1D
 * formulas, or assignment for equal sizes up to the default cap. Larger
 * multi-dimensional clouds fall back to the mean of coordinate-marginal
 * W1 distances, which is a lower bound.
 */
double w1_auto(const MeasureView& mu, const MeasureView& nu);

//! Optimal matching behind wp_assignment: mu atom i <-> nu atom result[i].
std::vector<std::size_t> optimal_matching(const MeasureView& mu, const MeasureView& nu,
                                          int p, std::size_t cap = default_assignment_cap);

//---------------------------------------------------------------------------//
//! Axis-aligned regular grid on a box [lo, hi].
struct HistogramGrid
{
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::size_t> bins;

    //! Bounding box of both measures, width (range) * N^{-1/(d+2)}.
    static HistogramGrid fit(const MeasureView& mu, const MeasureView& nu);
    std::size_t cell_count() const;
    //! Flattened cell index; throws if the point lies outside the box.
    std::size_t cell(std::span<const double> x) const;
};

//! sum_b |mu(b) - nu(b)|, in [0, 2].
double tv_hist(const MeasureView& mu, const MeasureView& nu, const HistogramGrid& grid);

//---------------------------------------------------------------------------//
//! (1/N^2) sum Phi(x-x') + (1/M^2) sum Phi(y-y') - (2/NM) sum Phi(x-y).
double hs_sq(const MeasureView& mu, const MeasureView& nu, const SobolevKernel& kernel);

namespace serial
{
double hs_sq(const MeasureView& mu, const MeasureView& nu, const SobolevKernel& kernel);
}

//---------------------------------------------------------------------------//
/*!
 * Ordered test functions, each bounded by 1 and 1-Lipschitz. Term k
 * (1-based) carries weight 2^{-k}.
 */
class LipschitzFamily
{
  public:
    using Function = std::function<double(std::span<const double>)>;

    LipschitzFamily(std::size_t dim, std::vector<Function> functions);

    //! Tents max(0, 1 - |x - c|/w) on dyadic center grids of [lo, hi]^d,
    //! levels 0..levels-1 with 2^l + 1 centers per axis.
    static LipschitzFamily tents(std::size_t dim, double lo, double hi,
                                 std::size_t levels, double width = 1.0);

    std::size_t size() const { return fns_.size(); }
    std::size_t dim() const { return dim_; }
    double operator()(std::size_t k, std::span<const double> x) const { return fns_[k](x); }

    //! Checks |phi| <= 1 and the Lipschitz bound on random pairs drawn from
    //! [lo, hi]^d. Throws BoundViolation on failure.
    void verify(double lo, double hi, std::size_t pairs, std::uint64_t seed) const;

  private:
    std::size_t dim_;
    std::vector<Function> fns_;
};

//! sum_k 2^{-k} |<mu - nu, phi_k>|.
double d1_dist(const MeasureView& mu, const MeasureView& nu, const LipschitzFamily& family);

//! sum p_i log(p_i / q_i); +inf when p is not absolutely continuous wrt q.
double relative_entropy_discrete(std::span<const double> p, std::span<const double> q);

}  // namespace chaoskit::metrics
