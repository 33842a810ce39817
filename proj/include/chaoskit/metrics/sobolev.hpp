// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace chaoskit::metrics
{

/*!
 * Radial profile of Phi_s(z) = int exp(-i z.xi) (1 + |xi|^2)^{-s} dxi on R^d.
 *
 * Values come from the Bessel closed form
 *   (2pi)^{d/2} 2^{1-s} / Gamma(s) r^{s-d/2} K_{s-d/2}(r),
 * tabulated on log-spaced radii and interpolated by cubic Hermite segments
 * in (log r, log Phi) using exact slopes.
 */
class SobolevKernel
{
  public:
    SobolevKernel(std::size_t d, double s, double scale = 1.0,
                  std::size_t table_size = 10000);

    double operator()(double r) const;
    double at_zero() const { return phi0_; }
    std::size_t dim() const { return d_; }
    double order() const { return s_; }

  private:
    std::size_t d_;
    double s_;
    double phi0_;
    double log_rmin_;
    double log_rmax_;
    double step_;
    std::vector<double> g_;   //!< log Phi at nodes
    std::vector<double> dg_;  //!< d log Phi / d log r at nodes
};

//! Closed-form Phi_s(r) without tabulation.
double phi_s_closed_form(double r, std::size_t d, double s);

//! Phi_s(r) through a cached SobolevKernel for (d, s).
double phi_s(double r, std::size_t d, double s);

}  // namespace chaoskit::metrics
