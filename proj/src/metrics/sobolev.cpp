// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/metrics/sobolev.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "chaoskit/core/error.hpp"

namespace chaoskit::metrics
{
namespace
{
constexpr double asymptotic_from = 500.0;

double log_bessel_k(double nu, double r)
{
    if (r < asymptotic_from)
        return std::log(std::cyl_bessel_k(nu, r));
    const double mu = 4.0 * nu * nu;
    const double z = 8.0 * r;
    const double series = 1.0 + (mu - 1.0) / z + (mu - 1.0) * (mu - 9.0) / (2.0 * z * z)
                          + (mu - 1.0) * (mu - 9.0) * (mu - 25.0) / (6.0 * z * z * z);
    return 0.5 * std::log(std::numbers::pi / (2.0 * r)) - r + std::log(series);
}

double log_prefactor(std::size_t d, double s)
{
    const double half_d = 0.5 * static_cast<double>(d);
    return half_d * std::log(2.0 * std::numbers::pi) + (1.0 - s) * std::log(2.0)
           - std::lgamma(s);
}

double log_phi(double r, std::size_t d, double s)
{
    const double nu = s - 0.5 * static_cast<double>(d);
    return log_prefactor(d, s) + nu * std::log(r) + log_bessel_k(nu, r);
}

double log_phi_slope(double r, std::size_t d, double s)
{
    const double nu = s - 0.5 * static_cast<double>(d);
    return -r * std::exp(log_bessel_k(std::abs(nu - 1.0), r) - log_bessel_k(nu, r));
}

void check_order(std::size_t d, double s)
{
    require(d >= 1, "Sobolev kernel: dimension must be >= 1");
    require(s > 0.5 * static_cast<double>(d),
            "Sobolev kernel: need s > d/2 (kernel diverges at 0)");
}
}  // namespace

double phi_s_closed_form(double r, std::size_t d, double s)
{
    check_order(d, s);
    require(r >= 0 && std::isfinite(r), "phi_s: radius must be finite and >= 0");
    if (r == 0)
    {
        const double half_d = 0.5 * static_cast<double>(d);
        return std::pow(std::numbers::pi, half_d) * std::exp(std::lgamma(s - half_d) - std::lgamma(s));
    }
    return std::max(std::exp(log_phi(r, d, s)), std::numeric_limits<double>::denorm_min());
}

SobolevKernel::SobolevKernel(std::size_t d, double s, double scale, std::size_t table_size)
    : d_(d), s_(s)
{
    check_order(d, s);
    require(scale > 0 && std::isfinite(scale), "SobolevKernel: scale must be positive");
    require(table_size >= 2, "SobolevKernel: table needs at least two nodes");
    phi0_ = phi_s_closed_form(0.0, d, s);
    log_rmin_ = std::log(1e-6 * scale);
    log_rmax_ = std::log(1e3 * scale);
    step_ = (log_rmax_ - log_rmin_) / static_cast<double>(table_size - 1);
    g_.resize(table_size);
    dg_.resize(table_size);
    for (std::size_t i = 0; i < table_size; ++i)
    {
        const double r = std::exp(log_rmin_ + step_ * static_cast<double>(i));
        g_[i] = log_phi(r, d, s);
        dg_[i] = log_phi_slope(r, d, s);
        if (!std::isfinite(g_[i]) || !std::isfinite(dg_[i]))
            throw NumericalError("SobolevKernel: non-finite table entry");
    }
    if (g_[0] > std::log(phi0_) + 1e-12)
        throw NumericalError("SobolevKernel: table exceeds value at zero");
    // Near r = 0 consecutive nodes differ by less than rounding noise; allow
    // that much and clamp, anything larger is a real defect.
    for (std::size_t i = 1; i < table_size; ++i)
    {
        if (g_[i] > g_[i - 1] + 1e-12)
            throw NumericalError("SobolevKernel: table is not nonincreasing");
        g_[i] = std::min(g_[i], g_[i - 1]);
    }
    g_[0] = std::min(g_[0], std::log(phi0_));
}

double SobolevKernel::operator()(double r) const
{
    if (!(r > 0))
    {
        require(r == 0, "SobolevKernel: radius must be >= 0");
        return phi0_;
    }
    const double u = std::log(r);
    if (u <= log_rmin_)
    {
        const double rmin = std::exp(log_rmin_);
        const double p_min = std::exp(g_.front());
        return phi0_ + (p_min - phi0_) * (r / rmin);
    }
    if (u >= log_rmax_)
        return std::max(std::exp(log_phi(r, d_, s_)), std::numeric_limits<double>::denorm_min());
    const double pos = (u - log_rmin_) / step_;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= g_.size() - 1)
        i = g_.size() - 2;
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    const double g = h00 * g_[i] + h10 * step_ * dg_[i] + h01 * g_[i + 1] + h11 * step_ * dg_[i + 1];
    return std::max(std::exp(g), std::numeric_limits<double>::denorm_min());
}

double phi_s(double r, std::size_t d, double s)
{
    check_order(d, s);
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, double>, std::shared_ptr<const SobolevKernel>> cache;
    std::shared_ptr<const SobolevKernel> kernel;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto& slot = cache[{d, s}];
        if (!slot)
            slot = std::make_shared<const SobolevKernel>(d, s);
        kernel = slot;
    }
    return (*kernel)(r);
}

}  // namespace chaoskit::metrics
