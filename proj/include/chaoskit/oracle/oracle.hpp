// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace chaoskit::oracle
{

/*!
 * Finite state space E = {0, ..., m-1}. N-particle configurations are
 * indexed mixed-radix little-endian: index = x_1 + m x_2 + ... + m^{N-1} x_N.
 */
struct FiniteModel
{
    enum class Kind
    {
        mean_field,
        collision
    };
    //! Jump rate of a particle in state e; `hist` is counts / N (self included).
    using JumpRate = std::function<double(std::size_t e, std::span<const double> hist)>;
    //! Post-jump law from e, written into `row` (size m).
    using JumpKernel =
        std::function<void(std::size_t e, std::span<const double> hist, std::span<double> row)>;
    using PairRate = std::function<double(std::size_t e1, std::size_t e2)>;
    //! Post-collision law of the pair, written into `out` (m x m, row f1, column f2).
    using PairKernel = std::function<void(std::size_t e1, std::size_t e2, std::span<double> out)>;

    Kind kind{Kind::mean_field};
    std::size_t m{0};
    JumpRate jump_rate;
    JumpKernel jump_kernel;
    PairRate pair_rate;
    PairKernel pair_kernel;
    std::size_t cap{2000000};  //!< largest m^N accepted

    static FiniteModel mean_field(std::size_t m, JumpRate rate, JumpKernel kernel);
    static FiniteModel collision(std::size_t m, PairRate rate, PairKernel kernel);
};

//! Sparse rate matrix Q on E^N (CSR, off-diagonal entries) plus its diagonal.
struct GeneratorMatrix
{
    std::size_t m{0};
    std::size_t n{0};
    std::size_t states{0};
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;
    std::vector<double> diag;

    double at(std::size_t x, std::size_t y) const;
    //! Dense copy (tests only; throws above 4096 states).
    std::vector<double> dense() const;
};

std::size_t state_count(std::size_t m, std::size_t n, std::size_t cap = 2000000);
std::vector<std::size_t> decode(std::size_t index, std::size_t m, std::size_t n);
std::size_t encode(std::span<const std::size_t> xs, std::size_t m);
//! counts / N for a configuration index.
std::vector<double> histogram_of(std::size_t index, std::size_t m, std::size_t n);

/*!
 * Mean-field: sum over slots of lambda(x_i, hist) P_hist(x_i, .). Collision:
 * sum over pairs i < j of lambda(x_i, x_j) / N times the pair kernel.
 * Kernels must be row-stochastic to 1e-12.
 */
GeneratorMatrix build_generator(const FiniteModel& model, std::size_t n);

//! f_t = f_0 exp(t Q) by uniformization (row vector convention).
std::vector<double> exact_evolve(const GeneratorMatrix& q, std::span<const double> f0, double t);

//! Law of the first k slots.
std::vector<double> exact_marginal(std::span<const double> fn, std::size_t m, std::size_t n,
                                   std::size_t k);

//! F^{k,N} = sum_x f^N(x) mu_x^{(x) k}.
std::vector<double> exact_moment_measure(std::span<const double> fn, std::size_t m, std::size_t n,
                                         std::size_t k);

//! f^{(x) n}.
std::vector<double> product_measure(std::span<const double> f, std::size_t n);

bool is_symmetric(std::span<const double> fn, std::size_t m, std::size_t n, double tol = 1e-12);
//! Average over all slot permutations.
std::vector<double> symmetrize(std::span<const double> fn, std::size_t m, std::size_t n);

struct GrunbaumCheck
{
    double tv{0};  //!< sum |f^{k,N} - F^{k,N}|
    double bound{0};
    bool pass{false};
};
GrunbaumCheck check_grunbaum(std::span<const double> fn, std::size_t m, std::size_t n,
                             std::size_t k);

struct IsometryCheck
{
    double lhs{0};  //!< W1 on E^N with the normalized product distance
    double rhs{0};  //!< W1 of the empirical-measure pushforwards
    double gap{0};
};
//! `ground` is the m x m metric on E; at most 1000 configurations.
IsometryCheck check_w1_isometry(std::span<const double> fn, std::span<const double> gn,
                                std::size_t m, std::size_t n, std::span<const double> ground);

struct CsiszarCheck
{
    double lhs{0};  //!< H(f^{k,N} | f^{(x) k})
    double rhs{0};  //!< (k / N) H(f^N | f^{(x) N})
    bool pass{false};
};
CsiszarCheck check_csiszar(std::span<const double> fn, std::span<const double> f, std::size_t m,
                           std::size_t n, std::size_t k);

//! RK4 for d/dt f = f L_f on E (steps = 0 picks 1000 per unit time).
std::vector<double> nonlinear_finite_ode(const FiniteModel& model, std::span<const double> f0,
                                         double t, std::size_t steps = 0);

//! Choose-the-leader: rate 1, leader drawn from hist (self included), then K.
FiniteModel choose_leader(std::size_t m, std::vector<double> kernel);

/*!
 * Exchange collisions: rate `same` for equal states and `differ` otherwise;
 * the pair moves to (f1, f2) uniform among pairs with f1 + f2 = e1 + e2 mod m.
 */
FiniteModel exchange(std::size_t m, double same, double differ);

//! CSV with columns state,probability.
void write_distribution(std::ostream& os, std::span<const double> f);

}  // namespace chaoskit::oracle
