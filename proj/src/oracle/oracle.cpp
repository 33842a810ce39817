// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/metrics/assignment.hpp"
#include "chaoskit/metrics/metrics.hpp"

namespace chaoskit::oracle
{
namespace
{
std::size_t power(std::size_t m, std::size_t n)
{
    std::size_t p = 1;
    for (std::size_t i = 0; i < n; ++i)
        p *= m;
    return p;
}

void check_row(std::span<const double> row, const char* what)
{
    double s = 0;
    for (double v : row)
    {
        require(v >= 0 && std::isfinite(v), std::string(what) + ": negative or non-finite kernel entry");
        s += v;
    }
    require(std::abs(s - 1) <= 1e-12, std::string(what) + ": kernel row does not sum to 1");
}
}  // namespace

FiniteModel FiniteModel::mean_field(std::size_t m, JumpRate rate, JumpKernel kernel)
{
    require(m >= 1, "finite model: m must be >= 1");
    FiniteModel f;
    f.kind = Kind::mean_field;
    f.m = m;
    f.jump_rate = std::move(rate);
    f.jump_kernel = std::move(kernel);
    return f;
}

FiniteModel FiniteModel::collision(std::size_t m, PairRate rate, PairKernel kernel)
{
    require(m >= 1, "finite model: m must be >= 1");
    FiniteModel f;
    f.kind = Kind::collision;
    f.m = m;
    f.pair_rate = std::move(rate);
    f.pair_kernel = std::move(kernel);
    return f;
}

double GeneratorMatrix::at(std::size_t x, std::size_t y) const
{
    if (x == y)
        return diag[x];
    for (std::size_t k = row_ptr[x]; k < row_ptr[x + 1]; ++k)
        if (col[k] == y)
            return val[k];
    return 0.0;
}

std::vector<double> GeneratorMatrix::dense() const
{
    require(states <= 4096, "generator: too many states for a dense copy");
    std::vector<double> d(states * states, 0.0);
    for (std::size_t x = 0; x < states; ++x)
    {
        d[x * states + x] = diag[x];
        for (std::size_t k = row_ptr[x]; k < row_ptr[x + 1]; ++k)
            d[x * states + col[k]] = val[k];
    }
    return d;
}

std::size_t state_count(std::size_t m, std::size_t n, std::size_t cap)
{
    require(m >= 1 && n >= 1, "state count: m and N must be >= 1");
    std::size_t p = 1;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (p > cap / m)
            throw PreconditionError("m^N = " + std::to_string(m) + "^" + std::to_string(n)
                                    + " exceeds the state cap " + std::to_string(cap));
        p *= m;
    }
    require(p <= cap, "m^N exceeds the state cap " + std::to_string(cap));
    return p;
}

std::vector<std::size_t> decode(std::size_t index, std::size_t m, std::size_t n)
{
    std::vector<std::size_t> xs(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        xs[i] = index % m;
        index /= m;
    }
    return xs;
}

std::size_t encode(std::span<const std::size_t> xs, std::size_t m)
{
    std::size_t idx = 0;
    for (std::size_t i = xs.size(); i-- > 0;)
        idx = idx * m + xs[i];
    return idx;
}

std::vector<double> histogram_of(std::size_t index, std::size_t m, std::size_t n)
{
    std::vector<double> h(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        h[index % m] += 1.0 / static_cast<double>(n);
        index /= m;
    }
    return h;
}

GeneratorMatrix build_generator(const FiniteModel& model, std::size_t n)
{
    const std::size_t m = model.m;
    GeneratorMatrix q;
    q.m = m;
    q.n = n;
    q.states = state_count(m, n, model.cap);
    q.row_ptr.assign(1, 0);
    q.diag.assign(q.states, 0.0);
    std::vector<std::size_t> stride(n);
    for (std::size_t i = 0; i < n; ++i)
        stride[i] = power(m, i);
    std::map<std::size_t, double> row;
    std::vector<double> kernel(m * m);
    const double nd = static_cast<double>(n);
    for (std::size_t x = 0; x < q.states; ++x)
    {
        row.clear();
        const auto xs = decode(x, m, n);
        if (model.kind == FiniteModel::Kind::mean_field)
        {
            require(model.jump_rate && model.jump_kernel, "finite model: missing jump rate or kernel");
            const auto hist = histogram_of(x, m, n);
            std::span<double> out(kernel.data(), m);
            for (std::size_t i = 0; i < n; ++i)
            {
                const std::size_t e = xs[i];
                const double lambda = model.jump_rate(e, hist);
                require(lambda >= 0 && std::isfinite(lambda), "finite model: negative jump rate");
                if (lambda == 0)
                    continue;
                model.jump_kernel(e, hist, out);
                check_row(out, "finite model");
                for (std::size_t f = 0; f < m; ++f)
                    if (f != e && out[f] > 0)
                        row[x + f * stride[i] - e * stride[i]] += lambda * out[f];
            }
        }
        else
        {
            require(model.pair_rate && model.pair_kernel, "finite model: missing pair rate or kernel");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                {
                    const std::size_t a = xs[i], b = xs[j];
                    const double lambda = model.pair_rate(a, b);
                    require(lambda >= 0 && std::isfinite(lambda), "finite model: negative pair rate");
                    if (lambda == 0)
                        continue;
                    model.pair_kernel(a, b, kernel);
                    check_row(kernel, "finite model");
                    for (std::size_t f1 = 0; f1 < m; ++f1)
                        for (std::size_t f2 = 0; f2 < m; ++f2)
                        {
                            const double p = kernel[f1 * m + f2];
                            if (p <= 0 || (f1 == a && f2 == b))
                                continue;
                            const std::size_t y =
                                x + f1 * stride[i] - a * stride[i] + f2 * stride[j] - b * stride[j];
                            row[y] += lambda / nd * p;
                        }
                }
        }
        double out_rate = 0;
        for (const auto& [y, r] : row)
        {
            q.col.push_back(y);
            q.val.push_back(r);
            out_rate += r;
        }
        q.diag[x] = -out_rate;
        q.row_ptr.push_back(q.col.size());
    }
    return q;
}

std::vector<double> exact_evolve(const GeneratorMatrix& q, std::span<const double> f0, double t)
{
    require(t >= 0 && std::isfinite(t), "exact_evolve: t must be finite and >= 0");
    require(f0.size() == q.states, "exact_evolve: initial law has the wrong size");
    std::vector<double> f(f0.begin(), f0.end());
    double eta = 0;
    for (double d : q.diag)
        eta = std::max(eta, -d);
    if (t == 0 || eta == 0)
        return f;
    const double mu = eta * t;
    std::vector<double> out(q.states, 0.0), next(q.states);
    double cumulative = 0;
    for (std::size_t k = 0;; ++k)
    {
        const double kd = static_cast<double>(k);
        const double w = std::exp(-mu + kd * std::log(mu) - std::lgamma(kd + 1));
        for (std::size_t x = 0; x < q.states; ++x)
            out[x] += w * f[x];
        cumulative += w;
        if (kd > mu && 1 - cumulative < 1e-12)
            break;
        require(k < 100000000, "exact_evolve: uniformization did not converge");
        for (std::size_t y = 0; y < q.states; ++y)
            next[y] = f[y] * (1 + q.diag[y] / eta);
        for (std::size_t x = 0; x < q.states; ++x)
        {
            if (f[x] == 0)
                continue;
            for (std::size_t k2 = q.row_ptr[x]; k2 < q.row_ptr[x + 1]; ++k2)
                next[q.col[k2]] += f[x] * q.val[k2] / eta;
        }
        std::swap(f, next);
    }
    return out;
}

bool is_symmetric(std::span<const double> fn, std::size_t m, std::size_t n, double tol)
{
    require(fn.size() == power(m, n), "distribution size does not match m^N");
    if (n < 2)
        return true;
    for (std::size_t x = 0; x < fn.size(); ++x)
    {
        auto xs = decode(x, m, n);
        auto sw = xs;
        std::swap(sw[0], sw[1]);
        auto rot = xs;
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        if (std::abs(fn[x] - fn[encode(sw, m)]) > tol || std::abs(fn[x] - fn[encode(rot, m)]) > tol)
            return false;
    }
    return true;
}

std::vector<double> symmetrize(std::span<const double> fn, std::size_t m, std::size_t n)
{
    require(fn.size() == power(m, n), "distribution size does not match m^N");
    require(n <= 8, "symmetrize: N must be <= 8");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> out(fn.size(), 0.0);
    double count = 0;
    std::vector<std::size_t> ys(n);
    do
    {
        for (std::size_t x = 0; x < fn.size(); ++x)
        {
            const auto xs = decode(x, m, n);
            for (std::size_t i = 0; i < n; ++i)
                ys[i] = xs[perm[i]];
            out[encode(ys, m)] += fn[x];
        }
        count += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : out)
        v /= count;
    return out;
}

std::vector<double> exact_marginal(std::span<const double> fn, std::size_t m, std::size_t n,
                                   std::size_t k)
{
    require(k >= 1 && k <= n, "exact_marginal: need 1 <= k <= N");
    require(is_symmetric(fn, m, n, 1e-9), "exact_marginal: the law is not symmetric");
    const std::size_t mk = power(m, k);
    std::vector<double> out(mk, 0.0);
    for (std::size_t x = 0; x < fn.size(); ++x)
        out[x % mk] += fn[x];
    return out;
}

std::vector<double> exact_moment_measure(std::span<const double> fn, std::size_t m, std::size_t n,
                                         std::size_t k)
{
    require(k >= 1, "exact_moment_measure: k must be >= 1");
    require(fn.size() == power(m, n), "distribution size does not match m^N");
    const std::size_t mk = state_count(m, k);
    require(static_cast<double>(mk) * static_cast<double>(fn.size()) <= 1e9,
            "exact_moment_measure: m^k * m^N exceeds the enumeration cap");
    std::vector<double> out(mk, 0.0);
    for (std::size_t x = 0; x < fn.size(); ++x)
    {
        if (fn[x] == 0)
            continue;
        const auto h = histogram_of(x, m, n);
        for (std::size_t y = 0; y < mk; ++y)
        {
            double p = fn[x];
            std::size_t rest = y;
            for (std::size_t l = 0; l < k && p > 0; ++l)
            {
                p *= h[rest % m];
                rest /= m;
            }
            out[y] += p;
        }
    }
    return out;
}

std::vector<double> product_measure(std::span<const double> f, std::size_t n)
{
    const std::size_t m = f.size();
    const std::size_t total = state_count(m, n);
    std::vector<double> out(total);
    for (std::size_t x = 0; x < total; ++x)
    {
        double p = 1;
        std::size_t rest = x;
        for (std::size_t i = 0; i < n; ++i)
        {
            p *= f[rest % m];
            rest /= m;
        }
        out[x] = p;
    }
    return out;
}

GrunbaumCheck check_grunbaum(std::span<const double> fn, std::size_t m, std::size_t n, std::size_t k)
{
    require(k >= 1 && k <= n, "check_grunbaum: need 1 <= k <= N");
    require(is_symmetric(fn, m, n, 1e-9), "check_grunbaum: the law is not symmetric");
    const auto marg = exact_marginal(fn, m, n, k);
    const auto mom = exact_moment_measure(fn, m, n, k);
    GrunbaumCheck c;
    for (std::size_t y = 0; y < marg.size(); ++y)
        c.tv += std::abs(marg[y] - mom[y]);
    const double kd = static_cast<double>(k);
    c.bound = 2 * kd * (kd - 1) / static_cast<double>(n);
    c.pass = c.tv <= c.bound + 1e-12;
    return c;
}

IsometryCheck check_w1_isometry(std::span<const double> fn, std::span<const double> gn,
                                std::size_t m, std::size_t n, std::span<const double> ground)
{
    require(fn.size() == gn.size(), "check_w1_isometry: laws of different sizes");
    require(fn.size() == power(m, n), "distribution size does not match m^N");
    require(fn.size() <= 1000, "check_w1_isometry: at most 1000 configurations");
    require(ground.size() == m * m, "check_w1_isometry: ground metric must be m x m");
    require(is_symmetric(fn, m, n, 1e-9) && is_symmetric(gn, m, n, 1e-9),
            "check_w1_isometry: the laws are not symmetric");
    const double nd = static_cast<double>(n);

    std::vector<std::size_t> sf, sg;
    for (std::size_t x = 0; x < fn.size(); ++x)
    {
        if (fn[x] > 0)
            sf.push_back(x);
        if (gn[x] > 0)
            sg.push_back(x);
    }
    std::vector<double> a, b, cost;
    for (auto x : sf)
        a.push_back(fn[x]);
    for (auto y : sg)
        b.push_back(gn[y]);
    for (auto x : sf)
    {
        const auto xs = decode(x, m, n);
        for (auto y : sg)
        {
            const auto ys = decode(y, m, n);
            double c = 0;
            for (std::size_t i = 0; i < n; ++i)
                c += ground[xs[i] * m + ys[i]];
            cost.push_back(c / nd);
        }
    }
    IsometryCheck out;
    out.lhs = metrics::transport_cost(a, b, cost);

    auto push = [&](std::span<const double> law) {
        std::map<std::vector<double>, double> agg;
        for (std::size_t x = 0; x < law.size(); ++x)
            if (law[x] > 0)
                agg[histogram_of(x, m, n)] += law[x];
        return agg;
    };
    const auto pf = push(fn), pg = push(gn);
    std::vector<double> pa, pb, pcost;
    for (const auto& [h, w] : pf)
        pa.push_back(w);
    for (const auto& [h, w] : pg)
        pb.push_back(w);
    for (const auto& [hf, wf] : pf)
        for (const auto& [hg, wg] : pg)
            pcost.push_back(metrics::transport_cost(hf, hg, ground));
    out.rhs = metrics::transport_cost(pa, pb, pcost);
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

CsiszarCheck check_csiszar(std::span<const double> fn, std::span<const double> f, std::size_t m,
                           std::size_t n, std::size_t k)
{
    require(f.size() == m, "check_csiszar: reference law must have m entries");
    require(k >= 1 && k <= n, "check_csiszar: need 1 <= k <= N");
    require(is_symmetric(fn, m, n, 1e-9), "check_csiszar: the law is not symmetric");
    const auto marg = exact_marginal(fn, m, n, k);
    CsiszarCheck c;
    c.lhs = metrics::relative_entropy_discrete(marg, product_measure(f, k));
    c.rhs = static_cast<double>(k) / static_cast<double>(n)
            * metrics::relative_entropy_discrete(fn, product_measure(f, n));
    c.pass = c.lhs <= c.rhs + 1e-12;
    return c;
}

std::vector<double> nonlinear_finite_ode(const FiniteModel& model, std::span<const double> f0,
                                         double t, std::size_t steps)
{
    require(model.kind == FiniteModel::Kind::mean_field,
            "nonlinear_finite_ode: needs a mean-field mechanism");
    require(f0.size() == model.m, "nonlinear_finite_ode: initial law must have m entries");
    require(t >= 0, "nonlinear_finite_ode: t must be >= 0");
    const std::size_t m = model.m;
    if (steps == 0)
        steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1000 * t)));
    std::vector<double> row(m);
    auto deriv = [&](const std::vector<double>& f, std::vector<double>& df) {
        std::fill(df.begin(), df.end(), 0.0);
        for (std::size_t e = 0; e < m; ++e)
        {
            if (f[e] == 0)
                continue;
            const double lambda = model.jump_rate(e, f);
            if (lambda == 0)
                continue;
            model.jump_kernel(e, f, row);
            for (std::size_t g = 0; g < m; ++g)
                df[g] += f[e] * lambda * row[g];
            df[e] -= f[e] * lambda;
        }
    };
    std::vector<double> f(f0.begin(), f0.end()), k1(m), k2(m), k3(m), k4(m), y(m);
    const double h = t / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps && h > 0; ++s)
    {
        deriv(f, k1);
        for (std::size_t e = 0; e < m; ++e)
            y[e] = f[e] + 0.5 * h * k1[e];
        deriv(y, k2);
        for (std::size_t e = 0; e < m; ++e)
            y[e] = f[e] + 0.5 * h * k2[e];
        deriv(y, k3);
        for (std::size_t e = 0; e < m; ++e)
            y[e] = f[e] + h * k3[e];
        deriv(y, k4);
        for (std::size_t e = 0; e < m; ++e)
            f[e] += h / 6 * (k1[e] + 2 * k2[e] + 2 * k3[e] + k4[e]);
    }
    return f;
}

FiniteModel choose_leader(std::size_t m, std::vector<double> kernel)
{
    require(kernel.size() == m * m, "choose_leader: kernel must be m x m");
    for (std::size_t i = 0; i < m; ++i)
        check_row(std::span<const double>(kernel).subspan(i * m, m), "choose_leader");
    return FiniteModel::mean_field(
        m, [](std::size_t, std::span<const double>) { return 1.0; },
        [m, kernel](std::size_t, std::span<const double> hist, std::span<double> row) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t l = 0; l < m; ++l)
                for (std::size_t g = 0; g < m; ++g)
                    row[g] += hist[l] * kernel[l * m + g];
            double s = 0;
            for (double v : row)
                s += v;
            for (auto& v : row)
                v /= s;
        });
}

FiniteModel exchange(std::size_t m, double same, double differ)
{
    require(same >= 0 && differ >= 0, "exchange: rates must be >= 0");
    return FiniteModel::collision(
        m, [same, differ](std::size_t a, std::size_t b) { return a == b ? same : differ; },
        [m](std::size_t a, std::size_t b, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            const double p = 1.0 / static_cast<double>(m);
            for (std::size_t f1 = 0; f1 < m; ++f1)
                out[f1 * m + (a + b + m - f1) % m] = p;
        });
}

void write_distribution(std::ostream& os, std::span<const double> f)
{
    os << "state,probability\n";
    for (std::size_t x = 0; x < f.size(); ++x)
        os << x << ',' << format_real(f[x]) << '\n';
}

}  // namespace chaoskit::oracle
