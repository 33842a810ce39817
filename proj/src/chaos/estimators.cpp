// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoskit/chaos/chaos.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/metrics/assignment.hpp"

namespace chaoskit::chaos
{

namespace
{
//! R tuples of `len` points of dimension d, row-major.
struct TupleCloud
{
    std::size_t count{0};
    std::size_t len{0};
    std::size_t dim{0};
    std::vector<double> data;

    std::span<const double> point(std::size_t r, std::size_t a) const
    {
        return {data.data() + (r * len + a) * dim, dim};
    }
};

TupleCloud particle_tuples(std::span<const ParticleState> runs, std::size_t len)
{
    TupleCloud c{runs.size(), len, runs.front().dim, {}};
    c.data.reserve(c.count * len * c.dim);
    for (const auto& s : runs)
        c.data.insert(c.data.end(), s.xs.begin(), s.xs.begin() + static_cast<long>(len * s.dim));
    return c;
}

TupleCloud reference_tuples(const MeasureView& ref, std::size_t count, std::size_t len,
                            RngStream rng)
{
    TupleCloud c{count, len, ref.dim, {}};
    c.data.reserve(count * len * ref.dim);
    for (std::size_t i = 0; i < count * len; ++i)
    {
        auto a = ref.atom(rng.below(ref.n));
        c.data.insert(c.data.end(), a.begin(), a.end());
    }
    return c;
}

//! W_p between tuple clouds (rows of `a` picked by `rows`) under the normalized cost.
double tuple_wp(const TupleCloud& a, std::span<const std::size_t> rows, const TupleCloud& b,
                Domain domain, int p)
{
    const std::size_t n = rows.size();
    std::vector<double> cost(n * n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j)
        {
            double c = 0;
            for (std::size_t s = 0; s < a.len; ++s)
            {
                const double d = ground_distance(a.point(rows[i], s), b.point(j, s), domain);
                c += p == 1 ? d : d * d;
            }
            cost[i * n + j] = c / static_cast<double>(a.len);
        }
    });
    auto match = metrics::solve_assignment(n, std::span<const double>(cost));
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += cost[i * n + match[i]];
    total /= static_cast<double>(n);
    return p == 1 ? total : std::sqrt(total);
}

Estimate tuple_estimate(const TupleCloud& particles, const TupleCloud& ref, Domain domain, int p,
                        std::size_t resamples, const RngStream& rng)
{
    std::vector<std::size_t> rows(particles.count);
    std::iota(rows.begin(), rows.end(), 0);
    Estimate e{tuple_wp(particles, rows, ref, domain, p), {}};
    std::vector<double> boot(resamples);
    for (std::size_t b = 0; b < resamples; ++b)
    {
        RngStream r = rng.split(b);
        for (auto& v : rows)
            v = r.below(particles.count);
        boot[b] = tuple_wp(particles, rows, ref, domain, p);
    }
    e.ci = {e.value, e.value};
    if (resamples >= 2)
    {
        std::sort(boot.begin(), boot.end());
        // basic bootstrap interval
        e.ci = {std::max(0.0, std::min(e.value, 2 * e.value - quantile_sorted(boot, 0.975))),
                std::max(e.value, 2 * e.value - quantile_sorted(boot, 0.025))};
    }
    return e;
}

std::vector<double> subsample(const MeasureView& ref, std::size_t n, RngStream& rng)
{
    std::vector<std::size_t> idx(ref.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
        std::swap(idx[i], idx[i + rng.below(ref.n - i)]);
    std::vector<double> out;
    out.reserve(n * ref.dim);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto a = ref.atom(idx[i]);
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

//! W_p(mu, ref): exact on the line, otherwise against an mu.n-atom subsample.
double empirical_wp(const MeasureView& mu, const MeasureView& ref, int p, RngStream& rng)
{
    if (mu.dim == 1)
        return metrics::wp_exact_1d(mu, ref, p);
    require(ref.n >= mu.n, "W_p: reference has fewer atoms than the empirical measure");
    auto sub = subsample(ref, mu.n, rng);
    return metrics::wp_assignment(mu, MeasureView{sub, mu.n, mu.dim, ref.domain}, p,
                                  std::max(mu.n, metrics::default_assignment_cap));
}

std::vector<double> draw_atoms(const MeasureView& ref, std::size_t n, RngStream& rng)
{
    std::vector<double> out;
    out.reserve(n * ref.dim);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto a = ref.atom(rng.below(ref.n));
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

MeasureContext context_of(const DiffusionModel& model, const ParticleState& s,
                          std::vector<double>& summary)
{
    summary = summarize_with(model.summarize, s.view());
    MeasureContext ctx;
    if (model.needs_atoms)
        ctx.atoms = s.view();
    ctx.summary = summary;
    return ctx;
}
}  // namespace

//---------------------------------------------------------------------------//
OmegaEstimates omega_estimates(std::span<const ParticleState> runs, const MeasureView& reference,
                               const RngStream& rng, const OmegaOptions& options)
{
    require(runs.size() >= 30, "omega_estimates: need at least 30 replicas, got "
                                   + std::to_string(runs.size()));
    require(options.p == 1 || options.p == 2, "omega_estimates: p must be 1 or 2");
    const std::size_t n = runs.front().n, d = runs.front().dim;
    for (const auto& s : runs)
        require(s.n == n && s.dim == d, "omega_estimates: replicas differ in N or dimension");
    require(reference.dim == d, "omega_estimates: reference dimension mismatch");
    require(reference.n >= 4, "omega_estimates: reference needs at least 4 atoms");
    require(options.k >= 1 && options.k <= n, "omega_estimates: need 1 <= k <= N");
    const Domain domain = runs.front().domain;
    const std::size_t r = runs.size();
    const int p = options.p;

    OmegaEstimates out;
    auto boot = rng.split(purpose::bootstrap);
    out.omega_k = tuple_estimate(particle_tuples(runs, options.k),
                                 reference_tuples(reference, r, options.k, rng.split(1)), domain,
                                 p, options.bootstrap, boot.split(1));
    out.omega_n = tuple_estimate(particle_tuples(runs, n),
                                 reference_tuples(reference, r, n, rng.split(2)), domain, p,
                                 options.bootstrap, boot.split(2));

    out.inf_per_replica.resize(r);
    parallel_for(r, [&](std::size_t i) {
        RngStream s = rng.split(3).split(i);
        out.inf_per_replica[i] = empirical_wp(runs[i].view(), reference, p, s);
    });
    out.omega_inf = {mean(out.inf_per_replica),
                     bootstrap_mean_ci(out.inf_per_replica, boot.split(3))};

    // split-half noise floor
    RngStream shuffle = rng.split(4);
    std::vector<std::size_t> idx(reference.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[shuffle.below(i)]);
    const std::size_t half = reference.n / 2;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < 2 * half; ++i)
    {
        auto atom = reference.atom(idx[i]);
        (i < half ? a : b).insert((i < half ? a : b).end(), atom.begin(), atom.end());
    }
    MeasureView va{a, half, d, domain}, vb{b, half, d, domain};
    std::vector<std::size_t> rows(r);
    std::iota(rows.begin(), rows.end(), 0);
    out.floor_k = tuple_wp(reference_tuples(va, r, options.k, rng.split(5)), rows,
                           reference_tuples(vb, r, options.k, rng.split(6)), domain, p);
    out.floor_n = tuple_wp(reference_tuples(va, r, n, rng.split(7)), rows,
                           reference_tuples(vb, r, n, rng.split(8)), domain, p);
    std::vector<double> floors(r);
    parallel_for(r, [&](std::size_t i) {
        RngStream s = rng.split(9).split(i);
        auto atoms = draw_atoms(va, n, s);
        floors[i] = empirical_wp(MeasureView{atoms, n, d, domain}, vb, p, s);
    });
    out.floor_inf = mean(floors);
    return out;
}

double fournier_guillin_beta(double n, std::size_t d, double p, double q)
{
    require(n >= 1, "fournier_guillin_beta: N must be >= 1");
    require(d >= 1 && p > 0, "fournier_guillin_beta: need d >= 1 and p > 0");
    require(q > p, "fournier_guillin_beta: the moment order q must exceed p");
    const double half_d = static_cast<double>(d) / 2.0;
    const double tail = std::pow(n, -(q - p) / q);
    if (p > half_d)
    {
        require(q != 2 * p, "fournier_guillin_beta: q = 2p is excluded when p > d/2");
        return std::pow(n, -0.5) + tail;
    }
    if (p == half_d)
    {
        require(q != 2 * p, "fournier_guillin_beta: q = 2p is excluded when p = d/2");
        return std::pow(n, -0.5) * std::log(1 + n) + tail;
    }
    const double dd = static_cast<double>(d);
    require(q != dd / (dd - p), "fournier_guillin_beta: q = d/(d-p) is excluded when p < d/2");
    return std::pow(n, -p / dd) + tail;
}

//---------------------------------------------------------------------------//
RateFit iid_wasserstein_rate_check(const PointSampler& f, std::size_t d, int p,
                                   std::span<const std::size_t> ns, std::size_t reps,
                                   const RngStream& rng, std::size_t reference_size)
{
    require(!ns.empty(), "iid_wasserstein_rate_check: empty N list");
    require(reps >= 1, "iid_wasserstein_rate_check: need at least one replica");
    require(p == 1 || p == 2, "iid_wasserstein_rate_check: p must be 1 or 2");
    std::vector<double> ref(reference_size * d);
    RngStream rs = rng.split(purpose::reference);
    for (std::size_t i = 0; i < reference_size; ++i)
        f(rs, std::span<double>(ref).subspan(i * d, d));
    const MeasureView rv{ref, reference_size, d, Domain::euclidean};

    RateFit out;
    std::vector<std::vector<double>> samples;
    for (std::size_t n : ns)
    {
        require(n >= 1 && n <= reference_size,
                "iid_wasserstein_rate_check: N must lie in [1, reference size]");
        std::vector<double> vals(reps);
        auto one = [&](std::size_t r) {
            RngStream s = rng.split(n).split(r);
            std::vector<double> x(n * d);
            for (std::size_t i = 0; i < n; ++i)
                f(s, std::span<double>(x).subspan(i * d, d));
            RngStream sub = s.split(purpose::sampling);
            vals[r] = empirical_wp(MeasureView{x, n, d, Domain::euclidean}, rv, p, sub);
        };
        if (d == 1 || n <= metrics::default_assignment_cap)
            parallel_for(reps, one);
        else
            for (std::size_t r = 0; r < reps; ++r)
                one(r);
        out.ns.push_back(n);
        out.means.push_back(mean(vals));
        out.cis.push_back(bootstrap_mean_ci(vals, rng.split(purpose::bootstrap).split(n)));
        samples.push_back(std::move(vals));
    }
    out.fitted = ns.size() >= 2
                 && std::all_of(out.means.begin(), out.means.end(), [](double m) { return m > 0; });
    if (out.fitted)
    {
        std::vector<double> xs(ns.begin(), ns.end());
        out.fit = loglog_slope(xs, samples, rng.split(purpose::bootstrap));
    }
    return out;
}

//---------------------------------------------------------------------------//
GirsanovEstimate girsanov_entropy_rhs(const DiffusionModel& model, std::size_t n,
                                      const mckean::FrozenFlow& reference, double t_final,
                                      double dt, const PointSampler& init, const RngStream& rng,
                                      std::size_t reps)
{
    require(model.scalar_sigma && std::abs(*model.scalar_sigma - 1.0) < 1e-12,
            "girsanov_entropy_rhs: sigma must be the identity");
    require(reps >= 2, "girsanov_entropy_rhs: need at least two replicas");
    const std::size_t steps = step_count(t_final, dt);
    require(std::abs(reference.dt - dt) <= 1e-12 * dt && reference.steps >= steps,
            "girsanov_entropy_rhs: reference flow must share the time grid");

    GirsanovEstimate out;
    out.n = n;
    out.per_replica.resize(reps);
    const std::size_t d = model.dim;
    parallel_for(reps, [&](std::size_t r) {
        mckean::DiffusionRun run;
        run.model = model;
        run.n = n;
        run.dt = dt;
        run.t_final = t_final;
        run.root = rng;
        run.replica = r;
        run.init = init;
        auto bundle = mckean::simulate_particles(run);
        std::vector<double> summary, bn(d), bf(d);
        double total = 0;
        for (std::size_t s = 0; s < steps; ++s)
        {
            const auto& state = bundle.states[s];
            auto ctx_n = context_of(model, state, summary);
            auto ctx_f = reference.context(s);
            double sum = 0;
            for (std::size_t i = 0; i < n; ++i)
            {
                model.drift(state.point(i), ctx_n, bn);
                model.drift(state.point(i), ctx_f, bf);
                for (std::size_t c = 0; c < d; ++c)
                {
                    const double diff = bn[c] - bf[c];
                    sum += diff * diff;
                }
            }
            total += sum / static_cast<double>(n) * dt;
        }
        out.per_replica[r] = 0.5 * total;
    });
    out.bound = {mean(out.per_replica),
                 bootstrap_mean_ci(out.per_replica, rng.split(purpose::bootstrap))};
    return out;
}

//---------------------------------------------------------------------------//
BlockBoundCheck hs_block_bound_check(std::span<const ParticleState> samples, std::size_t m,
                                     const metrics::SobolevKernel& kernel, const RngStream& rng)
{
    require(!samples.empty(), "hs_block_bound_check: no samples");
    const std::size_t n = samples.front().n, d = samples.front().dim;
    require(m >= 1 && m <= n, "hs_block_bound_check: need 1 <= M <= N");
    require(kernel.dim() == d, "hs_block_bound_check: kernel dimension mismatch");
    require(kernel.order() > static_cast<double>(d) / 2,
            "hs_block_bound_check: need s > d/2");
    BlockBoundCheck out;
    out.per_replica.resize(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
    {
        const auto& s = samples[r];
        require(s.n == n && s.dim == d, "hs_block_bound_check: replicas differ in N or dimension");
        MeasureView block{std::span<const double>(s.xs).first(m * d), m, d, Domain::euclidean};
        MeasureView all{s.xs, n, d, Domain::euclidean};
        out.per_replica[r] = m == n ? 0.0 : metrics::hs_sq(block, all, kernel);
    }
    out.lhs = mean(out.per_replica);
    out.ci = bootstrap_mean_ci(out.per_replica, rng.split(purpose::bootstrap));
    out.rhs = 2 * kernel.at_zero() * (1.0 / static_cast<double>(m) - 1.0 / static_cast<double>(n));
    out.pass = out.lhs <= out.rhs + 2 * (out.ci.hi - out.ci.lo);
    return out;
}

//---------------------------------------------------------------------------//
std::vector<double> finite_family_means(std::span<const double> f,
                                        const metrics::LipschitzFamily& family)
{
    require(family.dim() == 1, "finite_family_means: family must act on the line");
    std::vector<double> out(family.size(), 0.0);
    for (std::size_t k = 0; k < family.size(); ++k)
        for (std::size_t e = 0; e < f.size(); ++e)
        {
            const double x = static_cast<double>(e);
            out[k] += f[e] * family(k, std::span<const double>(&x, 1));
        }
    return out;
}

ToyLinearReport toy_linear_d2_check(const jumps::JumpRun& base,
                                    const metrics::LipschitzFamily& family,
                                    std::span<const double> ref_initial,
                                    std::span<const double> ref_final,
                                    const ToyLinearOptions& options)
{
    const std::size_t nf = family.size();
    require(nf >= 1, "toy_linear_d2_check: empty test family");
    require(ref_initial.size() == nf && ref_final.size() == nf,
            "toy_linear_d2_check: one reference value per test function");
    require(family.dim() == base.model.dim, "toy_linear_d2_check: family dimension mismatch");
    require(!options.ns.empty(), "toy_linear_d2_check: empty N list");
    require(options.reps >= 2, "toy_linear_d2_check: need at least two replicas");
    require(std::isfinite(base.model.flow_lipschitz),
            "toy_linear_d2_check: the flow must be Lipschitz");

    ToyLinearReport out;
    out.ns = options.ns;
    const std::size_t reps = options.reps;
    for (std::size_t n : options.ns)
    {
        std::vector<double> y0(reps * nf), yt(reps * nf);
        parallel_for(reps, [&](std::size_t r) {
            jumps::JumpRun run = base;
            run.n = n;
            run.replica = r;
            run.record_dt = 0;
            run.keep_events = false;
            auto res = jumps::pdmp_simulate(run);
            const auto& s0 = res.bundle.states.front();
            const auto& st = res.bundle.final();
            for (std::size_t k = 0; k < nf; ++k)
            {
                double a = 0, b = 0;
                for (std::size_t i = 0; i < n; ++i)
                {
                    a += family(k, s0.point(i));
                    b += family(k, st.point(i));
                }
                y0[r * nf + k] = a / static_cast<double>(n) - ref_initial[k];
                yt[r * nf + k] = b / static_cast<double>(n) - ref_final[k];
            }
        });
        auto sup = [&](const std::vector<double>& y, std::size_t& arg) {
            double best = -1;
            for (std::size_t k = 0; k < nf; ++k)
            {
                double acc = 0;
                for (std::size_t r = 0; r < reps; ++r)
                    acc += y[r * nf + k] * y[r * nf + k];
                acc /= static_cast<double>(reps);
                if (acc > best)
                {
                    best = acc;
                    arg = k;
                }
            }
            return best;
        };
        std::size_t k0 = 0, kt = 0;
        out.g_initial.push_back(sup(y0, k0));
        out.g_final.push_back(sup(yt, kt));
        std::vector<double> per(reps);
        for (std::size_t r = 0; r < reps; ++r)
        {
            per[r] = yt[r * nf + kt] * yt[r * nf + kt];
            if (options.subtract_initial)
                per[r] -= y0[r * nf + k0] * y0[r * nf + k0];
        }
        out.statistic.push_back(mean(per));
        out.cis.push_back(bootstrap_mean_ci(per, base.root.split(purpose::bootstrap).split(n)));
        out.samples.push_back(std::move(per));
    }
    out.fitted = out.ns.size() >= 2
                 && std::all_of(out.statistic.begin(), out.statistic.end(),
                                [](double v) { return v > 0; });
    if (out.fitted)
    {
        std::vector<double> xs(out.ns.begin(), out.ns.end());
        out.fit = loglog_slope(xs, out.samples, base.root.split(purpose::bootstrap));
    }
    return out;
}

}  // namespace chaoskit::chaos
