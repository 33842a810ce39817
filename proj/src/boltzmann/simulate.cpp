// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"

namespace chaoskit::boltzmann
{
namespace
{
//! Label-sorted particles with lazily applied free flight.
class Gas
{
  public:
    Gas(const CollisionRun& run, const RngStream& root)
        : model_(run.model), n_(run.n), d_(run.model.dim), x_(run.n * run.model.dim),
          clock_(root.split(purpose::clock)), last_(run.n, 0.0)
    {
        std::vector<std::uint64_t> labels = run.labels;
        if (labels.empty())
        {
            labels.resize(n_);
            std::iota(labels.begin(), labels.end(), std::uint64_t{0});
        }
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
        sorted_labels_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k)
        {
            sorted_labels_[k] = labels[order_[k]];
            if (k)
                require(sorted_labels_[k] != sorted_labels_[k - 1],
                        "collision run: duplicate particle label");
            if (run.initial)
            {
                auto src = run.initial->point(order_[k]);
                std::copy(src.begin(), src.end(), point(k).begin());
            }
            else
            {
                RngStream s = root.split(sorted_labels_[k]).split(purpose::init);
                run.init(s, point(k));
            }
            wrap(k);
        }
    }

    std::size_t size() const { return n_; }
    std::span<double> point(std::size_t k) { return {x_.data() + k * d_, d_}; }
    std::size_t external(std::size_t k) const { return order_[k]; }
    std::uint64_t label(std::size_t k) const { return sorted_labels_[k]; }
    RngStream& clock() { return clock_; }
    bool moves() const { return static_cast<bool>(model_.free_flight); }

    void bring(std::size_t k, double t)
    {
        if (model_.free_flight && t > last_[k])
        {
            model_.free_flight(point(k), t - last_[k]);
            wrap(k);
        }
        last_[k] = t;
    }

    void bring_all(double t)
    {
        for (std::size_t k = 0; k < n_; ++k)
            bring(k, t);
    }

    ParticleState snapshot(double t)
    {
        bring_all(t);
        ParticleState s(t, n_, d_, model_.domain);
        for (std::size_t k = 0; k < n_; ++k)
        {
            auto src = point(k);
            std::copy(src.begin(), src.end(), s.point(order_[k]).begin());
        }
        return s;
    }

    void wrap(std::size_t k)
    {
        if (model_.domain == Domain::torus)
            for (auto& c : point(k))
                c = wrap_angle(c);
    }

    double rate(std::size_t a, std::size_t b)
    {
        const double r = model_.rate(point(a), point(b));
        if (!(r >= 0) || !std::isfinite(r))
            throw NumericalError("collision rate is negative or non-finite for particles "
                                 + std::to_string(order_[a]) + " and " + std::to_string(order_[b]));
        return r;
    }

    //! Applies (psi1, psi2) to the pair; returns the parameter digest.
    std::uint64_t collide(std::size_t a, std::size_t b, RngStream& rng)
    {
        theta_.clear();
        model_.sample_theta(rng, theta_);
        out1_.resize(d_);
        out2_.resize(d_);
        model_.post(point(a), point(b), theta_, out1_, out2_);
        std::copy(out1_.begin(), out1_.end(), point(a).begin());
        std::copy(out2_.begin(), out2_.end(), point(b).begin());
        wrap(a);
        wrap(b);
        check(a);
        check(b);
        return digest(theta_);
    }

    //! Nanbu update of `self` against `other`.
    std::uint64_t collide_one(std::size_t self, std::size_t other, RngStream& rng)
    {
        theta_.clear();
        model_.sample_theta(rng, theta_);
        out1_.resize(d_);
        out2_.resize(d_);
        model_.post(point(self), point(other), theta_, out1_, out2_);
        std::copy(out1_.begin(), out1_.end(), point(self).begin());
        wrap(self);
        check(self);
        return digest(theta_);
    }

  private:
    void check(std::size_t k)
    {
        for (double c : point(k))
            if (!std::isfinite(c))
                throw NumericalError("collision produced a non-finite state at particle "
                                     + std::to_string(order_[k]));
    }

    const CollisionModel& model_;
    std::size_t n_, d_;
    std::vector<double> x_;
    std::vector<std::size_t> order_;
    std::vector<std::uint64_t> sorted_labels_;
    RngStream clock_;
    std::vector<double> last_;
    std::vector<double> theta_, out1_, out2_;
};

std::vector<double> record_grid(double t_final, double record_dt)
{
    if (record_dt <= 0)
        return {0.0, t_final};
    const std::size_t k = step_count(t_final, record_dt);
    std::vector<double> g(k + 1);
    for (std::size_t i = 0; i <= k; ++i)
        g[i] = static_cast<double>(i) * record_dt;
    g.back() = t_final;
    return g;
}

struct Recorder
{
    std::vector<double> grid;
    std::size_t next{0};
    CollisionResult* out;

    void until(Gas& gas, double t)
    {
        while (next < grid.size() && grid[next] <= t)
        {
            out->bundle.times.push_back(grid[next]);
            out->bundle.states.push_back(gas.snapshot(grid[next]));
            ++next;
        }
    }
};

void log_event(CollisionResult& res, const CollisionRun& run, Gas& gas, double t, std::size_t a,
               std::size_t b, bool accepted, std::uint64_t dig)
{
    if (accepted)
    {
        ++res.accepted;
        res.bundle.touches.push_back({t, static_cast<std::uint32_t>(gas.external(a)),
                                      static_cast<std::int64_t>(gas.external(b))});
    }
    if (!run.keep_events)
        return;
    CollisionEvent e;
    e.time = t;
    e.i = std::min(gas.external(a), gas.external(b));
    e.j = std::max(gas.external(a), gas.external(b));
    e.fictitious = !accepted;
    e.theta_digest = dig;
    res.events.push_back(e);
}

enum class Update
{
    both,
    one
};

CollisionResult run_uniform(const CollisionRun& run, Update update)
{
    run.validate();
    const auto& model = run.model;
    const RngStream root = run.root.split(run.replica);
    Gas gas(run, root);
    const std::size_t n = gas.size();
    CollisionResult res;
    Recorder rec{record_grid(run.t_final, run.record_dt), 0, &res};
    rec.until(gas, 0.0);
    RngStream& clock = gas.clock();
    double t = 0;
    if (n >= 2 && model.rate_bound > 0)
    {
        const double master = model.rate_bound * static_cast<double>(n - 1) / 2.0;
        for (;;)
        {
            t += clock.exponential(master);
            if (t > run.t_final)
                break;
            rec.until(gas, t);
            std::size_t a = static_cast<std::size_t>(clock.below(n));
            std::size_t b = static_cast<std::size_t>(clock.below(n - 1));
            if (b >= a)
                ++b;
            if (a > b)
                std::swap(a, b);
            const double u = clock.uniform();
            gas.bring(a, t);
            gas.bring(b, t);
            const double lambda = gas.rate(a, b);
            if (lambda > model.rate_bound * (1 + 1e-12))
                throw BoundViolation("collision rate " + format_real(lambda)
                                     + " exceeds the declared bound "
                                     + format_real(model.rate_bound) + " for particles "
                                     + std::to_string(gas.external(a)) + " and "
                                     + std::to_string(gas.external(b)));
            ++res.candidates;
            const bool accept = u * model.rate_bound <= lambda;
            std::uint64_t dig = 0;
            if (accept)
            {
                if (update == Update::both)
                    dig = gas.collide(a, b, clock);
                else if (clock.uniform() < 0.5)
                    dig = gas.collide_one(a, b, clock);
                else
                    dig = gas.collide_one(b, a, clock);
            }
            log_event(res, run, gas, t, a, b, accept, dig);
        }
    }
    rec.until(gas, run.t_final);
    return res;
}
}  // namespace

void write_collision_log(std::ostream& os, const std::vector<CollisionEvent>& events)
{
    os << "time,i,j,fictitious,theta_digest\n";
    for (const auto& e : events)
        os << format_real(e.time) << ',' << e.i << ',' << e.j << ',' << (e.fictitious ? 1 : 0)
           << ',' << format_hex(e.theta_digest) << '\n';
}

void CollisionRun::validate() const
{
    require(n >= 1, "collision run: N must be >= 1");
    require(t_final >= 0 && std::isfinite(t_final), "collision run: T must be finite and >= 0");
    require(model.rate != nullptr && model.post != nullptr && model.sample_theta != nullptr,
            "collision run: model needs rate, post and sample_theta");
    require(model.rate_bound >= 0, "collision run: rate bound must be >= 0");
    require(labels.empty() || labels.size() == n, "collision run: one label per particle");
    require(initial.has_value() || init != nullptr, "collision run: no initial law");
    if (initial)
    {
        require(initial->n == n && initial->dim == model.dim,
                "collision run: initial state shape mismatch");
        initial->validate();
    }
    require(dt_rate >= 0, "collision run: dt_rate must be >= 0");
}

CollisionResult uniform_clock_simulate(const CollisionRun& run)
{
    return run_uniform(run, Update::both);
}

CollisionResult nanbu_simulate(const CollisionRun& run) { return run_uniform(run, Update::one); }

CollisionResult pair_clock_simulate(const CollisionRun& run)
{
    run.validate();
    const RngStream root = run.root.split(run.replica);
    Gas gas(run, root);
    const std::size_t n = gas.size();
    const double nd = static_cast<double>(n);
    CollisionResult res;
    Recorder rec{record_grid(run.t_final, run.record_dt), 0, &res};
    rec.until(gas, 0.0);
    if (n < 2)
    {
        rec.until(gas, run.t_final);
        return res;
    }
    const double dt_rate = run.dt_rate > 0 ? run.dt_rate : run.t_final / 1e4;

    struct Pair
    {
        std::size_t a, b;
        RngStream rng;
        double threshold{0};
        double acc{0};
        double rate{0};
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
        {
            Pair p{a, b, root.split(purpose::pair).split(gas.label(a)).split(gas.label(b))};
            p.threshold = p.rng.exponential(1.0);
            pairs.push_back(std::move(p));
        }
    auto refresh = [&](Pair& p) { p.rate = gas.rate(p.a, p.b) / nd; };
    for (auto& p : pairs)
        refresh(p);

    double t = 0;
    while (t < run.t_final)
    {
        double horizon = run.t_final;
        if (rec.next < rec.grid.size())
            horizon = std::min(horizon, rec.grid[rec.next]);
        if (gas.moves())
            horizon = std::min(horizon, t + dt_rate);
        const double h = horizon - t;
        double best = std::numeric_limits<double>::infinity();
        std::size_t which = 0;
        for (std::size_t k = 0; k < pairs.size(); ++k)
        {
            const auto& p = pairs[k];
            if (p.rate <= 0)
                continue;
            const double tau = (p.threshold - p.acc) / p.rate;
            if (tau < best)
            {
                best = tau;
                which = k;
            }
        }
        if (best <= h)
        {
            for (auto& p : pairs)
                p.acc += p.rate * best;
            t += best;
            Pair& p = pairs[which];
            gas.bring(p.a, t);
            gas.bring(p.b, t);
            const auto dig = gas.collide(p.a, p.b, p.rng);
            ++res.candidates;
            log_event(res, run, gas, t, p.a, p.b, true, dig);
            p.acc = 0;
            p.threshold = p.rng.exponential(1.0);
            for (auto& q : pairs)
                if (q.a == p.a || q.a == p.b || q.b == p.a || q.b == p.b)
                    refresh(q);
        }
        else
        {
            for (auto& p : pairs)
                p.acc += p.rate * h;
            t = horizon;
            rec.until(gas, t);
            if (gas.moves())
            {
                gas.bring_all(t);
                for (auto& p : pairs)
                    refresh(p);
            }
        }
    }
    rec.until(gas, run.t_final);
    return res;
}

}  // namespace chaoskit::boltzmann
