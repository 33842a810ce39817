// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"

namespace chaoskit::boltzmann
{

void InteractionGraph::validate() const
{
    require(n >= 1 && root < n, "interaction graph: root outside 0..N-1");
    require(t > 0, "interaction graph: t must be positive");
    std::unordered_set<std::size_t> seen{root};
    double prev = t;
    for (const auto& r : routes)
    {
        require(r.time < prev && r.time > 0, "interaction graph: times must decrease inside (0, t)");
        require(r.i < n && r.j < n && r.i != r.j, "interaction graph: invalid route indices");
        require(seen.count(r.j) == 1, "interaction graph: route does not start from a collected index");
        seen.insert(r.i);
        prev = r.time;
    }
}

InteractionGraph sample_interaction_graph(std::size_t n, double lambda, double t,
                                          std::size_t root, RngStream& rng)
{
    require(t > 0, "sample_interaction_graph: t must be positive");
    require(n >= 1 && root < n, "sample_interaction_graph: root outside 0..N-1");
    require(lambda >= 0, "sample_interaction_graph: rate must be >= 0");
    InteractionGraph g;
    g.n = n;
    g.t = t;
    g.root = root;
    std::vector<std::size_t> members{root};
    std::unordered_set<std::size_t> in{root};
    const double nd = static_cast<double>(n);
    double now = t;
    while (lambda > 0)
    {
        const double s = static_cast<double>(members.size());
        const double outside = s * (nd - s);
        const double inside = s * (s - 1) / 2;
        const double total = outside + inside;
        if (total <= 0)
            break;
        now -= rng.exponential(lambda / nd * total);
        if (now <= 0)
            break;
        Route r;
        r.time = now;
        if (rng.uniform() * total < outside)
        {
            r.j = members[rng.below(members.size())];
            do
                r.i = static_cast<std::size_t>(rng.below(n));
            while (in.count(r.i));
            members.push_back(r.i);
            in.insert(r.i);
        }
        else
        {
            const auto a = rng.below(members.size());
            auto b = rng.below(members.size() - 1);
            if (b >= a)
                ++b;
            r.i = members[a];
            r.j = members[b];
        }
        g.routes.push_back(r);
    }
    return g;
}

std::vector<bool> recollision_flags(const InteractionGraph& graph)
{
    std::unordered_set<std::size_t> seen{graph.root};
    std::vector<bool> flags;
    flags.reserve(graph.routes.size());
    for (const auto& r : graph.routes)
    {
        flags.push_back(seen.count(r.i) && seen.count(r.j));
        seen.insert(r.i);
        seen.insert(r.j);
    }
    return flags;
}

std::size_t count_recollisions(const InteractionGraph& graph)
{
    const auto f = recollision_flags(graph);
    return static_cast<std::size_t>(std::count(f.begin(), f.end(), true));
}

std::vector<std::size_t> collected_indices(const InteractionGraph& graph)
{
    std::vector<std::size_t> out{graph.root};
    for (const auto& r : graph.routes)
        out.push_back(r.i);
    return out;
}

void write_graph(std::ostream& os, const InteractionGraph& graph)
{
    os << "time,i,j,recollision_flag\n";
    const auto flags = recollision_flags(graph);
    for (std::size_t k = 0; k < graph.routes.size(); ++k)
    {
        const auto& r = graph.routes[k];
        os << format_real(r.time) << ',' << r.i << ',' << r.j << ',' << (flags[k] ? 1 : 0) << '\n';
    }
}

RootPath graph_forward_realize(const InteractionGraph& graph, const CollisionModel& model,
                               double lambda_bound, const PointSampler& init, RngStream& rng)
{
    graph.validate();
    require(model.rate && model.post && model.sample_theta,
            "graph_forward_realize: model needs rate, post and sample_theta");
    require(lambda_bound > 0 || graph.routes.empty(),
            "graph_forward_realize: the graph rate must be positive");
    const std::size_t d = model.dim;
    std::unordered_map<std::size_t, std::size_t> slot;
    std::vector<double> x;
    std::vector<double> last;
    auto ensure = [&](std::size_t idx) {
        if (slot.count(idx))
            return slot[idx];
        const std::size_t k = last.size();
        slot[idx] = k;
        x.resize((k + 1) * d);
        last.push_back(0.0);
        RngStream s = rng.split(idx).split(purpose::init);
        init(s, std::span<double>(x).subspan(k * d, d));
        return k;
    };
    auto point = [&](std::size_t k) { return std::span<double>(x).subspan(k * d, d); };
    auto bring = [&](std::size_t k, double t) {
        if (model.free_flight && t > last[k])
            model.free_flight(point(k), t - last[k]);
        last[k] = t;
    };
    const std::size_t root = ensure(graph.root);
    for (const auto& r : graph.routes)
    {
        ensure(r.i);
        ensure(r.j);
    }
    RootPath path;
    path.dim = d;
    auto record = [&](double t) {
        path.times.push_back(t);
        auto p = point(root);
        path.states.insert(path.states.end(), p.begin(), p.end());
    };
    record(0.0);
    RngStream events = rng.split(purpose::clock);
    std::vector<double> theta, o1(d), o2(d);
    for (auto it = graph.routes.rbegin(); it != graph.routes.rend(); ++it)
    {
        const std::size_t a = slot[it->i], b = slot[it->j];
        bring(a, it->time);
        bring(b, it->time);
        const double lambda = model.rate(point(a), point(b));
        if (lambda > lambda_bound * (1 + 1e-12))
            throw BoundViolation("collision rate " + format_real(lambda)
                                 + " exceeds the graph rate " + format_real(lambda_bound));
        const double u = events.uniform();
        if (u * lambda_bound <= lambda)
        {
            theta.clear();
            model.sample_theta(events, theta);
            model.post(point(a), point(b), theta, o1, o2);
            std::copy(o1.begin(), o1.end(), point(a).begin());
            std::copy(o2.begin(), o2.end(), point(b).begin());
        }
        if (a == root || b == root)
        {
            bring(root, it->time);
            record(it->time);
        }
    }
    bring(root, graph.t);
    record(graph.t);
    return path;
}

}  // namespace chaoskit::boltzmann
