// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/metrics/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaoskit/core/error.hpp"

namespace chaoskit::metrics
{
namespace
{
template<class T>
std::vector<std::size_t> lapjv(std::size_t n, std::span<const T> c)
{
    require(c.size() == n * n, "solve_assignment: cost matrix must be n x n");
    using idx = std::ptrdiff_t;
    const idx dim = static_cast<idx>(n);
    if (dim == 0)
        return {};
    const double inf = std::numeric_limits<double>::infinity();
    auto cost = [&](idx i, idx j) { return static_cast<double>(c[i * dim + j]); };

    std::vector<idx> rowsol(n, -1), colsol(n, -1), free_rows(n), collist(n), pred(n);
    std::vector<idx> matches(n, 0);
    std::vector<double> v(n), d(n);

    // Column reduction.
    for (idx j = dim - 1; j >= 0; --j)
    {
        double min = cost(0, j);
        idx imin = 0;
        for (idx i = 1; i < dim; ++i)
            if (cost(i, j) < min)
            {
                min = cost(i, j);
                imin = i;
            }
        v[j] = min;
        if (++matches[imin] == 1)
        {
            rowsol[imin] = j;
            colsol[j] = imin;
        }
        else if (v[j] < v[rowsol[imin]])
        {
            idx j1 = rowsol[imin];
            rowsol[imin] = j;
            colsol[j] = imin;
            colsol[j1] = -1;
        }
        else
        {
            colsol[j] = -1;
        }
    }

    // Reduction transfer.
    idx numfree = 0;
    for (idx i = 0; i < dim; ++i)
    {
        if (matches[i] == 0)
        {
            free_rows[numfree++] = i;
        }
        else if (matches[i] == 1)
        {
            idx j1 = rowsol[i];
            double min = inf;
            for (idx j = 0; j < dim; ++j)
                if (j != j1 && cost(i, j) - v[j] < min)
                    min = cost(i, j) - v[j];
            if (min < inf)
                v[j1] -= min;
        }
    }

    // Augmenting row reduction, two passes.
    for (int loop = 0; loop < 2; ++loop)
    {
        idx k = 0;
        idx prvnumfree = numfree;
        numfree = 0;
        // guard against float cycling on exact ties
        std::size_t budget = 16 * n + 64;
        while (k < prvnumfree)
        {
            idx i = free_rows[k++];
            double umin = cost(i, 0) - v[0];
            idx j1 = 0, j2 = 0;
            double usubmin = inf;
            for (idx j = 1; j < dim; ++j)
            {
                double h = cost(i, j) - v[j];
                if (h < usubmin)
                {
                    if (h >= umin)
                    {
                        usubmin = h;
                        j2 = j;
                    }
                    else
                    {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            idx i0 = colsol[j1];
            if (umin < usubmin)
                v[j1] -= (usubmin - umin);
            else if (i0 > -1)
            {
                j1 = j2;
                i0 = colsol[j2];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 > -1)
            {
                rowsol[i0] = -1;
                if (umin < usubmin && budget > 0)
                {
                    --budget;
                    free_rows[--k] = i0;
                }
                else
                {
                    free_rows[numfree++] = i0;
                }
            }
        }
    }

    // Augment each remaining free row along a shortest alternating path.
    for (idx f = 0; f < numfree; ++f)
    {
        idx freerow = free_rows[f];
        for (idx j = 0; j < dim; ++j)
        {
            d[j] = cost(freerow, j) - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }
        idx low = 0, up = 0, last = 0, endofpath = -1;
        bool found = false;
        double min = 0;
        while (!found)
        {
            if (up == low)
            {
                last = low - 1;
                min = d[collist[up++]];
                for (idx k = up; k < dim; ++k)
                {
                    idx j = collist[k];
                    double h = d[j];
                    if (h <= min)
                    {
                        if (h < min)
                        {
                            up = low;
                            min = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (idx k = low; k < up; ++k)
                    if (colsol[collist[k]] < 0)
                    {
                        endofpath = collist[k];
                        found = true;
                        break;
                    }
            }
            if (!found)
            {
                idx j1 = collist[low++];
                idx i = colsol[j1];
                double h = cost(i, j1) - v[j1] - min;
                for (idx k = up; k < dim; ++k)
                {
                    idx j = collist[k];
                    double v2 = cost(i, j) - v[j] - h;
                    if (v2 < d[j])
                    {
                        pred[j] = i;
                        if (v2 == min)
                        {
                            if (colsol[j] < 0)
                            {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                        d[j] = v2;
                    }
                }
            }
        }
        for (idx k = 0; k <= last; ++k)
        {
            idx j1 = collist[k];
            v[j1] += d[j1] - min;
        }
        idx i;
        do
        {
            i = pred[endofpath];
            colsol[endofpath] = i;
            idx j1 = endofpath;
            endofpath = rowsol[i];
            rowsol[i] = j1;
        } while (i != freerow);
    }

    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        require(rowsol[i] >= 0, "solve_assignment: internal error (unassigned row)");
        out[i] = static_cast<std::size_t>(rowsol[i]);
    }
    return out;
}
}  // namespace

std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const double> cost)
{
    return lapjv<double>(n, cost);
}

std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const float> cost)
{
    return lapjv<float>(n, cost);
}

double transport_cost(std::span<const double> a, std::span<const double> b,
                      std::span<const double> cost)
{
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    require(n > 0 && m > 0 && cost.size() == n * m, "transport_cost: shape mismatch");
    double sa = 0, sb = 0;
    for (double x : a)
    {
        require(x >= 0, "transport_cost: negative mass");
        sa += x;
    }
    for (double x : b)
    {
        require(x >= 0, "transport_cost: negative mass");
        sb += x;
    }
    require(std::abs(sa - sb) <= 1e-9 * std::max(1.0, sa), "transport_cost: unequal total mass");

    constexpr double eps = 1e-15;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> supply(a.begin(), a.end()), demand(b.begin(), b.end());
    std::vector<double> flow(n * m, 0.0);
    // node ids: rows 0..n-1, cols n..n+m-1
    const std::size_t V = n + m;
    std::vector<double> pot(V, 0.0), dist(V);
    std::vector<std::ptrdiff_t> parent(V);
    std::vector<char> done(V);

    for (std::size_t iter = 0; iter < 8 * (n + m) * (n + m) + 16; ++iter)
    {
        double remaining = 0;
        for (double s : supply)
            remaining += s;
        if (remaining <= 1e-13 * std::max(1.0, sa))
            break;

        std::fill(dist.begin(), dist.end(), inf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (supply[i] > eps)
                dist[i] = 0;
        // Dense Dijkstra on reduced costs.
        for (;;)
        {
            std::ptrdiff_t u = -1;
            double best = inf;
            for (std::size_t x = 0; x < V; ++x)
                if (!done[x] && dist[x] < best)
                {
                    best = dist[x];
                    u = static_cast<std::ptrdiff_t>(x);
                }
            if (u < 0)
                break;
            done[u] = 1;
            if (static_cast<std::size_t>(u) < n)
            {
                std::size_t i = static_cast<std::size_t>(u);
                for (std::size_t j = 0; j < m; ++j)
                {
                    double rc = cost[i * m + j] + pot[i] - pot[n + j];
                    double nd = dist[i] + std::max(rc, 0.0);
                    if (nd < dist[n + j])
                    {
                        dist[n + j] = nd;
                        parent[n + j] = u;
                    }
                }
            }
            else
            {
                std::size_t j = static_cast<std::size_t>(u) - n;
                for (std::size_t i = 0; i < n; ++i)
                {
                    if (flow[i * m + j] <= eps)
                        continue;
                    double rc = -cost[i * m + j] + pot[n + j] - pot[i];
                    double nd = dist[n + j] + std::max(rc, 0.0);
                    if (nd < dist[i])
                    {
                        dist[i] = nd;
                        parent[i] = u;
                    }
                }
            }
        }
        // Closest column with remaining demand.
        std::ptrdiff_t target = -1;
        double best = inf;
        for (std::size_t j = 0; j < m; ++j)
            if (demand[j] > eps && dist[n + j] < best)
            {
                best = dist[n + j];
                target = static_cast<std::ptrdiff_t>(n + j);
            }
        require(target >= 0, "transport_cost: no augmenting path");
        double maxd = 0;
        for (std::size_t x = 0; x < V; ++x)
            if (dist[x] < inf)
                maxd = std::max(maxd, dist[x]);
        for (std::size_t x = 0; x < V; ++x)
            pot[x] += (dist[x] < inf ? dist[x] : maxd);

        // Bottleneck along the path.
        double push = demand[static_cast<std::size_t>(target) - n];
        std::ptrdiff_t v = target;
        while (parent[v] >= 0)
        {
            std::ptrdiff_t u = parent[v];
            if (static_cast<std::size_t>(u) >= n)
            {
                // backward arc col u -> row v
                std::size_t j = static_cast<std::size_t>(u) - n;
                push = std::min(push, flow[static_cast<std::size_t>(v) * m + j]);
            }
            v = u;
        }
        push = std::min(push, supply[static_cast<std::size_t>(v)]);
        const std::size_t source_row = static_cast<std::size_t>(v);
        v = target;
        while (parent[v] >= 0)
        {
            std::ptrdiff_t u = parent[v];
            if (static_cast<std::size_t>(u) < n)
                flow[static_cast<std::size_t>(u) * m + (static_cast<std::size_t>(v) - n)] += push;
            else
            {
                auto& f = flow[static_cast<std::size_t>(v) * m + (static_cast<std::size_t>(u) - n)];
                f -= push;
                if (f < eps)
                    f = 0;
            }
            v = u;
        }
        supply[source_row] -= push;
        demand[static_cast<std::size_t>(target) - n] -= push;
        if (supply[source_row] < eps)
            supply[source_row] = 0;
        if (demand[static_cast<std::size_t>(target) - n] < eps)
            demand[static_cast<std::size_t>(target) - n] = 0;
    }
    double total = 0;
    for (std::size_t k = 0; k < n * m; ++k)
        total += flow[k] * cost[k];
    return total;
}

}  // namespace chaoskit::metrics
