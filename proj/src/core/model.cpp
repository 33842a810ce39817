// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/core/model.hpp"

#include <cmath>
#include <sstream>

#include "chaoskit/core/error.hpp"

namespace chaoskit
{

std::vector<double> summarize_with(const Summarizer& s, const MeasureView& view)
{
    std::vector<double> out;
    if (s)
        s(view, out);
    return out;
}

void validate_collision_model(const CollisionModel& model, const PointSampler& point_sampler,
                              RngStream rng, std::size_t trials)
{
    require(model.rate && model.post && model.sample_theta,
            "collision model: rate, post and sample_theta are required");
    const std::size_t d = model.dim;
    std::vector<double> z1(d), z2(d), a1(d), a2(d), b1(d), b2(d), theta;
    // Swap test: E[psi1(z1,z2)] must equal E[psi2(z2,z1)] for every pair.
    constexpr std::size_t kInner = 400;
    for (std::size_t t = 0; t < trials; ++t)
    {
        point_sampler(rng, z1);
        point_sampler(rng, z2);
        double r12 = model.rate(z1, z2);
        double r21 = model.rate(z2, z1);
        require(r12 >= 0 && r12 <= model.rate_bound,
                "collision model: rate outside [0, bound]");
        require(std::abs(r12 - r21) <= 1e-12 * std::max(1.0, std::abs(r12)),
                "collision model: rate not symmetric");
        if (t % 20 != 0)
            continue;
        std::vector<double> mean_fwd(d, 0), mean_swp(d, 0), sq(d, 0);
        for (std::size_t k = 0; k < kInner; ++k)
        {
            theta.clear();
            model.sample_theta(rng, theta);
            model.post(z1, z2, theta, a1, a2);
            theta.clear();
            model.sample_theta(rng, theta);
            model.post(z2, z1, theta, b1, b2);
            for (std::size_t c = 0; c < d; ++c)
            {
                mean_fwd[c] += a1[c] / kInner;
                mean_swp[c] += b2[c] / kInner;
                sq[c] += (a1[c] * a1[c] + b2[c] * b2[c]) / kInner;
            }
        }
        for (std::size_t c = 0; c < d; ++c)
        {
            double var = std::max(sq[c] - mean_fwd[c] * mean_fwd[c] - mean_swp[c] * mean_swp[c],
                                  1e-300);
            double se = std::sqrt(var / kInner);
            require(std::abs(mean_fwd[c] - mean_swp[c]) <= 6 * se + 1e-12,
                    "collision model: post-collision law is not symmetric under argument swap");
        }
    }
}

void ModelRegistry::add(Entry entry)
{
    auto tag = entry.tag;
    entries_[tag] = std::move(entry);
}

bool ModelRegistry::contains(const std::string& tag) const
{
    return entries_.count(tag) != 0;
}

const ModelRegistry::Entry& ModelRegistry::at(const std::string& tag) const
{
    auto it = entries_.find(tag);
    if (it == entries_.end())
    {
        std::ostringstream os;
        os << "unknown model tag '" << tag << "'; valid tags:";
        for (const auto& kv : entries_)
            os << ' ' << kv.first;
        throw ConfigError(os.str());
    }
    return it->second;
}

std::vector<std::string> ModelRegistry::tags() const
{
    std::vector<std::string> out;
    for (const auto& kv : entries_)
        out.push_back(kv.first);
    return out;
}

ModelSpec ModelRegistry::make(const std::string& tag, const Params& params) const
{
    const Entry& e = at(tag);
    Params merged = e.defaults;
    for (const auto& [key, value] : params)
    {
        if (!e.defaults.count(key))
            throw ConfigError("model '" + tag + "' has no parameter '" + key + "'");
        merged[key] = value;
    }
    return e.factory(merged);
}

}  // namespace chaoskit
