// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/chaos/chaos.hpp"
#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/jumps/models.hpp"
#include "chaoskit/mckean/models.hpp"
#include "chaoskit/oracle/oracle.hpp"

namespace chaoskit::chaos
{

namespace
{
using Params = ModelRegistry::Params;

std::size_t count_param(const Params& p, const std::string& key)
{
    const double v = p.at(key);
    require(v >= 0 && std::floor(v) == v, "parameter '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

PointSampler finite_init(std::size_t m, double p0)
{
    require(m >= 2 && p0 >= 0 && p0 <= 1, "finite initial law: need m >= 2 and p0 in [0, 1]");
    return [m, p0](RngStream& r, std::span<double> out) {
        const double u = r.uniform();
        if (u < p0)
            out[0] = 0;
        else
            out[0] = static_cast<double>(
                1 + std::min(m - 2, static_cast<std::size_t>((u - p0) / (1 - p0) * (m - 1))));
    };
}

PointSampler uniform_box(double lo, double hi)
{
    return [lo, hi](RngStream& r, std::span<double> out) {
        for (auto& v : out)
            v = lo + (hi - lo) * r.uniform();
    };
}

struct Builder
{
    std::string description;
    Params defaults;
    std::function<ModelSpec(const Params&)> model;
    std::function<PointSampler(const Params&)> init;
};

const std::map<std::string, Builder>& builders()
{
    static const std::map<std::string, Builder> table = [] {
        std::map<std::string, Builder> t;
        auto gauss = [](const Params& p) {
            return mckean::gaussian_point(p.at("init_mean"), p.at("init_sd"));
        };
        t["kuramoto"] = {"Kuramoto oscillators on the circle",
                         {{"k0", 1.0}, {"sigma", 0.5}, {"init_mean", 0.0}, {"init_sd", 1.0}},
                         [](const Params& p) {
                             return ModelSpec(mckean::kuramoto_model(p.at("k0"), p.at("sigma")));
                         },
                         [](const Params& p) {
                             return mckean::wrapped_normal(p.at("init_mean"), p.at("init_sd"));
                         }};
        t["linear_mean"] = {"b(x, mu) = mean(mu) - x",
                            {{"dim", 1.0}, {"sigma", 1.0}, {"init_mean", 0.0}, {"init_sd", 1.0}},
                            [](const Params& p) {
                                return ModelSpec(mckean::linear_mean_model(count_param(p, "dim"),
                                                                           p.at("sigma")));
                            },
                            gauss};
        t["quadratic"] = {"quadratic confinement and interaction potentials",
                          {{"dim", 1.0},
                           {"a", 1.0},
                           {"c", 1.0},
                           {"sigma", 1.0},
                           {"init_mean", 0.0},
                           {"init_sd", 1.0}},
                          [](const Params& p) {
                              return ModelSpec(mckean::quadratic_gradient_model(
                                  count_param(p, "dim"), p.at("a"), p.at("c"), p.at("sigma")));
                          },
                          gauss};
        t["cucker_smale"] = {"Cucker-Smale flocking with K(r) = (1 + r^2)^-beta",
                             {{"dim", 1.0},
                              {"beta", 0.5},
                              {"sigma", 0.5},
                              {"init_mean", 0.0},
                              {"init_sd", 1.0}},
                             [](const Params& p) {
                                 const double beta = p.at("beta");
                                 return ModelSpec(mckean::cucker_smale_model(
                                     count_param(p, "dim"),
                                     [beta](double r) { return std::pow(1 + r * r, -beta); },
                                     p.at("sigma")));
                             },
                             gauss};
        t["choose_leader"] = {"choose-the-leader on {0..m-1} with a mutation kernel",
                              {{"m", 3.0}, {"eps", 0.5}, {"init_p0", 0.6}},
                              [](const Params& p) {
                                  const std::size_t m = count_param(p, "m");
                                  return ModelSpec(jumps::choose_leader_finite(
                                      m, jumps::mutation_kernel(m, p.at("eps"))));
                              },
                              [](const Params& p) {
                                  return finite_init(count_param(p, "m"), p.at("init_p0"));
                              }};
        t["choose_leader_smooth"] = {"choose-the-leader on the line with a Gaussian kernel",
                                     {{"kernel_sd", 0.5},
                                      {"drift_rate", 0.5},
                                      {"init_mean", 0.0},
                                      {"init_sd", 1.0}},
                                     [](const Params& p) {
                                         return ModelSpec(jumps::choose_leader_smooth(
                                             p.at("kernel_sd"), p.at("drift_rate")));
                                     },
                                     gauss};
        t["bgk"] = {"BGK relaxation in a periodic box",
                    {{"dim", 1.0}, {"rate", 1.0}, {"box", 1.0}, {"radius", 0.125}, {"init_temp", 1.0}},
                    [](const Params& p) {
                        return ModelSpec(jumps::bgk_model(count_param(p, "dim"), p.at("rate"),
                                                          p.at("box"), p.at("radius")));
                    },
                    [](const Params& p) {
                        const std::size_t d = count_param(p, "dim");
                        const double box = p.at("box"), sd = std::sqrt(p.at("init_temp"));
                        return PointSampler([d, box, sd](RngStream& r, std::span<double> out) {
                            for (std::size_t c = 0; c < d; ++c)
                                out[c] = box * r.uniform();
                            for (std::size_t c = d; c < 2 * d; ++c)
                                out[c] = sd * r.normal();
                        });
                    }};
        t["neuron"] = {"leaky neurons with potential-dependent firing",
                       {{"rate_max", 1.0}, {"leak", 0.5}, {"init_max", 1.0}},
                       [](const Params& p) {
                           return ModelSpec(jumps::neuron_model(p.at("rate_max"), p.at("leak")));
                       },
                       [](const Params& p) { return uniform_box(0.0, p.at("init_max")); }};
        t["kac"] = {"Kac walk with uniform rotation angle",
                    {{"rate", 1.0}, {"init_mean", 0.0}, {"init_sd", 1.0}},
                    [](const Params& p) { return ModelSpec(boltzmann::kac_model(p.at("rate"))); },
                    gauss};
        t["maxwell"] = {"homogeneous gas, cross-section 1 (hard_sphere = 0) or |u| (hard_sphere = 1)",
                        {{"dim", 3.0},
                         {"hard_sphere", 0.0},
                         {"vmax", 0.0},
                         {"angular_mass", 1.0},
                         {"init_mean", 0.0},
                         {"init_sd", 1.0}},
                        [](const Params& p) {
                            const auto kind = count_param(p, "hard_sphere") != 0
                                                  ? boltzmann::CrossSection::hard_sphere
                                                  : boltzmann::CrossSection::maxwell_cutoff;
                            return ModelSpec(boltzmann::maxwell_model(count_param(p, "dim"), kind,
                                                                      p.at("vmax"),
                                                                      p.at("angular_mass")));
                        },
                        gauss};
        t["exchange"] = {"finite-state exchange collisions",
                         {{"m", 3.0}, {"same", 0.5}, {"differ", 2.0}, {"init_p0", 0.6}},
                         [](const Params& p) {
                             return ModelSpec(boltzmann::exchange_model(
                                 count_param(p, "m"), p.at("same"), p.at("differ")));
                         },
                         [](const Params& p) {
                             return finite_init(count_param(p, "m"), p.at("init_p0"));
                         }};
        return t;
    }();
    return table;
}

Params merged_params(const std::string& tag, const Params& params)
{
    const auto& entry = model_registry().at(tag);
    Params out = entry.defaults;
    for (const auto& [key, value] : params)
    {
        if (!entry.defaults.count(key))
            throw ConfigError("model '" + tag + "' has no parameter '" + key + "'");
        out[key] = value;
    }
    return out;
}

const std::vector<std::string>& metric_tags()
{
    static const std::vector<std::string> tags{"coupling", "d2_linear", "girsanov", "hs_block",
                                               "omega"};
    return tags;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v)
        s += (s.empty() ? "" : " ") + x;
    return s;
}

//! Final states of `reps` replicas of size n.
std::vector<ParticleState> final_states(const Experiment& ex, std::size_t n, const SweepConfig& c,
                                        const RngStream& root, std::size_t reps)
{
    std::vector<ParticleState> out(reps);
    parallel_for(reps, [&](std::size_t r) {
        if (auto* dm = std::get_if<DiffusionModel>(&ex.model))
        {
            mckean::DiffusionRun run;
            run.model = *dm;
            run.n = n;
            run.dt = c.dt;
            run.t_final = c.t_final;
            run.root = root;
            run.stride = step_count(c.t_final, c.dt);
            run.replica = r;
            run.init = ex.init;
            out[r] = mckean::simulate_particles(run).final();
        }
        else if (auto* jm = std::get_if<MeanFieldJumpModel>(&ex.model))
        {
            jumps::JumpRun run;
            run.model = *jm;
            run.n = n;
            run.t_final = c.t_final;
            run.root = root;
            run.replica = r;
            run.init = ex.init;
            run.keep_events = false;
            out[r] = (jm->collateral ? jumps::simultaneous_jump_simulate(run)
                                     : jumps::pdmp_simulate(run))
                         .bundle.final();
        }
        else
        {
            boltzmann::CollisionRun run;
            run.model = std::get<CollisionModel>(ex.model);
            run.n = n;
            run.t_final = c.t_final;
            run.root = root;
            run.replica = r;
            run.init = ex.init;
            run.keep_events = false;
            out[r] = boltzmann::uniform_clock_simulate(run).bundle.final();
        }
    });
    return out;
}

//! M samples of the limit law at time T.
ParticleState reference_samples(const Experiment& ex, std::size_t m, const SweepConfig& c,
                                const RngStream& rng)
{
    if (auto* dm = std::get_if<DiffusionModel>(&ex.model))
        return mckean::nonlinear_reference(*dm, ex.init, m, c.t_final, c.dt, c.picard, rng)
            .bundle.final();
    if (auto* jm = std::get_if<MeanFieldJumpModel>(&ex.model))
        return jumps::nonlinear_jump_reference(*jm, ex.init, m, c.t_final, c.picard, rng)
            .bundle.final();
    return final_states(ex, m, c, rng, 1).front();
}

const DiffusionModel& need_diffusion(const Experiment& ex, const std::string& metric)
{
    auto* dm = std::get_if<DiffusionModel>(&ex.model);
    require(dm != nullptr, "sweep: metric '" + metric + "' needs a diffusion model, got '"
                               + ex.tag + "'");
    return *dm;
}

struct Series
{
    std::string estimator;
    std::vector<std::size_t> ns;
    std::vector<Estimate> values;
    std::vector<std::vector<double>> samples;
};

class Collector
{
  public:
    void add(const std::string& estimator, std::size_t n, Estimate e, std::vector<double> samples)
    {
        auto it = std::find_if(series_.begin(), series_.end(),
                               [&](const Series& s) { return s.estimator == estimator; });
        if (it == series_.end())
        {
            series_.push_back({estimator, {}, {}, {}});
            it = series_.end() - 1;
        }
        it->ns.push_back(n);
        it->values.push_back(e);
        it->samples.push_back(std::move(samples));
    }
    void add(const std::string& estimator, std::size_t n, double v)
    {
        add(estimator, n, {v, {v, v}}, {v});
    }
    const std::vector<Series>& series() const { return series_; }

  private:
    std::vector<Series> series_;
};
}  // namespace

//---------------------------------------------------------------------------//
const ModelRegistry& model_registry()
{
    static const ModelRegistry reg = [] {
        ModelRegistry r;
        for (const auto& [tag, b] : builders())
            r.add({tag, b.description, b.defaults, b.model});
        return r;
    }();
    return reg;
}

Experiment make_experiment(const std::string& tag, const ModelRegistry::Params& params)
{
    Params p = merged_params(tag, params);
    const auto& b = builders().at(tag);
    return {tag, b.model(p), b.init(p)};
}

std::vector<std::string> sweep_metrics() { return metric_tags(); }

void ChaosReport::validate() const
{
    std::map<std::size_t, double> pathwise;
    for (const auto& r : rows)
    {
        require(r.value >= 0, "report: negative estimate for " + r.estimator);
        require(r.ci_lo <= r.value && r.value <= r.ci_hi,
                "report: CI does not contain the estimate for " + r.estimator);
        if (r.metric == "coupling" && r.estimator == "pathwise_eps")
            pathwise[r.n] = r.value;
    }
    for (const auto& r : rows)
        if (r.metric == "coupling" && r.estimator == "pointwise_eps" && pathwise.count(r.n))
            require(r.value <= pathwise[r.n] * (1 + 1e-12),
                    "report: pointwise eps exceeds pathwise eps at N = " + std::to_string(r.n));
}

ChaosReport sweep(const SweepConfig& c)
{
    const auto& metrics = metric_tags();
    if (std::find(metrics.begin(), metrics.end(), c.metric) == metrics.end())
        throw ConfigError("unknown metric tag '" + c.metric + "'; valid tags: " + join(metrics));
    Experiment ex = make_experiment(c.model, c.params);
    require(!c.ns.empty(), "sweep: empty N list");
    require(c.reps >= 2, "sweep: need at least two replicas");
    require(c.t_final > 0, "sweep: T must be positive");
    require(c.p == 1 || c.p == 2, "sweep: p must be 1 or 2");
    for (std::size_t n : c.ns)
        require(n >= 2, "sweep: every N must be >= 2");

    const RngStream root(c.seed);
    const std::size_t max_n = *std::max_element(c.ns.begin(), c.ns.end());
    const std::size_t m_ref = c.reference_size ? c.reference_size : 16 * max_n;
    const RngStream ref_rng = root.split(purpose::reference);
    Collector col;

    if (c.metric == "coupling")
    {
        const auto& model = need_diffusion(ex, c.metric);
        auto ref = mckean::nonlinear_reference(model, ex.init, m_ref, c.t_final, c.dt, c.picard,
                                               ref_rng);
        for (std::size_t n : c.ns)
        {
            auto rep = mckean::synchronous_coupling(model, n, ref.flow, c.t_final, c.dt, ex.init,
                                                    root.split(n), c.reps, c.p);
            col.add("pathwise_eps", n, {rep.pathwise_eps, rep.ci}, rep.pathwise);
            col.add("pointwise_eps", n, rep.pointwise_eps);
            col.add("beta", n,
                    fournier_guillin_beta(static_cast<double>(n), model.dim, c.p, 4.0 * c.p));
        }
    }
    else if (c.metric == "omega")
    {
        auto ref = reference_samples(ex, m_ref, c, ref_rng);
        for (std::size_t n : c.ns)
        {
            auto runs = final_states(ex, n, c, root.split(n), c.reps);
            auto om = omega_estimates(runs, ref.view(), root.split(n).split(purpose::sampling),
                                      {std::min(c.k, n), c.p, 50});
            col.add("omega_k", n, om.omega_k, {om.omega_k.value});
            col.add("omega_N", n, om.omega_n, {om.omega_n.value});
            col.add("omega_inf", n, om.omega_inf, om.inf_per_replica);
            col.add("floor_k", n, om.floor_k);
            col.add("floor_N", n, om.floor_n);
            col.add("floor_inf", n, om.floor_inf);
        }
    }
    else if (c.metric == "girsanov")
    {
        const auto& model = need_diffusion(ex, c.metric);
        auto ref = mckean::nonlinear_reference(model, ex.init, m_ref, c.t_final, c.dt, c.picard,
                                               ref_rng);
        for (std::size_t n : c.ns)
        {
            auto g = girsanov_entropy_rhs(model, n, ref.flow, c.t_final, c.dt, ex.init,
                                          root.split(n), c.reps);
            col.add("girsanov_rhs", n, g.bound, g.per_replica);
        }
    }
    else if (c.metric == "hs_block")
    {
        const std::size_t d = std::visit([](const auto& m) { return m.dim; }, ex.model);
        metrics::SobolevKernel kernel(d, c.s);
        for (std::size_t n : c.ns)
        {
            auto runs = final_states(ex, n, c, root.split(n), c.reps);
            auto chk = hs_block_bound_check(runs, std::max<std::size_t>(1, n / 2), kernel,
                                            root.split(n).split(purpose::sampling));
            col.add("hs_block_lhs", n, {chk.lhs, chk.ci}, chk.per_replica);
            col.add("hs_block_rhs", n, chk.rhs);
        }
    }
    else
    {
        require(c.model == "choose_leader", "sweep: metric 'd2_linear' needs the choose_leader model");
        Params p = merged_params(c.model, c.params);
        const std::size_t m = count_param(p, "m");
        auto kernel = jumps::mutation_kernel(m, p.at("eps"));
        std::vector<double> f0(m, (1 - p.at("init_p0")) / static_cast<double>(m - 1));
        f0[0] = p.at("init_p0");
        auto ft = oracle::nonlinear_finite_ode(oracle::choose_leader(m, kernel), f0, c.t_final);
        auto family = metrics::LipschitzFamily::tents(1, 0.0, static_cast<double>(m - 1), 2);
        jumps::JumpRun base;
        base.model = std::get<MeanFieldJumpModel>(ex.model);
        base.t_final = c.t_final;
        base.root = root;
        base.init = ex.init;
        ToyLinearOptions opt{c.ns, c.reps, true};
        auto rep = toy_linear_d2_check(base, family, finite_family_means(f0, family),
                                       finite_family_means(ft, family), opt);
        for (std::size_t i = 0; i < rep.ns.size(); ++i)
        {
            col.add("d2_linear", rep.ns[i], {rep.statistic[i], rep.cis[i]}, rep.samples[i]);
            col.add("d2_initial", rep.ns[i], rep.g_initial[i]);
        }
    }

    ChaosReport report;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t idx = 0;
    for (const auto& s : col.series())
    {
        SlopeFit fit{nan, nan, {nan, nan}};
        const bool positive = std::all_of(s.values.begin(), s.values.end(),
                                          [](const Estimate& e) { return e.value > 0; });
        if (s.ns.size() >= 2 && positive)
        {
            std::vector<double> xs(s.ns.begin(), s.ns.end());
            fit = loglog_slope(xs, s.samples, root.split(purpose::bootstrap).split(idx));
        }
        ++idx;
        for (std::size_t i = 0; i < s.ns.size(); ++i)
            report.rows.push_back({c.model, s.ns[i], c.t_final, c.dt, c.reps, c.metric,
                                   s.estimator, s.values[i].value, s.values[i].ci.lo,
                                   s.values[i].ci.hi, fit.slope, fit.ci.lo, fit.ci.hi, c.seed});
    }
    report.validate();
    return report;
}

//---------------------------------------------------------------------------//
void write_report(std::ostream& os, const ChaosReport& report)
{
    os << report_header << '\n';
    for (const auto& r : report.rows)
        os << r.model << ',' << r.n << ',' << format_real(r.t) << ',' << format_real(r.dt) << ','
           << r.reps << ',' << r.metric << ',' << r.estimator << ',' << format_real(r.value) << ','
           << format_real(r.ci_lo) << ',' << format_real(r.ci_hi) << ',' << format_real(r.slope)
           << ',' << format_real(r.slope_ci_lo) << ',' << format_real(r.slope_ci_hi) << ','
           << r.seed << '\n';
}

ChaosReport read_report(std::istream& is)
{
    CsvTable t = read_csv(is);
    std::string header;
    for (const auto& h : t.header)
        header += (header.empty() ? "" : ",") + h;
    if (header != report_header)
        throw IoError("report: unexpected header '" + header + "'");
    ChaosReport out;
    std::size_t line = 1;
    for (const auto& row : t.rows)
    {
        ++line;
        if (row.size() != t.header.size())
            throw IoError("report: line " + std::to_string(line) + " has "
                          + std::to_string(row.size()) + " fields");
        try
        {
            ReportRow r;
            std::size_t pos = 0;
            auto whole = [&](const std::string& s, auto conv) {
                auto v = conv(s, &pos);
                if (pos != s.size())
                    throw std::invalid_argument(s);
                return v;
            };
            auto real = [&](const std::string& s) {
                return whole(s, [](const std::string& x, std::size_t* p) { return std::stod(x, p); });
            };
            auto integer = [&](const std::string& s) {
                return whole(s, [](const std::string& x, std::size_t* p) { return std::stoull(x, p); });
            };
            r.model = row[0];
            r.n = integer(row[1]);
            r.t = real(row[2]);
            r.dt = real(row[3]);
            r.reps = integer(row[4]);
            r.metric = row[5];
            r.estimator = row[6];
            r.value = real(row[7]);
            r.ci_lo = real(row[8]);
            r.ci_hi = real(row[9]);
            r.slope = real(row[10]);
            r.slope_ci_lo = real(row[11]);
            r.slope_ci_hi = real(row[12]);
            r.seed = integer(row[13]);
            out.rows.push_back(std::move(r));
        }
        catch (const std::logic_error&)
        {
            throw IoError("report: malformed number on line " + std::to_string(line));
        }
    }
    return out;
}

}  // namespace chaoskit::chaos
