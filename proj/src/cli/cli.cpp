// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#include "chaoskit/cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chaoskit/boltzmann/boltzmann.hpp"
#include "chaoskit/chaos/chaos.hpp"
#include "chaoskit/core/csv.hpp"
#include "chaoskit/core/error.hpp"
#include "chaoskit/core/parallel.hpp"
#include "chaoskit/jumps/models.hpp"
#include "chaoskit/oracle/oracle.hpp"

namespace chaoskit::cli
{

namespace
{
//! Input that exists but cannot be parsed (exit code 2).
class MalformedInput : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    double x = 0;
    try
    {
        x = std::stod(v, &pos);
    }
    catch (const std::logic_error&)
    {
        pos = 0;
    }
    if (v.empty() || pos != v.size())
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return x;
}

std::uint64_t parse_count(const std::string& key, const std::string& v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("key '" + key + "': '" + v + "' is not a nonnegative integer");
    try
    {
        return std::stoull(v);
    }
    catch (const std::out_of_range&)
    {
        throw ConfigError("key '" + key + "': '" + v + "' is out of range");
    }
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v)
{
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_count(key, trim(item)));
    return out;
}

const std::vector<std::string>& general_keys()
{
    static const std::vector<std::string> keys{
        "command", "model", "N",    "T",        "dt",   "record_dt", "reps",   "metric",
        "s",       "p",     "k",    "lambda",   "reference_size",   "picard", "seed",
        "output",  "report"};
    return keys;
}

//---------------------------------------------------------------------------//
namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write '" + path.string() + "'");
    return os;
}

void close_output(std::ofstream& os, const fs::path& path)
{
    os.close();
    if (!os)
        throw IoError("write failed for '" + path.string() + "'");
}

struct Outputs
{
    fs::path dir;
    std::vector<std::string> files;
    std::vector<std::string> warnings;

    template<class Writer>
    void write(const std::string& name, Writer&& writer)
    {
        const fs::path path = dir / name;
        auto os = open_output(path);
        writer(os);
        close_output(os, path);
        files.push_back(name);
    }
};

std::size_t single_n(const ExperimentConfig& c)
{
    require(c.ns.size() == 1, "command '" + c.command + "' needs exactly one N");
    return c.ns.front();
}

chaos::Experiment experiment(const ExperimentConfig& c)
{
    if (c.model.empty())
        throw ConfigError("key 'model' is required for command '" + c.command + "'");
    return chaos::make_experiment(c.model, c.params);
}

//---------------------------------------------------------------------------//
void cmd_simulate(const ExperimentConfig& c, Outputs& out)
{
    auto ex = experiment(c);
    const std::size_t n = single_n(c);
    require(c.reps >= 1, "simulate: reps must be >= 1");
    const RngStream root(c.seed);
    std::vector<TrajectoryBundle> bundles(c.reps);
    parallel_for(c.reps, [&](std::size_t r) {
        if (auto* dm = std::get_if<DiffusionModel>(&ex.model))
        {
            mckean::DiffusionRun run;
            run.model = *dm;
            run.n = n;
            run.dt = c.dt;
            run.t_final = c.t_final;
            run.root = root;
            run.stride = step_count(c.record_dt > 0 ? c.record_dt : c.t_final, c.dt);
            run.replica = r;
            run.init = ex.init;
            bundles[r] = mckean::simulate_particles(run);
        }
        else if (auto* jm = std::get_if<MeanFieldJumpModel>(&ex.model))
        {
            jumps::JumpRun run;
            run.model = *jm;
            run.n = n;
            run.t_final = c.t_final;
            run.root = root;
            run.replica = r;
            run.record_dt = c.record_dt;
            run.init = ex.init;
            run.keep_events = false;
            bundles[r] = (jm->collateral ? jumps::simultaneous_jump_simulate(run)
                                         : jumps::pdmp_simulate(run))
                             .bundle;
        }
        else
        {
            boltzmann::CollisionRun run;
            run.model = std::get<CollisionModel>(ex.model);
            run.n = n;
            run.t_final = c.t_final;
            run.root = root;
            run.replica = r;
            run.record_dt = c.record_dt;
            run.init = ex.init;
            run.keep_events = false;
            bundles[r] = boltzmann::uniform_clock_simulate(run).bundle;
        }
    });
    out.write("trajectory.csv", [&](std::ostream& os) {
        write_trajectory_header(os, bundles.front().final().dim);
        for (std::size_t r = 0; r < c.reps; ++r)
            write_trajectory_rows(os, bundles[r], r);
    });
}

void cmd_oracle(const ExperimentConfig& c, Outputs& out)
{
    if (c.model.empty())
        throw ConfigError("key 'model' is required for command 'oracle'");
    const auto& defaults = chaos::model_registry().at(c.model).defaults;
    auto param = [&](const std::string& key) {
        auto it = c.params.find(key);
        return it != c.params.end() ? it->second : defaults.at(key);
    };
    require(c.model == "choose_leader" || c.model == "exchange",
            "oracle: model must be a finite-state model (choose_leader or exchange)");
    experiment(c);
    const auto m = static_cast<std::size_t>(param("m"));
    const std::size_t n = single_n(c);
    oracle::FiniteModel finite = c.model == "choose_leader"
                                     ? oracle::choose_leader(m, jumps::mutation_kernel(m, param("eps")))
                                     : oracle::exchange(m, param("same"), param("differ"));
    const double p0 = param("init_p0");
    std::vector<double> f0(m, (1 - p0) / static_cast<double>(m - 1));
    f0[0] = p0;
    auto fn = oracle::exact_evolve(oracle::build_generator(finite, n),
                                   oracle::product_measure(f0, n), c.t_final);
    out.write("distribution.csv", [&](std::ostream& os) { oracle::write_distribution(os, fn); });
    out.write("marginal.csv", [&](std::ostream& os) {
        oracle::write_distribution(os, oracle::exact_marginal(fn, m, n, 1));
    });
}

chaos::SweepConfig sweep_config(const ExperimentConfig& c)
{
    chaos::SweepConfig s;
    s.model = c.model;
    s.params = c.params;
    s.ns = c.ns;
    s.metric = c.metric;
    s.reps = c.reps;
    s.t_final = c.t_final;
    s.dt = c.dt;
    s.p = c.p;
    s.s = c.s;
    s.k = c.k;
    s.reference_size = c.reference_size;
    s.picard = c.picard;
    s.seed = c.seed;
    return s;
}

void cmd_sweep(const ExperimentConfig& c, Outputs& out)
{
    if (c.model.empty())
        throw ConfigError("key 'model' is required for command 'sweep'");
    if (c.metric.empty())
        throw ConfigError("key 'metric' is required for command 'sweep'");
    auto report = chaos::sweep(sweep_config(c));
    out.write("report.csv", [&](std::ostream& os) { chaos::write_report(os, report); });
}

void cmd_couple(const ExperimentConfig& c, Outputs& out)
{
    auto ex = experiment(c);
    require(!c.ns.empty(), "couple: empty N list");
    const RngStream root(c.seed);
    const std::size_t max_n = *std::max_element(c.ns.begin(), c.ns.end());
    const std::size_t m = c.reference_size ? c.reference_size : 16 * max_n;
    struct Row
    {
        std::size_t n;
        std::vector<double> pathwise;
        std::vector<double> times;
        std::vector<double> curve;
    };
    std::vector<Row> rows;
    if (auto* dm = std::get_if<DiffusionModel>(&ex.model))
    {
        auto ref = mckean::nonlinear_reference(*dm, ex.init, m, c.t_final, c.dt, c.picard,
                                               root.split(purpose::reference));
        for (std::size_t n : c.ns)
        {
            auto rep = mckean::synchronous_coupling(*dm, n, ref.flow, c.t_final, c.dt, ex.init,
                                                    root.split(n), c.reps, c.p);
            std::vector<double> times(rep.pointwise_curve.size());
            for (std::size_t i = 0; i < times.size(); ++i)
                times[i] = static_cast<double>(i) * c.dt;
            rows.push_back({n, rep.pathwise, times, rep.pointwise_curve});
        }
    }
    else if (auto* jm = std::get_if<MeanFieldJumpModel>(&ex.model))
    {
        auto ref = jumps::nonlinear_jump_reference(*jm, ex.init, m, c.t_final, c.picard,
                                                   root.split(purpose::reference));
        for (std::size_t n : c.ns)
        {
            auto rep = jumps::optimal_jump_coupling_1d(*jm, n, ref.flow, c.t_final, ex.init,
                                                       root.split(n), c.reps, {256, 1e-2, c.p});
            rows.push_back({n, rep.pathwise, rep.curve_times, rep.pointwise_curve});
        }
    }
    else
    {
        throw PreconditionError("couple: collision models have no coupling; use a diffusion or "
                                "mean-field jump model");
    }
    out.write("coupling.csv", [&](std::ostream& os) {
        os << "N,replica,pathwise\n";
        for (const auto& r : rows)
            for (std::size_t i = 0; i < r.pathwise.size(); ++i)
                os << r.n << ',' << i << ',' << format_real(r.pathwise[i]) << '\n';
    });
    out.write("curve.csv", [&](std::ostream& os) {
        os << "N,t,pointwise\n";
        for (const auto& r : rows)
            for (std::size_t i = 0; i < r.curve.size(); ++i)
                os << r.n << ',' << format_real(r.times[i]) << ',' << format_real(r.curve[i])
                   << '\n';
    });
}

void cmd_graph_stats(const ExperimentConfig& c, Outputs& out)
{
    require(!c.ns.empty(), "graph-stats: empty N list");
    require(c.reps >= 1, "graph-stats: reps must be >= 1");
    const RngStream root(c.seed);
    out.write("graph_stats.csv", [&](std::ostream& os) {
        os << "N,lambda,T,reps,mean_routes,mean_recollisions,recollision_probability\n";
        for (std::size_t n : c.ns)
        {
            std::vector<double> routes(c.reps), recol(c.reps);
            parallel_for(c.reps, [&](std::size_t r) {
                RngStream rng = root.split(n).split(r);
                auto g = boltzmann::sample_interaction_graph(n, c.lambda, c.t_final, 0, rng);
                routes[r] = static_cast<double>(g.routes.size());
                recol[r] = static_cast<double>(boltzmann::count_recollisions(g));
            });
            const double hit = static_cast<double>(
                std::count_if(recol.begin(), recol.end(), [](double v) { return v > 0; }));
            os << n << ',' << format_real(c.lambda) << ',' << format_real(c.t_final) << ','
               << c.reps << ',' << format_real(mean(routes)) << ',' << format_real(mean(recol))
               << ',' << format_real(hit / static_cast<double>(c.reps)) << '\n';
        }
    });
}

void cmd_plotdata(const ExperimentConfig& c, Outputs& out)
{
    if (c.report.empty())
        throw ConfigError("key 'report' is required for command 'plotdata'");
    std::ifstream is(c.report, std::ios::binary);
    if (!is)
        throw IoError("cannot read '" + c.report + "'");
    chaos::ChaosReport report;
    try
    {
        report = chaos::read_report(is);
    }
    catch (const IoError& e)
    {
        throw MalformedInput(c.report + ": " + e.what());
    }
    struct Group
    {
        std::string name;
        std::vector<double> x, y;
    };
    std::vector<Group> groups;
    std::size_t dropped = 0;
    for (const auto& r : report.rows)
    {
        if (!(r.value > 0) || r.n == 0)
        {
            ++dropped;
            continue;
        }
        const std::string name = r.metric + ":" + r.estimator;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return g.name == name; });
        if (it == groups.end())
        {
            groups.push_back({name, {}, {}});
            it = groups.end() - 1;
        }
        it->x.push_back(std::log10(static_cast<double>(r.n)));
        it->y.push_back(std::log10(r.value));
    }
    std::vector<LineFit> fits(groups.size());
    std::vector<bool> fitted(groups.size(), false);
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        const auto& x = groups[g].x;
        if (x.size() >= 2 && std::any_of(x.begin(), x.end(), [&](double v) { return v != x[0]; }))
        {
            fits[g] = ols(groups[g].x, groups[g].y);
            fitted[g] = true;
        }
    }
    out.write("plotdata.dat", [&](std::ostream& os) {
        for (std::size_t g = 0; g < groups.size(); ++g)
        {
            if (g)
                os << "\n\n";
            os << "# " << groups[g].name << "\n# log10(N) log10(value) residual\n";
            for (std::size_t i = 0; i < groups[g].x.size(); ++i)
            {
                const double x = groups[g].x[i], y = groups[g].y[i];
                const double res = fitted[g] ? y - (fits[g].intercept + fits[g].slope * x) : 0.0;
                os << format_real(x) << ' ' << format_real(y) << ' ' << format_real(res) << '\n';
            }
        }
    });
    out.write("plotdata_fit.dat", [&](std::ostream& os) {
        os << "# series slope intercept\n";
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (fitted[g])
                os << groups[g].name << ' ' << format_real(fits[g].slope) << ' '
                   << format_real(fits[g].intercept) << '\n';
    });
    if (dropped)
        out.warnings.push_back("dropped_rows = " + std::to_string(dropped));
}

void write_manifest(const ExperimentConfig& c, Outputs& out)
{
    std::vector<std::string> files = out.files;
    out.write("manifest.txt", [&](std::ostream& os) {
        os << "# chaoskit " << version << '\n';
        os << "# outputs:";
        for (const auto& f : files)
            os << ' ' << f;
        os << '\n';
        for (const auto& w : out.warnings)
            os << "# warning " << w << '\n';
        os << c.echo();
    });
}

std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

int report_error(std::ostream& err, ExitCode code, const char* kind, const std::string& what)
{
    err << "error: code=" << static_cast<int>(code) << " kind=" << kind
        << " message=" << one_line(what) << '\n';
    return static_cast<int>(code);
}
}  // namespace

//---------------------------------------------------------------------------//
Config Config::parse(std::istream& is, const std::string& source)
{
    Config c;
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line))
    {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

Config Config::load(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot read config '" + path + "'");
    return parse(is, path);
}

void Config::set(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty())
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string& Config::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("missing key '" + key + "'");
    return it->second;
}

ExperimentConfig ExperimentConfig::from(const Config& config)
{
    ExperimentConfig c;
    const auto& v = config.values();
    auto has = [&](const char* k) { return v.count(k) != 0; };
    c.command = has("command") ? v.at("command") : "";
    if (c.command.empty())
        throw ConfigError("missing key 'command'");
    const auto& cmds = commands();
    if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    {
        std::string list;
        for (const auto& x : cmds)
            list += " " + x;
        throw ConfigError("unknown command '" + c.command + "'; valid commands:" + list);
    }
    if (has("model"))
        c.model = v.at("model");
    if (has("N"))
        c.ns = parse_list("N", v.at("N"));
    if (has("T"))
        c.t_final = parse_real("T", v.at("T"));
    if (has("dt"))
        c.dt = parse_real("dt", v.at("dt"));
    if (has("record_dt"))
        c.record_dt = parse_real("record_dt", v.at("record_dt"));
    if (has("reps"))
        c.reps = parse_count("reps", v.at("reps"));
    if (has("metric"))
        c.metric = v.at("metric");
    if (has("s"))
        c.s = parse_real("s", v.at("s"));
    if (has("p"))
        c.p = static_cast<int>(parse_count("p", v.at("p")));
    if (has("k"))
        c.k = parse_count("k", v.at("k"));
    if (has("lambda"))
        c.lambda = parse_real("lambda", v.at("lambda"));
    if (has("reference_size"))
        c.reference_size = parse_count("reference_size", v.at("reference_size"));
    if (has("picard"))
        c.picard = parse_count("picard", v.at("picard"));
    if (has("seed"))
        c.seed = parse_count("seed", v.at("seed"));
    if (has("output"))
        c.output = v.at("output");
    if (has("report"))
        c.report = v.at("report");

    const auto& general = general_keys();
    const ModelRegistry::Params* defaults = nullptr;
    if (!c.model.empty())
        defaults = &chaos::model_registry().at(c.model).defaults;
    for (const auto& [key, value] : v)
    {
        if (std::find(general.begin(), general.end(), key) != general.end())
            continue;
        if (defaults == nullptr || !defaults->count(key))
            throw ConfigError("unknown key '" + key + "'");
        c.params[key] = parse_real(key, value);
    }
    if (defaults)
        for (const auto& [key, value] : *defaults)
            c.params.try_emplace(key, value);
    return c;
}

std::string ExperimentConfig::echo() const
{
    std::ostringstream os;
    std::string n_list;
    for (std::size_t n : ns)
        n_list += (n_list.empty() ? "" : ",") + std::to_string(n);
    os << "command = " << command << '\n';
    if (!model.empty())
        os << "model = " << model << '\n';
    os << "N = " << n_list << '\n'
       << "T = " << format_real(t_final) << '\n'
       << "dt = " << format_real(dt) << '\n'
       << "record_dt = " << format_real(record_dt) << '\n'
       << "reps = " << reps << '\n';
    if (!metric.empty())
        os << "metric = " << metric << '\n';
    os << "s = " << format_real(s) << '\n'
       << "p = " << p << '\n'
       << "k = " << k << '\n'
       << "lambda = " << format_real(lambda) << '\n'
       << "reference_size = " << reference_size << '\n'
       << "picard = " << picard << '\n'
       << "seed = " << seed << '\n'
       << "output = " << output << '\n';
    if (!report.empty())
        os << "report = " << report << '\n';
    for (const auto& [key, value] : params)
        os << key << " = " << format_real(value) << '\n';
    return os.str();
}

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"couple", "graph-stats", "oracle",
                                            "plotdata", "simulate", "sweep"};
    return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    const int saved_threads = thread_count();
    struct Restore
    {
        int threads;
        ~Restore() { set_thread_count(threads); }
    } restore{saved_threads};
    try
    {
        Config config;
        std::vector<std::string> sets;
        std::string out_dir;
        bool have_config = false;
        for (std::size_t i = 0; i < args.size(); ++i)
        {
            const std::string& a = args[i];
            auto value = [&]() -> const std::string& {
                if (i + 1 >= args.size())
                    throw ConfigError("flag " + a + " needs a value");
                return args[++i];
            };
            if (a == "--help" || a == "-h")
            {
                out << "usage: chaoskit --config PATH [--set key=value]... [--threads INT] "
                       "[--out DIR]\ncommands:";
                for (const auto& c : commands())
                    out << ' ' << c;
                out << '\n';
                return 0;
            }
            if (a == "--config")
            {
                config = Config::load(value());
                have_config = true;
            }
            else if (a == "--set")
                sets.push_back(value());
            else if (a == "--threads")
                set_thread_count(static_cast<int>(parse_count("--threads", value())));
            else if (a == "--out")
                out_dir = value();
            else
                throw ConfigError("unknown flag '" + a + "'");
        }
        if (!have_config && sets.empty())
            throw ConfigError("no configuration given (use --config or --set)");
        for (const auto& s : sets)
            config.set(s);
        if (!out_dir.empty())
            config.set("output", out_dir);
        const ExperimentConfig c = ExperimentConfig::from(config);

        Outputs outputs{c.output, {}, {}};
        std::error_code ec;
        fs::create_directories(outputs.dir, ec);
        if (ec)
            throw IoError("cannot create output directory '" + c.output + "': " + ec.message());

        if (c.command == "simulate")
            cmd_simulate(c, outputs);
        else if (c.command == "oracle")
            cmd_oracle(c, outputs);
        else if (c.command == "sweep")
            cmd_sweep(c, outputs);
        else if (c.command == "couple")
            cmd_couple(c, outputs);
        else if (c.command == "graph-stats")
            cmd_graph_stats(c, outputs);
        else
            cmd_plotdata(c, outputs);
        write_manifest(c, outputs);
        for (const auto& f : outputs.files)
            out << (outputs.dir / f).string() << '\n';
        return 0;
    }
    catch (const ConfigError& e)
    {
        return report_error(err, ExitCode::bad_config, "config", e.what());
    }
    catch (const MalformedInput& e)
    {
        return report_error(err, ExitCode::bad_config, "malformed", e.what());
    }
    catch (const IoError& e)
    {
        return report_error(err, ExitCode::io, "io", e.what());
    }
    catch (const PreconditionError& e)
    {
        return report_error(err, ExitCode::precondition, "precondition", e.what());
    }
    catch (const std::exception& e)
    {
        return report_error(err, ExitCode::failure, "internal", e.what());
    }
}

}  // namespace chaoskit::cli
