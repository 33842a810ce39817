// Copyright chaoskit contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "chaoskit/core/model.hpp"

namespace chaoskit::cli
{

inline constexpr const char* version = "0.3.0";

enum class ExitCode : int
{
    ok = 0,
    failure = 1,
    bad_config = 2,
    precondition = 3,
    io = 4
};

/*!
 * Flat `key = value` configuration with `#` comments.
 *
 * Later assignments override earlier ones, so `--set` overrides are applied
 * after the file.
 */
class Config
{
  public:
    static Config parse(std::istream& is, const std::string& source);
    static Config load(const std::string& path);

    //! Applies one `key=value` assignment; throws ConfigError when malformed.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

struct ExperimentConfig
{
    std::string command;
    std::string model;
    ModelRegistry::Params params;
    std::vector<std::size_t> ns;
    double t_final{1};
    double dt{1e-2};
    double record_dt{0};  //!< 0: record t = 0 and t = T
    std::size_t reps{1};
    std::string metric;
    double s{1};
    int p{2};
    std::size_t k{2};
    double lambda{1};
    std::size_t reference_size{0};
    std::size_t picard{2};
    std::uint64_t seed{0};
    std::string output{"."};
    std::string report;

    //! Typed view of a config; unknown keys and unparsable values throw ConfigError.
    static ExperimentConfig from(const Config& config);
    //! Every resolved key, in the config file format.
    std::string echo() const;
};

const std::vector<std::string>& commands();

/*!
 * Entry point behind the executable: flags --config PATH, --set key=value
 * (repeatable), --threads INT, --out DIR. Errors are reported on `err` as a
 * single line `error: code=<exit> kind=<kind> message=<text>`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chaoskit::cli
