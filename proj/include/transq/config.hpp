#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "transq/dist.hpp"
#include "transq/error.hpp"
#include "transq/gridfn.hpp"

namespace transq {

// Config problem tied to one field; `field` is a dotted path such as
// "service.mu".
struct ConfigError : InputError {
    ConfigError(std::string field_path, const std::string& what)
        : InputError(field_path + ": " + what), field(std::move(field_path)) {}
    std::string field;
};

struct RunConfig {
    std::optional<ArrivalDist> arrival;
    std::optional<ServiceDist> service;
    std::vector<std::size_t> n_list;
    std::size_t replications = 1;
    uint64_t seed = 1;
    std::optional<GridSpec> grid;
    std::string out_dir = ".";
    std::vector<std::string> formats{"csv", "json"};
    std::optional<double> eps_nabla;
    std::vector<double> times;  // report times for validate
    std::string echo;           // compact JSON of the parsed document
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// "uniform-exp": uniform[-20, 40] arrivals, exponential service with mu = 0.03,
// n in {10, 25, 100, 1000}, R = 10^4, grid [-20, 60] with dt = 0.05.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Throws ConfigError naming the first field the subcommand needs but lacks.
void require_fields(const RunConfig& cfg, const std::string& subcommand);

bool wants_format(const RunConfig& cfg, const std::string& fmt);

}  // namespace transq
