#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccopt/cost.hpp"
#include "ccopt/optimize.hpp"

#include "json.hpp"

namespace ccopt {

/// How a spatial field is produced: a constant, a centered Gaussian bump on
/// top of a base level, or a field dump file.
struct FieldSpec {
    enum class Kind { constant, gaussian, file };
    Kind kind = Kind::constant;
    double value = 0.0;       // constant level / gaussian base
    double amplitude = 0.0;   // gaussian
    double width = 0.1;       // gaussian
    std::string path;         // file
};

struct GridConfig {
    int dim = 1;
    std::vector<int> cells;
    std::vector<double> extent;
};

struct TimeConfig {
    double T = 1.0;
    int steps = 1;
};

struct ControlConfig {
    std::vector<double> mask_lo;  // empty: whole domain
    std::vector<double> mask_hi;
    ControlConstraints constraints;
    enum class Initial { zero, constant, file };
    Initial initial = Initial::zero;
    double initial_value = 0.0;
    std::string initial_file;  // single spatial field replicated over time
};

struct CostConfig {
    double gamma_u = 1.0;
    double gamma_v = 0.0;
    double gamma_f = 0.0;
    enum class Desired { generate, files };
    Desired desired = Desired::generate;
    // generate: forward run at f_star
    ControlConfig::Initial fstar = ControlConfig::Initial::zero;
    double fstar_value = 0.0;
    std::string fstar_file;
    // files: printf-style patterns taking the time index
    std::string u_d_pattern;
    std::string v_d_pattern;
};

struct GradcheckConfig {
    double eps = 1e-5;
    int directions = 20;
    int transpose_trials = 10;
    unsigned seed = 1;
};

struct OutputConfig {
    std::string dir = ".";
    bool dump_fields = false;
};

struct RunConfig {
    GridConfig grid;
    TimeConfig time;
    ModelParams model;
    FieldSpec u0;
    FieldSpec v0;
    ControlConfig control;
    std::optional<CostConfig> cost;
    OptimizeOptions optimize;
    GradcheckConfig gradcheck;
    OutputConfig output;
};

/// Parses the block-structured plain-text configuration. Unknown blocks or
/// keys are rejected; all referenced invariants are re-validated.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Fully resolved configuration (defaults materialized) for report echoes.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

// Realized objects.
Grid build_grid(const RunConfig& cfg);
ScalarField build_field(const FieldSpec& spec, const Grid& grid);
SubdomainMask build_mask(const RunConfig& cfg, const Grid& grid);
ControlField build_initial_control(const RunConfig& cfg, const Grid& grid,
                                   const SubdomainMask& mask);

}  // namespace ccopt
