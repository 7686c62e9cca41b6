#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "egorov/spin_weyl.hpp"

namespace egorov {

/// Everything one experiment run reads. Unset optionals take the per-experiment defaults listed
/// by `egorov-spin --help` (see apply_defaults).
struct RunConfig {
    std::string experiment;

    // model
    double omega = 1.0;
    Vec3 h_c = Vec3(0.0, 0.0, 0.5);
    Vec3 h_q = Vec3(0.5, 0.0, 0.0);
    Vec3 h_p = Vec3::Zero();
    std::optional<double> mu;           ///< anharmonic bump height
    double bump_width = 1.0;
    std::string b_profile = "plateau";  ///< plateau | tanh
    double b_slope = 1.0;

    // sweep
    std::vector<double> eps_list;
    std::optional<double> T;
    std::optional<double> gamma;
    std::optional<double> t;             ///< evaluation time for single-time experiments
    std::optional<int> grid_N;           ///< coarse symbol grid (sweeps) or quantum grid (lemma checks)
    std::optional<double> grid_L;
    std::string observable;              ///< comma-separated names
    int samples = 8;                     ///< time samples per horizon
    double norm_tol = 1e-3;
    std::optional<double> pde_dt;        ///< step of the exact symbol evolution
    bool diagnostics = true;

    // misc
    std::optional<int> count;            ///< random symbols / Bloch vectors / flow starts (x10)
    double alpha = 0.5;
    std::string out = "egorov_out";
    std::uint64_t seed = 1;
    int threads = 0;
    bool record_runtime = true;
};

/// The eight experiment names in the order of `--help`.
const std::vector<std::string>& experiment_names();

/// Parses `key = value` lines ('#' starts a comment). Unknown keys and malformed values throw
/// ParseError naming the key and line.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Sets one key from its textual value; throws ParseError.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Fills unset fields with the experiment's defaults.
void apply_defaults(RunConfig& cfg);

/// Checks every field the experiment will read; throws ParseError.
void validate(const RunConfig& cfg);

/// Help text listing keys and per-experiment defaults.
std::string config_help();

/// Runs a validated config, writes artifacts under cfg.out and a short report to `log`.
/// Returns 0 when every check passes, 1 otherwise; NumericalError propagates.
int run(const RunConfig& cfg, std::ostream& log);

/// Full command-line entry: parsing, dispatch and the exit-code contract
/// (0 pass, 1 check failure, 2 parse error, 3 numerical error).
int cli_main(int argc, char** argv);

} // namespace egorov
